from topofabric.cli.base import BaseCommand
from topofabric.experiments.ph_decay import run_ph_decay, write_decay_table


class Command(BaseCommand):
    help = "Record persistence distance along a solver trajectory and fit its decay exponent"
    mode = "ph-decay"

    def handle(self, config, **options):
        table = run_ph_decay(config)
        if table.fitted:
            self.stdout.write(
                f"final d_PH {table.final_distance:.4g}, slope {table.slope:.3f} "
                f"(r^2 {table.r_squared:.3f})\n"
            )
        else:
            self.stdout.write(f"final d_PH {table.final_distance:.4g}, {table.note}\n")
        return write_decay_table(table, config.out)
