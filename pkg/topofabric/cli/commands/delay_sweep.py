from topofabric.cli.base import BaseCommand
from topofabric.experiments.delay_sweep import run_delay_sweep, write_sweep


class Command(BaseCommand):
    help = "Phase margin of each compensation method across a grid of delays"
    mode = "delay-sweep"

    def add_arguments(self, parser):
        parser.add_argument(
            "--workers",
            type=int,
            default=None,
            help="Concurrent sweep cells (defaults to delay_sweep.workers in the config)",
        )

    def handle(self, config, **options):
        if options.get("workers"):
            section = config.delay_sweep.model_copy(update={"workers": options["workers"]})
            config = config.model_copy(update={"delay_sweep": section})
        result = run_delay_sweep(config)
        for method in result.methods:
            first = result.first_unsafe[method]
            where = "never" if first is None else f"{first:g} s"
            self.stdout.write(f"{method}: first margin below {result.phi_safe:g} deg at {where}\n")
        return write_sweep(result, config.out)
