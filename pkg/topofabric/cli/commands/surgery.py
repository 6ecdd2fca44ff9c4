from topofabric.cli.base import BaseCommand
from topofabric.experiments.surgery_demo import run_surgery_demo, write_surgery


class Command(BaseCommand):
    help = "Curvature-guided neck surgery on a graph (the built-in dumbbell without --input)"
    mode = "surgery-demo"

    def handle(self, config, **options):
        graph, result, log = run_surgery_demo(config)
        self.stdout.write(
            f"removed {len(log.removed_edges)} edge(s): {log.removed_edges}; "
            f"variance {log.variance_before:.4f} -> {log.variance_after:.4f}\n"
        )
        return write_surgery(graph, result, log, config.out)
