from topofabric.cli.base import BaseCommand
from topofabric.experiments.pipeline import run_pipeline, write_run_report
from topofabric.experiments.unified_bound import (
    check_constants,
    evaluate_unified_bound,
    write_bound_report,
)


class Command(BaseCommand):
    help = "Run the integrated cycle and evaluate the unified stability bound at every step"
    mode = "unified-bound"

    def handle(self, config, **options):
        # fail before the run when constants are missing
        check_constants(config.bound)
        run = run_pipeline(config)
        report = evaluate_unified_bound(run, config.bound, config.topology.dimension_weights)
        unsatisfied = sum(not record.satisfied for record in report.records)
        self.stdout.write(f"{len(report.records)} steps, {unsatisfied} unsatisfied\n")
        return write_run_report(run, config.out) + write_bound_report(report, config.out)
