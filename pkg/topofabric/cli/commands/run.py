from topofabric.cli.base import BaseCommand
from topofabric.experiments.pipeline import run_pipeline, write_run_report


class Command(BaseCommand):
    help = "Run the integrated cycle over a scene sequence and write the per-step report"
    mode = "pipeline"

    def handle(self, config, **options):
        report = run_pipeline(config)
        flagged = sum(record.violated for record in report.records)
        self.stdout.write(f"{len(report.records)} steps, {flagged} flagged\n")
        return write_run_report(report, config.out)
