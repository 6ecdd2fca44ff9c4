import os

from topofabric.cli.base import BaseCommand, CommandError
from topofabric.graphs.integrated import build_integrated_graph


class Command(BaseCommand):
    help = "Write the integrated cycle as a diagram using LangGraph's built-in visualization"

    def add_arguments(self, parser):
        parser.add_argument(
            "--format",
            type=str,
            choices=["mermaid", "ascii"],
            default="mermaid",
            help="Output format: mermaid source or ascii text (default: mermaid)",
        )

    def handle(self, config, **options):
        output_format = options.get("format") or "mermaid"
        os.makedirs(config.out, exist_ok=True)
        graph = build_integrated_graph(config)
        extension = "mmd" if output_format == "mermaid" else "txt"
        output_path = os.path.join(config.out, f"integrated_cycle.{extension}")

        try:
            drawable = graph.get_graph()
            text = drawable.draw_mermaid() if output_format == "mermaid" else drawable.draw_ascii()
        except Exception as e:
            raise CommandError(f"Error drawing the integrated cycle: {e}") from e

        with open(output_path, "w") as f:
            f.write(text)
        return [output_path]
