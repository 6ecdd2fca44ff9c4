import logging

from topofabric.exceptions import FabricError, InputError
from topofabric.experiments.ingest import ingest_scene_sequence
from topofabric.experiments.reports import output_dir, write_plot_json
from topofabric.graphs.integrated import build_integrated_graph, design_control
from topofabric.models.experiment import ExperimentConfig, RunReport, StepRecord
from topofabric.models.scene import SceneState

logger = logging.getLogger(__name__)


def run_pipeline(config: ExperimentConfig, scenes: list[SceneState] | None = None) -> RunReport:
    """
    Process a scene sequence frame by frame through the integrated graph.

    A frame that fails is recorded with its error and the run moves on; the failed frame does
    not become the previous frame of the next one.
    """
    if scenes is None:
        if config.input is None:
            raise InputError("the pipeline needs an input scene sequence")
        scenes = ingest_scene_sequence(config.input)
    report = RunReport()
    if not scenes:
        return report

    graph = build_integrated_graph(config, design_control(config))
    previous, history, previous_command = None, [], None
    for index, scene in enumerate(scenes):
        try:
            result = graph.invoke(
                {
                    "frame_index": index,
                    "scene": scene,
                    "previous": previous,
                    "history": history,
                    "previous_command": previous_command,
                }
            )
        except (FabricError, ArithmeticError, ValueError) as e:
            logger.warning(f"frame {index} (t={scene.timestamp}) failed: {e}")
            report.records.append(
                StepRecord(t=scene.timestamp, edges=scene.graph.m, error=f"{type(e).__name__}: {e}")
            )
            continue
        record = result["record"]
        report.records.append(record)
        previous = result["solved"]
        history = [*history, result["trace"]][-config.pipeline.history :]
        previous_command = record.command

    flagged = sum(record.violated for record in report.records)
    logger.info(f"pipeline processed {len(scenes)} frames, {flagged} with violations")
    return report


def write_run_report(report: RunReport, out: str) -> list[str]:
    directory = output_dir(out)
    data = report.to_csv(directory / "run_report.csv")
    plot = write_plot_json(
        directory / "run_report.plot.json",
        data,
        x="t",
        series=["total_loss", "ph_distance", "context_distance", "phase_margin"],
        title="Integrated cycle",
        x_label="time (s)",
    )
    return [data, plot]
