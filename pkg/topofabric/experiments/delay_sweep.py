import logging
from concurrent.futures import ThreadPoolExecutor

from topofabric.control.compensators import smith_predictor
from topofabric.control.margins import phase_margin
from topofabric.control.ortsf import design_point, ortsf_loop
from topofabric.experiments.reports import output_dir, write_json, write_plot_json
from topofabric.models.control import LoopModel, OrtsfConfig, RationalTF
from topofabric.models.experiment import ExperimentConfig, SweepResult

logger = logging.getLogger(__name__)


def method_loop(method: str, delay: float, control: OrtsfConfig, design: tuple[float, float]):
    """Loop of one compensation ``method`` at ``delay``."""
    gain = design[0]
    if method == "direct":
        return LoopModel(plant=control.plant, compensator=RationalTF.gain(gain), delay=delay)
    if method == "smith":
        predictor = smith_predictor(
            RationalTF.gain(gain),
            control.plant,
            delay,
            gain_error=control.model_gain_error,
            delay_error=control.model_delay_error,
        )
        return LoopModel(plant=control.plant, compensator=predictor, delay=delay)
    return ortsf_loop(control, delay, design)


def run_delay_sweep(config: ExperimentConfig) -> SweepResult:
    """Phase margin for every (method, delay) cell; cells run concurrently, results keep order."""
    section, control = config.delay_sweep, config.control
    design = design_point(control)
    cells = [(m, d) for m in section.methods for d in section.delays]

    def margin(cell: tuple[str, float]) -> float | None:
        report = phase_margin(method_loop(cell[0], cell[1], control, design))
        return report.phase_margin if report.has_crossover else None

    with ThreadPoolExecutor(max_workers=section.workers) as pool:
        values = list(pool.map(margin, cells))

    margins: dict[str, list[float | None]] = {m: [] for m in section.methods}
    for (method, _), value in zip(cells, values, strict=True):
        margins[method].append(value)
    first_unsafe = {
        m: _first_unsafe(section.delays, margins[m], control.phi_safe) for m in section.methods
    }
    logger.info(f"delay sweep first unsafe delays: {first_unsafe}")
    return SweepResult(
        delays=list(section.delays),
        methods=list(section.methods),
        margins=margins,
        first_unsafe=first_unsafe,
        phi_safe=control.phi_safe,
        crossover_hz=design[1],
    )


def _first_unsafe(
    delays: list[float], margins: list[float | None], phi_safe: float
) -> float | None:
    for delay, margin in zip(delays, margins, strict=True):
        if margin is None or margin < phi_safe:
            return delay
    return None


def write_sweep(result: SweepResult, out: str) -> list[str]:
    directory = output_dir(out)
    data = result.to_csv(directory / "delay_sweep.csv")
    plot = write_plot_json(
        directory / "delay_sweep.plot.json",
        data,
        x="delay",
        series=result.methods,
        title="Phase margin against loop delay",
        x_label="delay (s)",
        y_label="phase margin (deg)",
    )
    summary = write_json(
        directory / "delay_sweep.summary.json",
        {
            "first_unsafe": result.first_unsafe,
            "phi_safe": result.phi_safe,
            "crossover_hz": result.crossover_hz,
        },
    )
    return [data, plot, summary]
