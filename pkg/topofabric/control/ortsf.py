import logging

import numpy as np
import numpy.typing as npt
from scipy.signal import lfilter

from topofabric.control.compensators import (
    design_gain,
    design_lead_lag,
    lead_compensation,
    smith_predictor,
)
from topofabric.control.margins import phase_margin
from topofabric.control.prediction import predict_trace, predictor_lipschitz
from topofabric.control.simulation import compensator_filter
from topofabric.exceptions import InputError
from topofabric.models.control import (
    Compensator,
    LoopModel,
    OrtsfCommand,
    OrtsfConfig,
    RationalTF,
)
from topofabric.models.scene import ReasoningTrace
from topofabric.settings import get_settings

logger = logging.getLogger(__name__)


def design_point(config: OrtsfConfig) -> tuple[float, float]:
    """Loop gain K and the crossover frequency (Hz) of the delay-free design loop."""
    gain = config.design_gain or design_gain(config.plant, config.design_margin)
    if config.crossover_hz is not None:
        return gain, config.crossover_hz
    report = phase_margin(LoopModel(plant=config.plant, compensator=RationalTF.gain(gain)))
    if not report.has_crossover:
        raise InputError("design loop has no gain crossover; set crossover_hz explicitly")
    return gain, report.crossover_hz


def select_compensator(
    config: OrtsfConfig, gain: float, f_c: float, delay: float | None = None
) -> tuple[str, Compensator, float]:
    """Lead-lag for delays up to the threshold, Smith predictor above it."""
    delay = config.delay if delay is None else delay
    if delay <= config.delay_threshold:
        phi = lead_compensation(f_c, delay, config.max_compensation)
        logger.info(f"delay {delay} s <= {config.delay_threshold} s: lead-lag with {phi:.3f} deg")
        return "lead-lag", design_lead_lag(f_c, phi, gain), phi
    logger.info(f"delay {delay} s > {config.delay_threshold} s: Smith predictor")
    predictor = smith_predictor(
        RationalTF.gain(gain),
        config.plant,
        delay,
        gain_error=config.model_gain_error,
        delay_error=config.model_delay_error,
    )
    return "smith", predictor, 0.0


def ortsf_loop(
    config: OrtsfConfig,
    delay: float | None = None,
    design: tuple[float, float] | None = None,
) -> LoopModel:
    """
    The compensated loop the transform drives, at ``delay`` (default: the configured one).

    ``design`` is a precomputed ``(gain, crossover_hz)`` pair from ``design_point``.
    """
    delay = config.delay if delay is None else delay
    gain, f_c = design or design_point(config)
    _, compensator, _ = select_compensator(config, gain, f_c, delay)
    return LoopModel(plant=config.plant, compensator=compensator, delay=delay)


def output_weights(config: OrtsfConfig, edges: int) -> npt.NDArray[np.float64]:
    if config.output_weights is None:
        return np.full((1, edges), 1.0 / edges) if edges else np.zeros((1, 0))
    weights = np.asarray(config.output_weights, dtype=float)
    if weights.ndim != 2 or weights.shape[1] != edges:
        raise InputError(
            f"output weights have shape {weights.shape}, expected (channels, {edges})"
        )
    return weights


def trace_reference(trace: ReasoningTrace, weights: npt.NDArray[np.float64]) -> np.ndarray:
    """Weighted sum of the per-edge interaction residual norms, one value per channel."""
    residuals = np.linalg.norm(trace.interactions[:, :-1], axis=1)
    return weights @ residuals


def ortsf_transform(history: list[ReasoningTrace], config: OrtsfConfig) -> OrtsfCommand:
    """
    Turn a time-ordered trace history into control commands.

    Every trace is predicted ``config.delay`` ahead from its predecessor, mapped to a reference,
    held over the sampling grid until the next trace, and filtered through the compensator.
    The returned Lipschitz bound covers perturbations of every interaction residual by u.
    """
    if not history:
        raise InputError("trace history is empty")
    times = np.array([trace.timestamp for trace in history])
    if np.any(np.diff(times) <= 0):
        raise InputError("trace history must be strictly increasing in time")
    T_s = config.sampling_period or getattr(get_settings(), "FABRIC_SAMPLING_PERIOD", 1e-3)

    gain, f_c = design_point(config)
    branch, compensator, phi = select_compensator(config, gain, f_c)
    b, a = compensator_filter(compensator, T_s)

    spacings = np.diff(times)
    holds = [max(1, int(round(h / T_s))) for h in spacings]
    holds.append(holds[-1] if holds else 1)

    references, any_held, any_extrapolated = [], False, False
    for k, trace in enumerate(history):
        previous = history[k - 1] if k else None
        predicted, held = predict_trace(trace, previous, config.delay)
        any_held |= held
        any_extrapolated |= not held
        references.append(trace_reference(predicted, output_weights(config, len(trace.edges))))
    sampled = np.repeat(np.vstack(references), holds, axis=0)
    commands = lfilter(b, a, sampled, axis=0)

    impulse = np.zeros(sampled.shape[0])
    impulse[0] = 1.0
    filter_gain = float(np.sum(np.abs(lfilter(b, a, impulse))))
    L_pred = (
        predictor_lipschitz(config.delay, float(spacings.min()), joint=True)
        if any_extrapolated
        else 1.0
    )
    L_ref = max(
        float(np.max(np.sum(np.abs(output_weights(config, len(t.edges))), axis=1), initial=0.0))
        for t in history
    )
    return OrtsfCommand(
        command=commands[-1].copy(),
        commands=commands,
        references=sampled,
        branch=branch,
        compensation=phi,
        crossover_hz=f_c,
        lipschitz_bound=L_ref * L_pred * filter_gain,
        held=any_held,
    )
