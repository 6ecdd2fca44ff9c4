import logging
import math

import numpy as np
import numpy.typing as npt
from scipy.signal import lfilter

from topofabric.control.compensators import (
    delay_samples,
    discretize,
    padd,
    shift,
    smith_discrete,
)
from topofabric.control.margins import phase_margin
from topofabric.exceptions import InputError
from topofabric.models.control import Compensator, LoopModel, RationalTF, SimResult
from topofabric.settings import get_settings

logger = logging.getLogger(__name__)

DEFAULT_HORIZON = 60.0
BOUNDED_GROWTH = 1.05
SAMPLES_PER_CROSSOVER = 20


def _sampling_period(sampling_period: float | None) -> float:
    if sampling_period is None:
        sampling_period = getattr(get_settings(), "FABRIC_SAMPLING_PERIOD", 1e-3)
    if sampling_period <= 0:
        raise InputError(f"sampling period must be positive, got {sampling_period}")
    return sampling_period


def compensator_filter(
    compensator: Compensator, sampling_period: float
) -> tuple[np.ndarray, np.ndarray]:
    """Discrete error-to-command filter ``(b, a)`` of a compensator."""
    if isinstance(compensator, RationalTF):
        return discretize(compensator, sampling_period)
    return smith_discrete(compensator, sampling_period)


def discrete_response(
    tf: RationalTF, signal: npt.ArrayLike, sampling_period: float | None = None
) -> npt.NDArray[np.float64]:
    """Open-loop response of the bilinear discretization of ``tf`` to a sampled signal."""
    b, a = discretize(tf, _sampling_period(sampling_period))
    return lfilter(b, a, np.asarray(signal, dtype=float))


def step_response(
    tf: RationalTF, horizon: float, sampling_period: float | None = None
) -> tuple[npt.NDArray[np.float64], npt.NDArray[np.float64]]:
    T_s = _sampling_period(sampling_period)
    samples = int(round(horizon / T_s)) + 1
    return np.arange(samples) * T_s, discrete_response(tf, np.ones(samples), T_s)


def growth_ratio(output: npt.NDArray[np.float64]) -> float:
    """max |y| over the last quarter divided by max |y| over the first quarter."""
    quarter = max(output.size // 4, 1)
    first = float(np.max(np.abs(output[:quarter])))
    last = float(np.max(np.abs(output[-quarter:])))
    if not (math.isfinite(first) and math.isfinite(last)):
        return math.inf
    if first == 0:
        return 0.0 if last == 0 else math.inf
    return last / first


def simulate_closed_loop(
    loop: LoopModel,
    reference: float | npt.ArrayLike = 1.0,
    sampling_period: float | None = None,
    horizon: float = DEFAULT_HORIZON,
) -> SimResult:
    """
    Unit-feedback simulation of ``loop`` with plant and compensator discretized bilinearly and the
    delay realized as a FIFO of whole samples.

    A scalar ``reference`` is a step of that amplitude over ``horizon`` seconds; an array is used
    as the sampled reference directly.
    """
    T_s = _sampling_period(sampling_period)
    if np.ndim(reference) == 0:
        r = np.full(int(round(horizon / T_s)) + 1, float(reference))
    else:
        r = np.asarray(reference, dtype=float).reshape(-1)
    if r.size < 4:
        raise InputError("simulation needs at least 4 samples")

    report = phase_margin(loop)
    if report.has_crossover and T_s > 1.0 / (SAMPLES_PER_CROSSOVER * report.crossover_hz):
        logger.warning(
            f"sampling period {T_s} s is coarse for crossover {report.crossover_hz:.4g} Hz; "
            "the discretized loop may be unstable"
        )

    D = delay_samples(loop.delay, T_s)
    bc, ac = compensator_filter(loop.compensator, T_s)
    bg, ag = discretize(loop.plant, T_s)
    # u = C (r - z^-D G u)
    with np.errstate(over="ignore", invalid="ignore"):
        denominator = padd(np.convolve(ac, ag), shift(np.convolve(bc, bg), D))
        control = lfilter(np.convolve(bc, ag), denominator, r)
        output = lfilter(shift(bg, D), ag, control)

    ratio = growth_ratio(output)
    bounded = ratio < BOUNDED_GROWTH
    logger.debug(f"closed loop with {D}-sample delay: growth ratio {ratio:.4g}, bounded={bounded}")
    return SimResult(
        time=np.arange(r.size) * T_s,
        reference=r,
        output=output,
        control=control,
        growth_ratio=ratio,
        bounded=bounded,
        delay_samples=D,
    )
