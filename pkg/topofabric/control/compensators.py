import logging
import math

import numpy as np
import numpy.typing as npt
from scipy.optimize import brentq
from scipy.signal import bilinear

from topofabric.control.transfer import (
    first_downward_crossing,
    frequency_grid,
    phase_between,
    unwrapped_phase,
)
from topofabric.exceptions import InputError
from topofabric.models.control import RationalTF, SmithPredictor

logger = logging.getLogger(__name__)

DEFAULT_MAX_COMPENSATION = 60.0

__all__ = [
    "SmithPredictor",
    "design_gain",
    "design_lead_lag",
    "discretize",
    "lead_compensation",
    "smith_discrete",
    "smith_predictor",
]


def design_lead_lag(f_c: float, phi_comp: float, K_c: float = 1.0) -> RationalTF:
    """
    Lead compensator K_c (1 + T s) / (1 + alpha T s) with its phase peak phi_comp at f_c.

    alpha = (1 - sin phi) / (1 + sin phi) and T = 1 / (2 pi f_c sqrt(alpha)). A zero lead
    degenerates to the pure gain K_c.
    """
    if f_c <= 0 or K_c <= 0:
        raise InputError(f"crossover and gain must be positive, got f_c={f_c}, K_c={K_c}")
    if not 0 <= phi_comp < 90:
        raise InputError(f"phase lead must lie in [0, 90) degrees, got {phi_comp}")
    if phi_comp == 0:
        return RationalTF.gain(K_c)
    sine = math.sin(math.radians(phi_comp))
    alpha = (1 - sine) / (1 + sine)
    T = 1.0 / (2 * math.pi * f_c * math.sqrt(alpha))
    return RationalTF(num=[K_c, K_c * T], den=[1.0, alpha * T])


def lead_compensation(
    f_c: float, delay: float, max_compensation: float = DEFAULT_MAX_COMPENSATION
) -> float:
    """Lead (degrees) that cancels the delay phase 360 f_c delay at crossover, capped."""
    return min(360.0 * f_c * delay, max_compensation)


def design_gain(
    plant: RationalTF, margin: float, delay: float = 0.0, points_per_decade: int | None = None
) -> float:
    """
    Proportional gain K giving ``plant`` (with ``delay``) a phase margin of ``margin`` degrees.

    Raises:
        InputError: If the plant phase never reaches -180 + margin on the frequency grid.
    """
    grid = frequency_grid(points_per_decade)
    phase = unwrapped_phase(plant(1j * grid))
    target = math.radians(margin - 180.0)
    k = first_downward_crossing(phase - grid * delay, target)
    if k is None:
        raise InputError(f"plant phase never reaches {margin - 180.0:.3f} deg; no gain fits")
    free_phase = phase_between(plant, grid, phase, k)
    u = brentq(
        lambda u: free_phase(math.exp(u)) - math.exp(u) * delay - target,
        math.log(grid[k]),
        math.log(grid[k + 1]),
        rtol=1e-12,
    )
    return 1.0 / abs(plant(1j * math.exp(u)))


def smith_predictor(
    controller: RationalTF,
    plant: RationalTF,
    delay: float,
    gain_error: float = 0.0,
    delay_error: float = 0.0,
) -> SmithPredictor:
    """Smith predictor whose internal model is ``plant`` and ``delay`` scaled by relative errors."""
    return SmithPredictor(
        controller=controller,
        model=plant.scaled(1.0 + gain_error),
        model_delay=delay * (1.0 + delay_error),
    )


def discretize(tf: RationalTF, sampling_period: float) -> tuple[np.ndarray, np.ndarray]:
    """Bilinear (trapezoidal) discretization; ``(b, a)`` in ascending powers of z^-1."""
    if not tf.is_proper:
        raise InputError("cannot discretize an improper transfer function")
    num, den = tf.descending()
    return bilinear(num, den, fs=1.0 / sampling_period)


def delay_samples(delay: float, sampling_period: float) -> int:
    samples = int(round(delay / sampling_period))
    if not math.isclose(samples * sampling_period, delay, rel_tol=1e-9, abs_tol=1e-12):
        logger.warning(
            f"delay {delay} s is not a multiple of the {sampling_period} s period; "
            f"rounded to {samples} samples"
        )
    return samples


def shift(p: npt.NDArray[np.float64], samples: int) -> npt.NDArray[np.float64]:
    """Multiply a polynomial in z^-1 by z^-samples."""
    return np.concatenate([np.zeros(samples), p])


def padd(*polys: npt.NDArray[np.float64]) -> npt.NDArray[np.float64]:
    size = max(p.size for p in polys)
    return sum(np.pad(p, (0, size - p.size)) for p in polys)


def smith_discrete(sp: SmithPredictor, sampling_period: float) -> tuple[np.ndarray, np.ndarray]:
    """
    Discrete error-to-command filter of a Smith predictor.

    u = C e / (1 + C G_model (1 - z^-D)) with both blocks bilinear-discretized and the model
    delay realized as D samples.
    """
    bc, ac = discretize(sp.controller, sampling_period)
    bm, am = discretize(sp.model, sampling_period)
    D = delay_samples(sp.model_delay, sampling_period)
    loop = np.convolve(bc, bm)
    den = padd(np.convolve(ac, am), loop, -shift(loop, D))
    return np.convolve(bc, am), den
