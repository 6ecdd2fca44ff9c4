import logging
import math

import numpy as np
import numpy.typing as npt
from scipy.optimize import minimize_scalar

from topofabric.exceptions import InputError
from topofabric.models.control import LoopModel, RationalTF, SmithPredictor
from topofabric.settings import get_settings

logger = logging.getLogger(__name__)

GRID_DECADES = (-4.0, 4.0)
POLE_NUDGE = 1e-9
IMAGINARY_AXIS_TOL = 1e-12


def frequency_grid(points_per_decade: int | None = None) -> npt.NDArray[np.float64]:
    """Log-spaced angular frequencies over [1e-4, 1e4] rad/s."""
    if points_per_decade is None:
        points_per_decade = getattr(get_settings(), "FABRIC_GRID_POINTS_PER_DECADE", 400)
    low, high = GRID_DECADES
    return np.logspace(low, high, int(round((high - low) * points_per_decade)) + 1)


def frequency_response(
    system: RationalTF | SmithPredictor | LoopModel, omega: float | npt.ArrayLike
):
    """
    Evaluate ``system`` at s = j omega.

    A denominator that vanishes exactly at a grid point is evaluated at omega (1 + 1e-9), or at
    1e-9 when omega is 0.
    """
    w = np.asarray(omega, dtype=float)
    if np.any(w < 0):
        raise InputError("frequencies must be non-negative")
    if isinstance(system, RationalTF):
        on_pole = _on_pole(system, w)
        if np.any(on_pole):
            w = np.where(on_pole, np.where(w == 0, POLE_NUDGE, w * (1 + POLE_NUDGE)), w)
    response = system(1j * w)
    return complex(response) if np.ndim(response) == 0 else response


def _on_pole(tf: RationalTF, omega: npt.NDArray[np.float64]) -> npt.NDArray[np.bool_]:
    return np.polynomial.polynomial.polyval(1j * omega, tf.den) == 0


def check_stable(tf: RationalTF) -> None:
    """
    Raises:
        InputError: If a pole lies on the imaginary axis or in the right half-plane.
    """
    poles = tf.poles()
    scale = max(1.0, float(np.max(np.abs(poles)))) if poles.size else 1.0
    if np.any(np.abs(poles.real) <= IMAGINARY_AXIS_TOL * scale):
        raise InputError(f"norm unbounded: pole on the imaginary axis ({poles.tolist()})")
    if np.any(poles.real > 0):
        raise InputError(f"norm unbounded: unstable poles {poles[poles.real > 0].tolist()}")


def hinf_norm(tf: RationalTF, points_per_decade: int | None = None) -> float:
    """
    sup over omega of |G(j omega)| for a stable ``tf``.

    Grid scan refined by a bounded scalar search around the grid maximum, compared against the
    DC and high-frequency limits.
    """
    check_stable(tf)
    if not tf.is_proper:
        raise InputError("norm unbounded: improper transfer function")
    grid = frequency_grid(points_per_decade)
    magnitude = np.abs(frequency_response(tf, grid))
    k = int(np.argmax(magnitude))
    candidates = [float(magnitude[k]), abs(tf.dc_gain()), tf.high_frequency_gain()]
    if 0 < k < grid.size - 1:
        refined = minimize_scalar(
            lambda u: -abs(tf(1j * math.exp(u))),
            bounds=(math.log(grid[k - 1]), math.log(grid[k + 1])),
            method="bounded",
            options={"xatol": 1e-12},
        )
        candidates.append(float(-refined.fun))
    return max(candidates)


def unwrapped_phase(response: npt.NDArray[np.complex128]) -> npt.NDArray[np.float64]:
    """Continuous phase (radians) along an increasing frequency grid, starting in (-3pi/2, pi/2]."""
    phase = np.unwrap(np.angle(response))
    if phase.size and phase[0] > math.pi / 2 + 1e-9:
        phase -= 2 * math.pi
    return phase


def first_downward_crossing(values: npt.NDArray[np.float64], level: float) -> int | None:
    """Index k of the first grid interval with values[k] > level >= values[k + 1]."""
    hits = np.nonzero((values[:-1] > level) & (values[1:] <= level))[0]
    return int(hits[0]) if hits.size else None


def phase_between(system, grid: npt.NDArray[np.float64], phase: npt.NDArray[np.float64], k: int):
    """Continuous phase of ``system`` (delay-free, radians) at any omega near grid point k."""
    anchor = system(1j * grid[k])

    def at(omega: float) -> float:
        return float(phase[k] + np.angle(system(1j * omega) / anchor))

    return at
