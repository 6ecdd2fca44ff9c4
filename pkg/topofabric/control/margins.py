import logging
import math

import numpy as np
import numpy.typing as npt
from scipy.optimize import brentq

from topofabric.control.transfer import (
    first_downward_crossing,
    frequency_grid,
    phase_between,
    unwrapped_phase,
)
from topofabric.exceptions import InputError
from topofabric.models.control import LoopModel, MarginReport

logger = logging.getLogger(__name__)

BRENT_RTOL = 1e-10
DEFAULT_PHI_SAFE = 20.0
DEFAULT_SIGMA_BUFFER = 10.0


def phase_margin(loop: LoopModel, points_per_decade: int | None = None) -> MarginReport:
    """
    Margins of ``loop`` at its lowest gain crossover in [1e-4, 1e4] rad/s.

    The crossover is bracketed on a log grid and refined by Brent's method. The delay enters the
    phase analytically as -omega_c * delay, so it never moves the crossover.
    """
    grid = frequency_grid(points_per_decade)
    free = loop.delay_free(1j * grid)
    log_magnitude = np.log(np.abs(free))
    changes = np.nonzero(np.sign(log_magnitude[:-1]) != np.sign(log_magnitude[1:]))[0]
    if changes.size == 0:
        logger.debug("loop has no gain crossover on the frequency grid")
        return MarginReport(has_crossover=False)

    k = int(changes[0])
    u_c = brentq(
        lambda u: math.log(abs(loop.delay_free(1j * math.exp(u)))),
        math.log(grid[k]),
        math.log(grid[k + 1]),
        rtol=BRENT_RTOL,
    )
    omega_c = math.exp(u_c)
    phase = unwrapped_phase(free)
    free_phase = phase_between(loop.delay_free, grid, phase, k)(omega_c)
    margin = 180.0 + math.degrees(free_phase - omega_c * loop.delay)

    report = MarginReport(
        has_crossover=True,
        crossover_rad=omega_c,
        crossover_hz=omega_c / (2 * math.pi),
        phase_margin=margin,
        gain_margin=_gain_margin(loop, grid, free, phase),
        delay_margin=max(math.radians(margin), 0.0) / omega_c,
    )
    logger.debug(
        f"crossover {report.crossover_hz:.6g} Hz, phase margin {margin:.4f} deg, "
        f"gain margin {report.gain_margin:.6g}"
    )
    return report


def _gain_margin(
    loop: LoopModel,
    grid: npt.NDArray[np.float64],
    free: npt.NDArray[np.complex128],
    phase: npt.NDArray[np.float64],
) -> float:
    full = phase - grid * loop.delay
    k = first_downward_crossing(full, -math.pi)
    if k is None:
        return math.inf
    free_phase = phase_between(loop.delay_free, grid, phase, k)
    u = brentq(
        lambda u: free_phase(math.exp(u)) - math.exp(u) * loop.delay + math.pi,
        math.log(grid[k]),
        math.log(grid[k + 1]),
        rtol=BRENT_RTOL,
    )
    return 1.0 / abs(loop.delay_free(1j * math.exp(u)))


def delay_margin_bound(gamma: float, K_c: float, g_norm: float) -> float:
    """
    Small-gain delay bound ln(gamma) / (K_c ||G||_inf), in seconds.

    Raises:
        InputError: If gamma <= 1 or a gain is not positive.
    """
    if gamma <= 1:
        raise InputError(f"gain margin must exceed 1, got {gamma}")
    if K_c <= 0 or g_norm <= 0:
        raise InputError(f"gains must be positive, got K_c={K_c}, g_norm={g_norm}")
    return math.log(gamma) / (K_c * g_norm)


def effective_phase_margin(
    phi_design: float,
    f_c: float,
    delay: float,
    phi_comp: float = 0.0,
    drift: float = 0.0,
    uncertainty: float = 0.0,
) -> float:
    """phi_design - 360 (f_c + drift) delay + phi_comp - uncertainty, in degrees."""
    if delay < 0 or uncertainty < 0:
        raise InputError("delay and uncertainty must be non-negative")
    return phi_design - 360.0 * (f_c + drift) * delay + phi_comp - uncertainty


def margin_is_safe(
    margin: float, phi_safe: float = DEFAULT_PHI_SAFE, sigma_buffer: float = DEFAULT_SIGMA_BUFFER
) -> bool:
    return margin >= phi_safe + sigma_buffer


def direct_margin_line(phi_0: float, f_c: float, delay: float | npt.ArrayLike):
    """Closed-form margin of an uncompensated loop: phi_0 - 360 f_c delay."""
    if np.ndim(delay):
        return phi_0 - 360.0 * f_c * np.asarray(delay, dtype=float)
    return phi_0 - 360.0 * f_c * float(delay)
