import logging

import numpy as np
import numpy.typing as npt

from topofabric.cochain.projection import AffineProjector
from topofabric.exceptions import InputError
from topofabric.models.constraints import AffineConstraint, EnergySpec, IterationReport
from topofabric.models.graph import Cochain

logger = logging.getLogger(__name__)

DEFAULT_TOL = 1e-9
DEFAULT_K_MAX = 10_000


def consensus_energy(e: EnergySpec, L1: npt.NDArray[np.float64], x: Cochain) -> float:
    """E(x) = L(x) + 0.5 <x, L1 x>."""
    x = np.asarray(x, dtype=float)
    if L1.shape != (x.size, x.size):
        raise InputError(f"L1 has shape {L1.shape} but the cochain has {x.size} entries")
    return float(e.value(x) + 0.5 * x @ L1 @ x)


def _operator_norm(L1: npt.NDArray[np.float64]) -> float:
    return float(np.linalg.norm(L1, 2)) if L1.size else 0.0


def admissible_step_interval(e: EnergySpec, L1: npt.NDArray[np.float64]) -> tuple[float, float]:
    """Open interval (0, 2 / (L + ||L1||_2)) of step sizes that keep the operator averaged."""
    return 0.0, 2.0 / (e.L + _operator_norm(L1))


def theoretical_rate(e: EnergySpec, L1: npt.NDArray[np.float64]) -> float:
    """Contraction factor sqrt(1 - 2 mu / (L + ||L1||_2))."""
    return float(np.sqrt(max(0.0, 1.0 - 2.0 * e.mu / (e.L + _operator_norm(L1)))))


def _contraction(steps: npt.NDArray[np.float64], floor: float) -> float:
    usable = steps[steps > floor]
    if usable.size < 2:
        return 0.0
    return float(np.exp(np.mean(np.diff(np.log(usable)))))


def km_iterate(
    e: EnergySpec,
    L1: npt.NDArray[np.float64],
    c: AffineConstraint,
    eta: float | None = None,
    x0: Cochain | None = None,
    k_max: int = DEFAULT_K_MAX,
    tol: float = DEFAULT_TOL,
) -> tuple[Cochain, IterationReport]:
    """
    Projection-consensus fixed-point iteration.

    Iterates ``x <- P_C(x - eta (grad L(x) + L1 x))`` until the step norm falls below ``tol``.

    Args:
        e: Strongly convex energy.
        L1: Edge Laplacian (or any PSD coupling) of matching size.
        c: Feasible affine constraint; may have zero rows.
        eta: Step size; defaults to 1 / (L + ||L1||_2).
        x0: Starting cochain; defaults to zero.
        k_max: Iteration budget.
        tol: Step-norm threshold for convergence.

    Returns:
        The final iterate and an ``IterationReport`` whose distances are measured to it.

    Raises:
        InputError: If ``eta`` lies outside the admissible interval or ``e`` is not strongly convex.
        InfeasibleConstraintError: If ``c`` is inconsistent.
    """
    if e.mu <= 0:
        raise InputError("km_iterate needs a strongly convex energy (mu > 0)")
    m = L1.shape[0]
    if c.q and c.m != m:
        raise InputError(f"constraint acts on {c.m} entries but L1 is {m} x {m}")

    lower, upper = admissible_step_interval(e, L1)
    if eta is None:
        eta = 1.0 / (e.L + _operator_norm(L1))
    if not lower < eta < upper:
        raise InputError(f"step {eta:g} outside the admissible interval ({lower:g}, {upper:g})")

    project = AffineProjector(c)
    x = np.zeros(m) if x0 is None else np.asarray(x0, dtype=float).copy()
    history: list[npt.NDArray[np.float64]] = []
    residuals: list[float] = []
    steps: list[float] = []
    converged = False

    for _ in range(k_max):
        x_next = project(x - eta * (e.gradient(x) + L1 @ x))
        step = float(np.linalg.norm(x_next - x))
        x = x_next
        history.append(x)
        residuals.append(c.residual(x))
        steps.append(step)
        if step < tol:
            converged = True
            break

    if steps:
        logger.debug(f"km_iterate: first step {steps[0]:.3e}, last step {steps[-1]:.3e}")
    if not converged:
        logger.warning(f"km_iterate did not converge in {k_max} iterations")

    report = IterationReport(
        iterates=[float(np.linalg.norm(h - x)) for h in history],
        constraint_residuals=residuals,
        step_norms=steps,
        contraction_estimate=_contraction(np.asarray(steps), floor=100 * tol),
        theoretical_rate=theoretical_rate(e, L1),
        converged=converged,
    )
    return x, report
