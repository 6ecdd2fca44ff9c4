import logging

import numpy as np
import numpy.typing as npt
from scipy import optimize

from topofabric.cochain.iteration import km_iterate
from topofabric.exceptions import ConvergenceError, InfeasibleConstraintError, InputError
from topofabric.models.constraints import AffineConstraint, EnergySpec
from topofabric.models.graph import Cochain

logger = logging.getLogger(__name__)

SAFETY_FACTOR = 2.0


def _constrained_minimizer(e: EnergySpec, c: AffineConstraint, x0: Cochain) -> Cochain:
    if e.mu > 0:
        x, _ = km_iterate(e, np.zeros((c.m, c.m)), c, x0=x0)
        return x
    result = optimize.minimize(
        e.value,
        x0,
        jac=e.gradient,
        method="SLSQP",
        constraints=[
            {"type": "eq", "fun": lambda x: c.matrix @ x - c.target, "jac": lambda x: c.matrix}
        ],
        options={"ftol": 1e-14, "maxiter": 1000},
    )
    return np.asarray(result.x)


def constraint_multipliers(
    e: EnergySpec, c: AffineConstraint, x: Cochain
) -> npt.NDArray[np.float64]:
    """Least-squares multipliers lambda = -(C C^T)^{-1} C grad L(x) of the stationarity system."""
    if c.q == 0:
        return np.zeros(0)
    gradient = np.asarray(e.gradient(x), dtype=float)
    return -np.linalg.solve(c.matrix @ c.matrix.T, c.matrix @ gradient)


def estimate_penalty_threshold(
    e: EnergySpec, c: AffineConstraint
) -> tuple[float, npt.NDArray[np.float64], Cochain]:
    """
    Estimate the exact-penalty threshold rho* as twice the multiplier norm.

    Returns:
        ``(rho_star, multipliers, constrained_minimizer)``

    Raises:
        InfeasibleConstraintError: If the constraint has no solution.
    """
    if not c.feasible:
        raise InfeasibleConstraintError("no constrained minimizer exists for an inconsistent set")
    x_c = _constrained_minimizer(e, c, np.zeros(c.m))
    multipliers = constraint_multipliers(e, c, x_c)
    return SAFETY_FACTOR * float(np.linalg.norm(multipliers)), multipliers, x_c


def _penalized(e: EnergySpec, c: AffineConstraint, rho: float):
    def value(x):
        return float(e.value(x) + rho * np.linalg.norm(c.matrix @ x - c.target))

    def gradient(x):
        r = c.matrix @ x - c.target
        norm = np.linalg.norm(r)
        g = np.asarray(e.gradient(x), dtype=float)
        if norm > 0:
            g = g + rho * (c.matrix.T @ r) / norm
        return g

    return value, gradient


def _subgradient_descent(
    e: EnergySpec, c: AffineConstraint, rho: float, x0: Cochain, iterations: int
) -> Cochain:
    value, gradient = _penalized(e, c, rho)
    x = x0.copy()
    best, best_value = x.copy(), value(x)
    step0 = 1.0 / (e.L + rho * max(1.0, float(np.linalg.norm(c.matrix, 2))))
    for k in range(iterations):
        x = x - step0 / np.sqrt(k + 1) * gradient(x)
        current = value(x)
        if current < best_value:
            best, best_value = x.copy(), current
    return best


def exact_penalty_solve(
    e: EnergySpec,
    c: AffineConstraint,
    rho: float,
    x0: Cochain | None = None,
    subgradient_iterations: int = 500,
    tol: float = 1e-8,
) -> Cochain:
    """
    Minimize L(x) + rho ||C x - tau||_2.

    A diminishing-step subgradient run provides the starting point. When the constraint is
    consistent and rho dominates the multiplier norm, the constrained minimizer is returned
    exactly; otherwise the objective is smooth at its minimizer and BFGS polishes it.

    Raises:
        InputError: If ``rho`` is not positive.
        ConvergenceError: If the smooth branch does not reach stationarity.
    """
    if rho <= 0:
        raise InputError(f"penalty parameter must be positive, got {rho}")
    x_start = np.zeros(c.m) if x0 is None else np.asarray(x0, dtype=float)
    if c.q == 0:
        return _constrained_minimizer(e, c, x_start) if e.mu > 0 else x_start

    x_start = _subgradient_descent(e, c, rho, x_start, subgradient_iterations)

    if c.feasible:
        x_c = _constrained_minimizer(e, c, x_start)
        multiplier_norm = float(np.linalg.norm(constraint_multipliers(e, c, x_c)))
        if multiplier_norm <= rho:
            logger.debug(f"exact penalty: rho={rho:g} >= |lambda|={multiplier_norm:g}")
            return x_c
        logger.info(
            f"Penalty rho={rho:g} below multiplier norm {multiplier_norm:g}; result is infeasible"
        )

    value, gradient = _penalized(e, c, rho)
    result = optimize.minimize(
        value, x_start, jac=gradient, method="BFGS", options={"gtol": tol, "maxiter": 5000}
    )
    x = np.asarray(result.x)
    stationarity = float(np.linalg.norm(gradient(x)))
    if stationarity > 1e3 * tol * max(1.0, float(np.linalg.norm(e.gradient(x)))):
        raise ConvergenceError("exact-penalty solve did not reach stationarity", stationarity)
    return x
