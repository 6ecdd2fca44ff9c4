import logging

import numpy as np
from scipy import optimize

from topofabric.exceptions import InfeasibleConstraintError, InputError, NumericalError
from topofabric.models.constraints import AffineConstraint, EnergySpec
from topofabric.models.graph import Cochain

logger = logging.getLogger(__name__)

EPS_LEX = 1e-8
FEASIBILITY_TOL = 1e-6


def lexicographic_solve(
    levels: list[EnergySpec],
    c: AffineConstraint,
    eps_lex: float = EPS_LEX,
    x0: Cochain | None = None,
) -> Cochain:
    """
    Solve a priority-ordered hierarchy of energies.

    Level ``i`` is minimized over the affine set intersected with the sublevel sets
    ``L_j(x) <= L_j* + eps_lex`` of every earlier level ``j``; each level warm-starts from the
    previous solution.

    Raises:
        InputError: If no levels are given.
        InfeasibleConstraintError: If the affine set is empty.
        NumericalError: If a level's solution violates its constraints beyond tolerance.
    """
    if not levels:
        raise InputError("lexicographic_solve needs at least one level")
    if not c.feasible:
        raise InfeasibleConstraintError("lexicographic hierarchy over an empty feasible set")

    m = c.m or None
    if m is None and x0 is not None:
        m = len(x0)
    if m is None and levels[0].hessian is not None:
        m = levels[0].hessian.shape[0]
    if m is None:
        raise InputError("the dimension is unknown: pass x0 when the constraint has no rows")
    x = np.zeros(m) if x0 is None else np.asarray(x0, dtype=float).copy()

    constraints: list[dict] = []
    if c.q:
        constraints.append(
            {"type": "eq", "fun": lambda z: c.matrix @ z - c.target, "jac": lambda z: c.matrix}
        )

    for i, level in enumerate(levels):
        result = optimize.minimize(
            level.value,
            x,
            jac=level.gradient,
            method="SLSQP",
            constraints=list(constraints),
            options={"ftol": 1e-15, "maxiter": 2000},
        )
        candidate = np.asarray(result.x)
        violation = _violation(candidate, constraints)
        if violation > FEASIBILITY_TOL:
            raise NumericalError(
                f"level {i} solution violates its constraints by {violation:.3e} ({result.message})"
            )
        x = candidate
        optimum = float(level.value(x))
        logger.debug(f"lexicographic level {i}: optimum {optimum:.6g}")
        constraints.append(_sublevel(level, optimum + eps_lex))

    return x


def _sublevel(level: EnergySpec, bound: float) -> dict:
    return {
        "type": "ineq",
        "fun": lambda z: np.atleast_1d(bound - level.value(z)),
        "jac": lambda z: -np.atleast_2d(level.gradient(z)),
    }


def _violation(x: Cochain, constraints: list[dict]) -> float:
    worst = 0.0
    for item in constraints:
        values = np.atleast_1d(item["fun"](x))
        if item["type"] == "eq":
            worst = max(worst, float(np.max(np.abs(values), initial=0.0)))
        else:
            worst = max(worst, float(-np.min(values, initial=0.0)))
    return worst
