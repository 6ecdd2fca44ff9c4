import logging
from collections.abc import Callable

import numpy as np
import numpy.typing as npt
from scipy import linalg

from topofabric.cochain.penalty import exact_penalty_solve
from topofabric.cochain.projection import AffineProjector
from topofabric.connection.laplacian import assemble_connection_laplacian
from topofabric.exceptions import InfeasibleConstraintError, InputError
from topofabric.graph_core.operators import boundary_operator, edge_laplacian
from topofabric.models.connection import ConnectionGraph
from topofabric.models.constraints import AffineConstraint, EnergySpec
from topofabric.models.scene import LossWeights, SceneState, SolveInfo
from topofabric.rng import make_rng
from topofabric.topology.curvature import ricci_loss

logger = logging.getLogger(__name__)

RANK_TOL = 1e-10
STEP_TOL = 1e-11
DEFAULT_PENALTY = 10.0


class SemanticProblem:
    """
    Quadratic semantic loss over the stacked states s of a scene.

    total(s) = 0.5 w_d ||s - z||^2 + 0.5 w_cons x^T L1 x + w_conn Phi(s) + w_ctx ||C x - tau||^2
    with x = M s the induced cochain. Its Hessian is Q and its gradient Q s - b.
    """

    def __init__(self, scene: SceneState, weights: LossWeights):
        self.scene = scene
        self.weights = weights
        self.observed = scene.states.reshape(-1).copy()
        self.operator = scene.cochain_operator()
        self.edge_laplacian = edge_laplacian(boundary_operator(scene.graph))
        connection = ConnectionGraph(base=scene.graph, d=scene.d, transforms=scene.transforms)
        self.connection_laplacian = assemble_connection_laplacian(connection)

        c = scene.constraint
        self.composite = c.matrix @ self.operator if c.q else np.zeros((0, self.observed.size))
        self.target = c.target if c.q else np.zeros(0)

        size = self.observed.size
        M = self.operator
        self.hessian = (
            weights.data * np.eye(size)
            + weights.consensus * M.T @ self.edge_laplacian @ M
            + weights.connection * self.connection_laplacian
            + 2.0 * weights.context * self.composite.T @ self.composite
        )
        self.linear = weights.data * self.observed + 2.0 * weights.context * (
            self.composite.T @ self.target
        )

    def losses(self, s: npt.NDArray[np.float64]) -> dict[str, float]:
        w = self.weights
        x = self.operator @ s
        gap = s - self.observed
        residual = self.composite @ s - self.target
        terms = {
            "data": 0.5 * w.data * float(gap @ gap),
            "consensus": 0.5 * w.consensus * float(x @ self.edge_laplacian @ x),
            "connection": 0.5 * w.connection * float(s @ self.connection_laplacian @ s),
            "context": w.context * float(residual @ residual),
        }
        terms["total"] = sum(terms.values())
        return terms

    def total(self, s: npt.NDArray[np.float64]) -> float:
        return self.losses(s)["total"]

    def gradient(self, s: npt.NDArray[np.float64]) -> npt.NDArray[np.float64]:
        return self.hessian @ s - self.linear

    def reduced_constraint(self) -> AffineConstraint:
        """
        Equivalent full-row-rank form of C M s = tau, obtained by SVD.

        Rows of C that vanish on induced cochains (cycle sums, for example) drop out. An
        inconsistent system keeps its rows and is marked infeasible.
        """
        size = self.observed.size
        if self.composite.shape[0] == 0:
            return AffineConstraint.empty(size)
        u, sigma, vt = np.linalg.svd(self.composite, full_matrices=True)
        rank = int(np.sum(sigma > RANK_TOL * max(1.0, float(sigma[0]) if sigma.size else 1.0)))
        leftover = u[:, rank:].T @ self.target
        if np.linalg.norm(leftover) > 1e-9 * max(1.0, float(np.linalg.norm(self.target))):
            return AffineConstraint(matrix=self.composite, target=self.target)
        if rank == 0:
            return AffineConstraint.empty(size)
        return AffineConstraint(
            matrix=sigma[:rank, None] * vt[:rank], target=u[:, :rank].T @ self.target
        )

    def constrained_optimum(self) -> npt.NDArray[np.float64]:
        """
        Exact minimizer of the loss over {C M s = tau}, by null-space reduction.

        Raises:
            InfeasibleConstraintError: If the context constraint is inconsistent.
        """
        constraint = self.reduced_constraint()
        if not constraint.feasible:
            raise InfeasibleConstraintError("context constraint is inconsistent; no optimum")
        if constraint.q == 0:
            return np.linalg.solve(self.hessian, self.linear)
        particular = np.linalg.lstsq(constraint.matrix, constraint.target, rcond=None)[0]
        basis = linalg.null_space(constraint.matrix)
        if basis.shape[1] == 0:
            return particular
        reduced = basis.T @ self.hessian @ basis
        y = np.linalg.solve(reduced, basis.T @ (self.linear - self.hessian @ particular))
        return particular + basis @ y


def onn_solve(
    scene: SceneState,
    weights: LossWeights | None = None,
    eta: float | None = None,
    tol: float = 1e-9,
    k_max: int = 10_000,
    rho: float = DEFAULT_PENALTY,
    initial: npt.ArrayLike | None = None,
    schedule: Callable[[int], float] | None = None,
    gradient_noise: float = 0.0,
    rng: np.random.Generator | None = None,
    callback: Callable[[npt.NDArray[np.float64], int], None] | None = None,
) -> tuple[SceneState, list[float]]:
    """
    Projected-gradient semantic solve over the stacked states of a scene.

    Each step moves against the gradient of the total loss and projects back onto the context
    constraint. The run stops when the total loss changes by less than ``tol`` and the step is
    negligible; ``tol=0`` runs all ``k_max`` iterations. An inconsistent constraint switches to
    the exact-penalty solve.

    Args:
        initial: Stacked starting states; the observed states when unset. The data term always
            anchors to the observed states.
        schedule: Step size of iteration k (0-based); overrides ``eta``.
        gradient_noise: Standard deviation of Gaussian noise added to every gradient, which turns
            the run into a stochastic projected gradient.
        rng: Noise source; stream 0 of seed 0 when unset.
        callback: Called as ``callback(s, iteration)`` with every post-projection iterate.

    Returns:
        The solved scene (with ``solve_info``) and the loss history.

    Raises:
        InputError: If a step is outside (0, 2 / ||Q||_2) or ``gradient_noise`` is negative.
    """
    weights = weights or LossWeights()
    problem = SemanticProblem(scene, weights)
    lipschitz = float(np.linalg.norm(problem.hessian, 2))
    if lipschitz <= 0:
        raise InputError("semantic loss is identically zero; enable at least one loss weight")
    if gradient_noise < 0:
        raise InputError(f"gradient noise must be non-negative, got {gradient_noise:g}")
    if eta is None:
        eta = 1.0 / lipschitz
    fixed = eta

    def constant_step(k: int) -> float:
        return fixed

    steps = schedule or constant_step

    def step_size(k: int) -> float:
        value = float(steps(k))
        if not 0 < value < 2.0 / lipschitz:
            raise InputError(
                f"step {value:g} outside the admissible interval (0, {2.0 / lipschitz:g})"
            )
        return value

    step_size(0)
    constraint = problem.reduced_constraint()
    if initial is None:
        s = problem.observed.copy()
    else:
        s = np.asarray(initial, dtype=float).reshape(-1).copy()
        if s.shape != problem.observed.shape:
            raise InputError(
                f"initial states have {s.size} entries, expected {problem.observed.size}"
            )
    if not constraint.feasible:
        return _penalized_solve(scene, problem, constraint, rho, tol)

    project = AffineProjector(constraint)
    noise = rng or make_rng(0)
    ricci = ricci_loss(scene.graph)
    history: list[float] = []
    converged = False
    iterations = 0

    def gradient(s: npt.NDArray[np.float64]) -> npt.NDArray[np.float64]:
        g = problem.gradient(s)
        if gradient_noise:
            g = g + gradient_noise * noise.standard_normal(g.size)
        return g

    first = project(s - step_size(0) * problem.gradient(s))
    at_rest = constraint.residual(s) <= 1e-10 and np.linalg.norm(first - s) < STEP_TOL
    if tol > 0 and not gradient_noise and at_rest:
        converged = True
    else:
        previous = problem.total(s)
        for iterations in range(1, k_max + 1):
            s_next = project(s - step_size(iterations - 1) * gradient(s))
            step = float(np.linalg.norm(s_next - s))
            s = s_next
            if callback is not None:
                callback(s, iterations)
            current = problem.total(s)
            history.append(current)
            if abs(previous - current) < tol and step < STEP_TOL * max(1.0, np.linalg.norm(s)):
                converged = True
                break
            previous = current

    if not converged and tol > 0:
        logger.warning(f"onn_solve stopped after {k_max} iterations without converging")
    losses = problem.losses(s)
    losses["ricci"] = ricci
    info = SolveInfo(
        converged=converged,
        iterations=iterations,
        loss=losses["total"],
        losses=losses,
        constraint_residual=float(np.linalg.norm(problem.composite @ s - problem.target)),
        penalized=False,
        tol=tol,
    )
    logger.debug(f"onn_solve: {iterations} iterations, loss {info.loss:.6g}")
    return scene.with_states(s.reshape(scene.states.shape), info), history


def _penalized_solve(
    scene: SceneState,
    problem: SemanticProblem,
    constraint: AffineConstraint,
    rho: float,
    tol: float,
) -> tuple[SceneState, list[float]]:
    logger.info(f"Context constraint is inconsistent; exact-penalty fallback with rho={rho:g}")
    energy = EnergySpec.quadratic(problem.hessian, -problem.linear)
    s = exact_penalty_solve(energy, constraint, rho, x0=problem.observed)
    losses = problem.losses(s)
    losses["ricci"] = ricci_loss(scene.graph)
    residual = float(np.linalg.norm(problem.composite @ s - problem.target))
    info = SolveInfo(
        converged=True,
        iterations=0,
        loss=losses["total"],
        losses=losses,
        constraint_residual=residual,
        penalized=True,
        tol=tol,
    )
    logger.info(f"Penalized semantic solve left a constraint residual of {residual:.3e}")
    return scene.with_states(s.reshape(scene.states.shape), info), [losses["total"]]
