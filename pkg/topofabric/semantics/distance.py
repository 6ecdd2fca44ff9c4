import math

import numpy as np

from topofabric.exceptions import InputError
from topofabric.models.scene import SceneState
from topofabric.topology.filtration import filtration_values
from topofabric.topology.persistence import diagrams
from topofabric.topology.stability import DEFAULT_DIMENSION_WEIGHTS, ph_distance


def contextual_distance(
    a: SceneState,
    b: SceneState,
    weights: tuple[float, float] = DEFAULT_DIMENSION_WEIGHTS,
    alpha: float = 1.0,
    beta: float = 0.0,
) -> float:
    """
    d_PH over H0 and H1 plus ||C_a - C_b||_F plus ||tau_a - tau_b||.

    Raises:
        InputError: If the constraint shapes differ.
    """
    ca, cb = a.constraint, b.constraint
    if ca.matrix.shape != cb.matrix.shape:
        raise InputError(
            f"constraint shapes differ: {ca.matrix.shape} vs {cb.matrix.shape}"
        )
    topology = ph_distance(
        diagrams(a.graph, filtration_values(a.graph, a.states, alpha, beta)),
        diagrams(b.graph, filtration_values(b.graph, b.states, alpha, beta)),
        weights,
    )
    matrix_gap = float(np.linalg.norm(ca.matrix - cb.matrix)) if ca.q else 0.0
    target_gap = float(np.linalg.norm(ca.target - cb.target)) if ca.q else 0.0
    return topology + matrix_gap + target_gap


def context_drift_bound(residual_prev: float, L_context: float, delta: float) -> float:
    """Allowed constraint residual after a context change of size ``delta``."""
    return residual_prev + L_context * delta


def contextual_stability_bound(
    L_context: float,
    delta: float,
    total_loss: float,
    eps_conf: float,
    L_c: float = 1.0,
    sigma: float = 0.0,
) -> float:
    """L_context delta + sqrt(L_total) + sqrt(2 L_c^2 sigma^2 ln(2 / eps_conf))."""
    if not 0 < eps_conf < 1:
        raise InputError(f"confidence level must lie in (0, 1), got {eps_conf}")
    noise = math.sqrt(2.0 * L_c**2 * sigma**2 * math.log(2.0 / eps_conf))
    return L_context * delta + math.sqrt(max(total_loss, 0.0)) + noise
