import numpy as np

from topofabric.exceptions import InputError
from topofabric.models.scene import ReasoningTrace, SceneState
from topofabric.topology.filtration import filtration_values
from topofabric.topology.persistence import diagrams


def edge_interactions(scene: SceneState) -> np.ndarray:
    """Per-edge residual S_i - T_ij S_j followed by the edge weight."""
    index = scene.graph.vertex_index()
    rows = []
    for edge, transform in zip(scene.graph.edges, scene.transforms or [], strict=True):
        residual = scene.states[index[edge.u]] - transform @ scene.states[index[edge.v]]
        rows.append(np.concatenate([residual, [edge.w]]))
    if not rows:
        return np.zeros((0, scene.d + 1))
    return np.vstack(rows)


def build_reasoning_trace(
    scene: SceneState, alpha: float = 1.0, beta: float = 0.0
) -> ReasoningTrace:
    """
    Package a solved scene for the control layer.

    Raises:
        InputError: If the scene was never solved or its solve did not converge.
    """
    info = scene.solve_info
    if info is None or not info.converged:
        raise InputError(f"scene at t={scene.timestamp} is not converged; solve it first")
    f = filtration_values(scene.graph, scene.states, alpha, beta)
    return ReasoningTrace(
        timestamp=scene.timestamp,
        edges=[e.key for e in scene.graph.edges],
        states=scene.states.copy(),
        interactions=edge_interactions(scene),
        constraint_matrix=scene.constraint.matrix.copy(),
        constraint_target=scene.constraint.target.copy(),
        diagrams=diagrams(scene.graph, f),
        loss=info.loss,
        converged=info.converged,
    )
