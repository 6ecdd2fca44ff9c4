import numpy as np
import numpy.typing as npt

from topofabric.exceptions import InputError
from topofabric.models.graph import WeightedGraph
from topofabric.models.topology import Filtration
from topofabric.topology.curvature import forman_ricci


def filtration_values(
    g: WeightedGraph,
    states: npt.ArrayLike,
    alpha: float = 1.0,
    beta: float = 0.0,
) -> Filtration:
    """
    Semantic-geometric filtration f(e_ij) = alpha ||S_i - S_j|| + beta |Ric_F(e_ij)|.

    ``states`` is an (n, d) array (or length-n vector) ordered like the sorted vertices.
    """
    if alpha < 0 or beta < 0:
        raise InputError(f"filtration weights must be non-negative (alpha={alpha}, beta={beta})")
    states = np.asarray(states, dtype=float)
    if states.ndim == 1:
        states = states[:, None]
    if states.shape[0] != g.n:
        raise InputError(f"{states.shape[0]} states given for {g.n} vertices")

    index = g.vertex_index()
    values = np.zeros(g.m)
    if alpha:
        for k, edge in enumerate(g.edges):
            values[k] += alpha * np.linalg.norm(states[index[edge.u]] - states[index[edge.v]])
    if beta:
        values += beta * np.abs(forman_ricci(g))
    return Filtration(edge_values=values, vertex_value=0.0)
