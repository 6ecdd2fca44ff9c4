import math

import networkx as nx
import numpy as np
from scipy import linalg

from topofabric.exceptions import InputError
from topofabric.graph_core.operators import vertex_laplacian
from topofabric.models.graph import WeightedGraph
from topofabric.settings import get_settings


def algebraic_connectivity(g: WeightedGraph) -> float:
    """Second-smallest eigenvalue of the weighted vertex Laplacian (0 iff disconnected)."""
    if g.n < 2:
        return 0.0
    eigenvalues = linalg.eigh(vertex_laplacian(g), eigvals_only=True)
    value = float(eigenvalues[1])
    # round-off below this scale is indistinguishable from a zero eigenvalue
    if value < 1e-12 * max(1.0, float(eigenvalues[-1])):
        return 0.0
    return value


def effective_resistance(g: WeightedGraph, i: int, j: int) -> float:
    """
    Resistance distance (e_i - e_j)^T L^+ (e_i - e_j).

    Raises:
        InputError: If either vertex is unknown or the two lie in different components.
    """
    index = g.vertex_index()
    if i not in index or j not in index:
        raise InputError(f"unknown vertex in effective_resistance({i}, {j})")
    if i == j:
        return 0.0
    if j not in nx.node_connected_component(g.to_networkx(), i):
        raise InputError(f"vertices {i} and {j} lie in different components")

    rtol = getattr(get_settings(), "FABRIC_PINV_RTOL", 1e-12)
    pseudo = linalg.pinv(vertex_laplacian(g), rtol=rtol)
    difference = np.zeros(g.n)
    difference[index[i]] = 1.0
    difference[index[j]] = -1.0
    return float(max(difference @ pseudo @ difference, 0.0))


def kappa(g: WeightedGraph) -> float:
    """Graph-size factor sqrt(|E|) used by the unified stability bound."""
    return math.sqrt(g.m)
