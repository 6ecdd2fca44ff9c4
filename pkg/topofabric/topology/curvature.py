import math

import numpy as np
import numpy.typing as npt

from topofabric.models.graph import WeightedGraph


def forman_ricci(g: WeightedGraph) -> npt.NDArray[np.float64]:
    """
    Forman-Ricci curvature per canonical edge.

    Ric(e) = w_e [ (w_i + w_j) / w_e - sum_{k ~ i, k != e} w_i / sqrt(w_e w_k)
                                   - sum_{l ~ j, l != e} w_j / sqrt(w_e w_l) ]

    At unit weights this is 4 - deg(i) - deg(j).
    """
    vertex_weight = dict(zip(g.vertices, g.vertex_weight_array(), strict=True))
    incident: dict[int, list[int]] = {v: [] for v in g.vertices}
    for k, edge in enumerate(g.edges):
        incident[edge.u].append(k)
        incident[edge.v].append(k)

    curvature = np.empty(g.m)
    for k, edge in enumerate(g.edges):
        w_e = edge.w
        total = (vertex_weight[edge.u] + vertex_weight[edge.v]) / w_e
        for end in (edge.u, edge.v):
            for other in incident[end]:
                if other != k:
                    total -= vertex_weight[end] / math.sqrt(w_e * g.edges[other].w)
        curvature[k] = w_e * total
    return curvature


def ricci_loss(g: WeightedGraph) -> float:
    """Curvature regularizer: sum of squared Forman-Ricci curvatures."""
    return float(np.sum(forman_ricci(g) ** 2))


def curvature_variance(g: WeightedGraph) -> float:
    """Population variance of the edge curvatures (0 for an edgeless graph)."""
    if g.m == 0:
        return 0.0
    return float(np.var(forman_ricci(g)))
