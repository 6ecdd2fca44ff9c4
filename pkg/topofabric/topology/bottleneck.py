import logging
import math

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_bipartite_matching

from topofabric.exceptions import InputError
from topofabric.models.topology import PersistenceDiagram

logger = logging.getLogger(__name__)


def _pair_cost(p: tuple[float, float], q: tuple[float, float]) -> float:
    return max(abs(p[0] - q[0]), abs(p[1] - q[1]))


def _diagonal_cost(p: tuple[float, float]) -> float:
    return (p[1] - p[0]) / 2.0


def _perfect_matching_exists(
    first: list[tuple[float, float]], second: list[tuple[float, float]], eps: float
) -> bool:
    """
    Feasibility of a matching with every cost <= eps.

    Rows are ``first`` followed by diagonal copies of ``second``; columns are ``second``
    followed by diagonal copies of ``first``. Diagonal copies match each other at no cost.
    """
    n1, n2 = len(first), len(second)
    size = n1 + n2
    rows, cols = [], []
    for i, p in enumerate(first):
        for j, q in enumerate(second):
            if _pair_cost(p, q) <= eps:
                rows.append(i)
                cols.append(j)
        if _diagonal_cost(p) <= eps:
            rows.append(i)
            cols.append(n2 + i)
    for j, q in enumerate(second):
        if _diagonal_cost(q) <= eps:
            rows.append(n1 + j)
            cols.append(j)
        for i in range(n1):
            rows.append(n1 + j)
            cols.append(n2 + i)
    if not rows:
        return size == 0
    graph = csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(size, size))
    matching = maximum_bipartite_matching(graph, perm_type="column")
    return bool(np.all(matching >= 0))


def _finite_distance(first: list[tuple[float, float]], second: list[tuple[float, float]]) -> float:
    if not first and not second:
        return 0.0
    candidates = {0.0}
    candidates.update(_diagonal_cost(p) for p in first)
    candidates.update(_diagonal_cost(q) for q in second)
    candidates.update(_pair_cost(p, q) for p in first for q in second)
    thresholds = sorted(candidates)

    # smallest feasible threshold; the largest diagonal cost is always feasible
    lo, hi = 0, len(thresholds) - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if _perfect_matching_exists(first, second, thresholds[mid]):
            hi = mid
        else:
            lo = mid + 1
    return thresholds[lo]


def bottleneck_distance(d1: PersistenceDiagram, d2: PersistenceDiagram) -> float:
    """
    Exact bottleneck distance between two diagrams of the same dimension.

    Essential points are matched among themselves by sorted birth; a different number of
    essential points gives ``inf`` (logged as a warning). Finite points may match the diagonal.
    """
    if d1.dim != d2.dim:
        raise InputError(f"cannot compare an H{d1.dim} diagram with an H{d2.dim} diagram")

    ess1, ess2 = d1.essential(), d2.essential()
    if len(ess1) != len(ess2):
        logger.warning(
            f"H{d1.dim} diagrams carry {len(ess1)} and {len(ess2)} essential points; "
            "distance is inf"
        )
        return math.inf
    essential = max((abs(a - b) for a, b in zip(ess1, ess2, strict=True)), default=0.0)
    return max(essential, _finite_distance(d1.finite(), d2.finite()))

