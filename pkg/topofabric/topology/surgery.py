import logging

import numpy as np

from topofabric.exceptions import InputError
from topofabric.graph_core.cycles import fundamental_cycle_basis
from topofabric.graph_core.spectral import algebraic_connectivity
from topofabric.models.graph import WeightedGraph
from topofabric.models.topology import Filtration, SurgeryLog
from topofabric.topology.curvature import curvature_variance, forman_ricci

logger = logging.getLogger(__name__)


def cycle_persistence_proxy(values: np.ndarray) -> float:
    """Gap between the largest and second-largest filtration value on a cycle."""
    if values.size < 2:
        return float("inf")
    top = np.sort(values)[-2:]
    return float(top[1] - top[0])


def _reconnect(
    g: WeightedGraph, candidates: list[tuple[int, int]], weights: dict[tuple[int, int], float]
) -> tuple[WeightedGraph, list[tuple[int, int]]]:
    """Re-add minimum-weight removed edges until the graph is connected again."""
    restored = []
    current = g
    while not current.is_connected():
        component = {v: i for i, comp in enumerate(current.components()) for v in comp}
        crossing = [key for key in candidates if component[key[0]] != component[key[1]]]
        if not crossing:
            break
        key = min(crossing, key=lambda k: (weights[k], k))
        restored.append(key)
        current = WeightedGraph(
            vertices=current.vertices,
            edges=[*current.edges, (key[0], key[1], weights[key])],
            vertex_weights=current.vertex_weights,
            allow_disconnected=True,
        )
    return current, restored


def neck_surgery(
    g: WeightedGraph,
    f: Filtration,
    eps_neck: float,
    z_threshold: float = 2.0,
) -> tuple[WeightedGraph, SurgeryLog]:
    """
    Remove thin, high-curvature cycle edges.

    A fundamental cycle is a neck candidate when the gap between its two largest filtration
    values is below ``eps_neck`` and its mean |Ric_F| exceeds mean(Ric_F) + z * std(Ric_F) over all
    edges. The highest-valued edge of each candidate is removed; if that disconnects the graph the
    cheapest removed edge across the split is put back. A removal is kept only if the curvature
    variance does not grow.
    """
    if eps_neck <= 0:
        raise InputError(f"eps_neck must be positive, got {eps_neck}")
    if f.edge_values.shape != (g.m,):
        raise InputError(f"filtration has {f.edge_values.size} values for {g.m} edges")

    curvature = forman_ricci(g)
    log = SurgeryLog(
        variance_before=curvature_variance(g),
        mean_before=float(np.mean(curvature)) if g.m else 0.0,
        connectivity_before=algebraic_connectivity(g),
    )
    log.variance_after = log.variance_before
    log.mean_after = log.mean_before
    log.connectivity_after = log.connectivity_before
    if g.m == 0 or not g.is_connected():
        return g, log

    basis = fundamental_cycle_basis(g)
    log.cycles_examined = basis.q
    threshold = float(np.mean(curvature) + z_threshold * np.std(curvature))
    validated = []
    for row in range(basis.q):
        members = basis.cycle_edges(row)
        if cycle_persistence_proxy(f.edge_values[members]) >= eps_neck:
            continue
        if float(np.mean(np.abs(curvature[members]))) > threshold:
            validated.append(members)
    log.cycles_validated = len(validated)

    weights = {e.key: e.w for e in g.edges}
    current = g
    removed: set[tuple[int, int]] = set()
    for members in validated:
        keys = [g.edges[k].key for k in members]
        if any(key in removed for key in keys):
            continue
        target = max(members, key=lambda k: (f.edge_values[k], k))
        key = g.edges[target].key

        candidate = current.without_edges({key})
        candidate, restored = _reconnect(candidate, sorted(removed | {key}), weights)
        if key in restored:
            logger.info(f"Neck edge {key} is a bridge; left in place")
            log.rejected_edges.append(key)
            continue
        if curvature_variance(candidate) > curvature_variance(current) + 1e-12:
            logger.info(f"Removing {key} would raise curvature variance; skipped")
            log.rejected_edges.append(key)
            continue

        current = candidate
        removed.add(key)
        removed.difference_update(restored)
        log.removed_edges.append(key)
        log.restored_edges.extend(restored)
        logger.info(f"Neck surgery removed edge {key}")

    if log.removed_edges:
        curvature_after = forman_ricci(current)
        log.variance_after = curvature_variance(current)
        log.mean_after = float(np.mean(curvature_after)) if current.m else 0.0
        log.connectivity_after = algebraic_connectivity(current)
        current = WeightedGraph(
            vertices=current.vertices,
            edges=current.edges,
            vertex_weights=current.vertex_weights,
            allow_disconnected=g.allow_disconnected,
        )
    return current, log
