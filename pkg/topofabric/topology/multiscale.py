import numpy as np
import numpy.typing as npt

from topofabric.exceptions import InputError
from topofabric.models.constraints import AffineConstraint
from topofabric.models.graph import WeightedGraph
from topofabric.models.topology import Filtration, MultiscaleResult, ScalePolicy
from topofabric.topology.bottleneck import bottleneck_distance
from topofabric.topology.curvature import forman_ricci
from topofabric.topology.persistence import diagrams


def _neighbour_means(g: WeightedGraph, values: npt.NDArray[np.float64]) -> npt.NDArray[np.float64]:
    incident: dict[int, list[int]] = {v: [] for v in g.vertices}
    for k, edge in enumerate(g.edges):
        incident[edge.u].append(k)
        incident[edge.v].append(k)
    means = values.copy()
    for k, edge in enumerate(g.edges):
        neighbours = {j for end in (edge.u, edge.v) for j in incident[end] if j != k}
        if neighbours:
            means[k] = float(np.mean(values[sorted(neighbours)]))
    return means


def smooth_values(
    g: WeightedGraph, values: npt.ArrayLike, sigma: float
) -> npt.NDArray[np.float64]:
    """
    Mix each edge value with the mean over edges sharing an endpoint.

    The mixing weight is sigma / (1 + sigma): scale zero is the identity, constants are fixed, and
    the map is order preserving and 1-Lipschitz in the sup norm.
    """
    if sigma < 0:
        raise InputError(f"scale must be non-negative, got {sigma}")
    values = np.asarray(values, dtype=float)
    if sigma == 0 or values.size == 0:
        return values.copy()
    mix = sigma / (1.0 + sigma)
    return (1.0 - mix) * values + mix * _neighbour_means(g, values)


def smooth_filtration(g: WeightedGraph, f: Filtration, sigma: float) -> Filtration:
    return Filtration(
        edge_values=smooth_values(g, f.edge_values, sigma), vertex_value=f.vertex_value
    )


def multiscale_analysis(
    g: WeightedGraph,
    f: Filtration,
    policy: ScalePolicy,
    other: Filtration | None = None,
) -> MultiscaleResult:
    """
    Diagrams of the smoothed filtration at every scale.

    When ``other`` is given (the same graph at the next time step), the per-scale bottleneck drift
    and its supremum are reported next to ``||f - other||_inf``.
    """
    per_scale = [diagrams(g, smooth_filtration(g, f, s)) for s in policy.scales]
    result = MultiscaleResult(scales=list(policy.scales), diagrams=per_scale)
    if other is None:
        return result

    drifts = []
    for sigma, current in zip(policy.scales, per_scale, strict=True):
        following = diagrams(g, smooth_filtration(g, other, sigma))
        drifts.append(max(bottleneck_distance(current[k], following[k]) for k in (0, 1)))
    result.drifts = drifts
    result.sup_drift = max(drifts)
    result.sup_input_change = f.sup_distance(other)
    return result


def multiscale_loss(
    g: WeightedGraph,
    policy: ScalePolicy,
    constraint: AffineConstraint | None = None,
    cochain: npt.ArrayLike | None = None,
    lambda_context: float = 1.0,
) -> float:
    """
    (1/|S|) sum_s w_s (L_ricci^s + lambda_context L_context^s) over the scales of ``policy``.

    Curvature and the cochain are smoothed with the same operator as the filtration.
    """
    curvature = forman_ricci(g)
    total = 0.0
    for sigma, weight in zip(policy.scales, policy.weights or [], strict=True):
        ricci = float(np.sum(smooth_values(g, curvature, sigma) ** 2))
        context = 0.0
        if constraint is not None and cochain is not None and constraint.q:
            smoothed = smooth_values(g, cochain, sigma)
            context = float(np.sum((constraint.matrix @ smoothed - constraint.target) ** 2))
        total += weight * (ricci + lambda_context * context)
    return total / len(policy.scales)
