import logging
import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from topofabric.models.graph import WeightedGraph
from topofabric.models.topology import Filtration, PersistenceDiagram, TailEstimate
from topofabric.rng import make_rng
from topofabric.topology.bottleneck import bottleneck_distance
from topofabric.topology.persistence import diagrams

logger = logging.getLogger(__name__)

DEFAULT_DIMENSION_WEIGHTS = (0.5, 0.5)


def ph_distance(
    first: dict[int, PersistenceDiagram],
    second: dict[int, PersistenceDiagram],
    weights: tuple[float, float] = DEFAULT_DIMENSION_WEIGHTS,
) -> float:
    """Dimension-weighted bottleneck distance over H0 and H1."""
    return float(sum(w * bottleneck_distance(first[k], second[k]) for k, w in enumerate(weights)))


def ph_stability_ratio(
    f: Filtration, g: Filtration, graph: WeightedGraph
) -> tuple[float, float, float]:
    """
    Compare the diagram change with the filtration change.

    Returns:
        ``(d_B, ||f - g||_inf, ratio)`` where ``d_B`` is the larger of the H0 and H1 distances
        and the ratio is 0 when both quantities vanish.
    """
    first, second = diagrams(graph, f), diagrams(graph, g)
    distance = max(bottleneck_distance(first[k], second[k]) for k in (0, 1))
    change = f.sup_distance(g)
    if change == 0:
        ratio = 0.0 if distance == 0 else math.inf
    else:
        ratio = distance / change
    return distance, change, ratio


def probabilistic_tail_bound(
    eps: float, sigma_f: float, L_c: float = 1.0, mean_xi: float = 0.0
) -> float:
    """Gaussian-noise tail bound min(1, 2 exp(-(eps - L_c E)^2 / (2 L_c^2 sigma_f^2)))."""
    if sigma_f <= 0:
        return 0.0 if eps > L_c * mean_xi else 1.0
    excess = max(eps - L_c * mean_xi, 0.0)
    return min(1.0, 2.0 * math.exp(-(excess**2) / (2.0 * L_c**2 * sigma_f**2)))


def confidence_radius(
    alpha: float, sigma_f: float, L_c: float = 1.0, mean_xi: float = 0.0
) -> float:
    """Radius r with P(d_PH > r) <= alpha under the Gaussian tail bound."""
    if not 0 < alpha < 1:
        raise ValueError(f"confidence level must lie in (0, 1), got {alpha}")
    return L_c * mean_xi + L_c * sigma_f * math.sqrt(2.0 * math.log(2.0 / alpha))


def monte_carlo_tail_frequency(
    g: WeightedGraph,
    f: Filtration,
    sigma_f: float,
    eps_grid: list[float],
    trials: int = 2000,
    seed: int = 0,
    weights: tuple[float, float] = DEFAULT_DIMENSION_WEIGHTS,
    L_c: float = 1.0,
    workers: int = 1,
) -> TailEstimate:
    """
    Empirical frequency of {d_PH(D(f), D(f + xi)) > eps} under i.i.d. Gaussian edge noise.

    Trial ``t`` draws its noise from stream ``t`` of ``seed``.
    """
    reference = diagrams(g, f)

    def trial(t: int) -> float:
        noise = make_rng(seed, stream=t).normal(0.0, sigma_f, size=g.m)
        perturbed = Filtration(edge_values=f.edge_values + noise, vertex_value=f.vertex_value)
        return ph_distance(reference, diagrams(g, perturbed), weights)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            distances = np.fromiter(pool.map(trial, range(trials)), dtype=float, count=trials)
    else:
        distances = np.fromiter((trial(t) for t in range(trials)), dtype=float, count=trials)

    frequencies, errors, bounds = [], [], []
    for eps in eps_grid:
        p = float(np.mean(distances > eps))
        frequencies.append(p)
        errors.append(math.sqrt(p * (1.0 - p) / trials))
        bounds.append(probabilistic_tail_bound(eps, sigma_f, L_c))
    logger.debug(f"tail battery: {trials} trials, max d_PH {distances.max():.4f}")
    return TailEstimate(
        eps=list(eps_grid),
        frequencies=frequencies,
        standard_errors=errors,
        bounds=bounds,
        trials=trials,
    )
