from topofabric.topology.bottleneck import bottleneck_distance
from topofabric.topology.curvature import curvature_variance, forman_ricci, ricci_loss
from topofabric.topology.filtration import filtration_values
from topofabric.topology.multiscale import (
    multiscale_analysis,
    multiscale_loss,
    smooth_filtration,
    smooth_values,
)
from topofabric.topology.persistence import diagram_to_json, diagrams, persistence_diagram
from topofabric.topology.stability import (
    confidence_radius,
    monte_carlo_tail_frequency,
    ph_distance,
    ph_stability_ratio,
    probabilistic_tail_bound,
)
from topofabric.topology.surgery import cycle_persistence_proxy, neck_surgery

__all__ = [
    "bottleneck_distance",
    "confidence_radius",
    "curvature_variance",
    "cycle_persistence_proxy",
    "diagram_to_json",
    "diagrams",
    "filtration_values",
    "forman_ricci",
    "monte_carlo_tail_frequency",
    "multiscale_analysis",
    "multiscale_loss",
    "neck_surgery",
    "persistence_diagram",
    "ph_distance",
    "ph_stability_ratio",
    "probabilistic_tail_bound",
    "ricci_loss",
    "smooth_filtration",
    "smooth_values",
]
