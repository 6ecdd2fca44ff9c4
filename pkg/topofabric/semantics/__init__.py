from topofabric.semantics.distance import (
    context_drift_bound,
    contextual_distance,
    contextual_stability_bound,
)
from topofabric.semantics.fusion import fuse_maps, kabsch, project_pose
from topofabric.semantics.onn import SemanticProblem, onn_solve
from topofabric.semantics.ontology import apply_ontology_rules, forward_chain, parse_rule
from topofabric.semantics.posterior import fuse_class_posteriors
from topofabric.semantics.tracking import tracking_bound, tracking_report
from topofabric.semantics.trace import build_reasoning_trace, edge_interactions

__all__ = [
    "SemanticProblem",
    "apply_ontology_rules",
    "build_reasoning_trace",
    "context_drift_bound",
    "contextual_distance",
    "contextual_stability_bound",
    "edge_interactions",
    "forward_chain",
    "fuse_class_posteriors",
    "fuse_maps",
    "kabsch",
    "parse_rule",
    "project_pose",
    "tracking_bound",
    "tracking_report",
]
