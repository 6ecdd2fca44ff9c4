from topofabric.cochain.iteration import (
    admissible_step_interval,
    consensus_energy,
    km_iterate,
    theoretical_rate,
)
from topofabric.cochain.lexicographic import lexicographic_solve
from topofabric.cochain.penalty import (
    constraint_multipliers,
    estimate_penalty_threshold,
    exact_penalty_solve,
)
from topofabric.cochain.projection import AffineProjector, project_onto_constraints

__all__ = [
    "AffineProjector",
    "admissible_step_interval",
    "consensus_energy",
    "constraint_multipliers",
    "estimate_penalty_threshold",
    "exact_penalty_solve",
    "km_iterate",
    "lexicographic_solve",
    "project_onto_constraints",
    "theoretical_rate",
]
