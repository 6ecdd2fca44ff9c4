from topofabric.graph_core.cycles import cycle_rank, fundamental_cycle_basis
from topofabric.graph_core.operators import (
    boundary_operator,
    edge_laplacian,
    export_matrix_csv,
    hodge_split,
    vertex_laplacian,
)
from topofabric.graph_core.spectral import algebraic_connectivity, effective_resistance, kappa

__all__ = [
    "algebraic_connectivity",
    "boundary_operator",
    "cycle_rank",
    "edge_laplacian",
    "effective_resistance",
    "export_matrix_csv",
    "fundamental_cycle_basis",
    "hodge_split",
    "kappa",
    "vertex_laplacian",
]
