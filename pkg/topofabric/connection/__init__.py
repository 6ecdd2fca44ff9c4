from topofabric.connection.gauge import apply_gauge, random_orthogonal_gauge
from topofabric.connection.laplacian import (
    assemble_connection_laplacian,
    connection_kernel_dimension,
    consistency_energy,
    cycle_holonomy,
    solve_anchored,
)

__all__ = [
    "apply_gauge",
    "assemble_connection_laplacian",
    "connection_kernel_dimension",
    "consistency_energy",
    "cycle_holonomy",
    "random_orthogonal_gauge",
    "solve_anchored",
]
