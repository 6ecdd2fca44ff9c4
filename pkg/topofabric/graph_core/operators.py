import csv
import os

import numpy as np
import numpy.typing as npt
from scipy import linalg

from topofabric.models.graph import Cochain, WeightedGraph

Matrix = npt.NDArray[np.float64]


def boundary_operator(g: WeightedGraph) -> Matrix:
    """
    Signed incidence matrix B1 (m x n): -1 at the tail, +1 at the head of each edge.

    Rows follow the canonical edge order, columns the sorted vertex order. Edge weights do not
    enter B1.
    """
    index = g.vertex_index()
    b1 = np.zeros((g.m, g.n))
    for k, edge in enumerate(g.edges):
        b1[k, index[edge.u]] = -1.0
        b1[k, index[edge.v]] = 1.0
    return b1


def edge_laplacian(b1: Matrix) -> Matrix:
    """L1 = B1 B1^T; its kernel is the cycle space."""
    return b1 @ b1.T


def vertex_laplacian(g: WeightedGraph) -> Matrix:
    """Weighted vertex Laplacian B1^T W B1."""
    b1 = boundary_operator(g)
    return b1.T @ (g.edge_weights()[:, None] * b1)


def hodge_split(b1: Matrix, x: Cochain) -> tuple[Cochain, Cochain]:
    """
    Split an edge signal into its gradient part (in Im B1) and its cycle part (in ker L1).

    The two parts are computed from independent orthonormal bases so that their sum is a real
    reconstruction check.
    """
    x = np.asarray(x, dtype=float)
    if b1.size == 0:
        return np.zeros_like(x), x.copy()
    gradient_basis = linalg.orth(b1)
    cycle_basis = linalg.null_space(edge_laplacian(b1))
    gradient = gradient_basis @ (gradient_basis.T @ x)
    cycle = cycle_basis @ (cycle_basis.T @ x) if cycle_basis.size else np.zeros_like(x)
    return gradient, cycle


def export_matrix_csv(matrix: Matrix, path: str) -> str:
    """Write a matrix as CSV, one row per line, for debugging."""
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        for row in np.atleast_2d(matrix):
            writer.writerow([format(float(value), ".12g") for value in row])
    return path
