import logging

import numpy as np
import numpy.typing as npt
from scipy import linalg

from topofabric.exceptions import InputError, SingularSystemError
from topofabric.models.connection import ConnectionGraph, GaugeAnchor

logger = logging.getLogger(__name__)

PIVOT_TOL = 1e-10
RESIDUAL_TOL = 1e-8


def assemble_connection_laplacian(cg: ConnectionGraph) -> npt.NDArray[np.float64]:
    """
    Connection Laplacian with 0.5 f^T L f equal to the consistency energy.

    Each edge (i, j) with weight w and transform T adds w I to block (i, i), w T^T T to (j, j),
    -w T to (i, j) and -w T^T to (j, i).
    """
    d = cg.d
    index = cg.base.vertex_index()
    laplacian = np.zeros((cg.size, cg.size))
    for edge, transform in zip(cg.base.edges, cg.transforms, strict=True):
        i, j = index[edge.u] * d, index[edge.v] * d
        laplacian[i : i + d, i : i + d] += edge.w * np.eye(d)
        laplacian[j : j + d, j : j + d] += edge.w * transform.T @ transform
        laplacian[i : i + d, j : j + d] -= edge.w * transform
        laplacian[j : j + d, i : i + d] -= edge.w * transform.T
    return laplacian


def consistency_energy(cg: ConnectionGraph, f: npt.ArrayLike) -> float:
    """0.5 * sum of w_ij ||T_ij f_j - f_i||^2."""
    f = np.asarray(f, dtype=float)
    if f.shape != (cg.size,):
        raise InputError(f"section has {f.size} entries, expected {cg.size}")
    d = cg.d
    index = cg.base.vertex_index()
    total = 0.0
    for edge, transform in zip(cg.base.edges, cg.transforms, strict=True):
        i, j = index[edge.u] * d, index[edge.v] * d
        gap = transform @ f[j : j + d] - f[i : i + d]
        total += edge.w * float(gap @ gap)
    return 0.5 * total


def connection_kernel_dimension(cg: ConnectionGraph, tol: float = 1e-9) -> int:
    """Number of numerically zero eigenvalues of the connection Laplacian."""
    eigenvalues = linalg.eigh(assemble_connection_laplacian(cg), eigvals_only=True)
    scale = max(1.0, float(np.max(np.abs(eigenvalues))))
    return int(np.sum(eigenvalues < tol * scale))


def cycle_holonomy(cg: ConnectionGraph, cycle: list[int]) -> npt.NDArray[np.float64]:
    """
    Product of transforms along the closed walk ``cycle[0] -> cycle[1] -> ... -> cycle[0]``.

    The identity means the loop is consistent.
    """
    lookup = dict(zip((e.key for e in cg.base.edges), cg.transforms, strict=True))
    product = np.eye(cg.d)
    for a, b in zip(cycle, cycle[1:] + cycle[:1], strict=True):
        if (a, b) in lookup:
            product = product @ lookup[(a, b)]
        elif (b, a) in lookup:
            product = product @ np.linalg.inv(lookup[(b, a)])
        else:
            raise InputError(f"no edge between {a} and {b}")
    return product


def _ldl_solve(system: npt.NDArray[np.float64], rhs: npt.NDArray[np.float64], scale: float):
    lower, block_diagonal, perm = linalg.ldl(system, lower=True)
    pivots = np.abs(linalg.eigvalsh(block_diagonal))
    if pivots.min() < PIVOT_TOL * scale:
        raise SingularSystemError(
            f"augmented system is singular (smallest LDL pivot {pivots.min():.2e})"
        )
    triangular = lower[perm]
    z = linalg.solve_triangular(triangular, rhs[perm], lower=True, unit_diagonal=True)
    y = linalg.solve(block_diagonal, z, assume_a="sym")
    u = linalg.solve_triangular(triangular.T, y, lower=False, unit_diagonal=True)
    solution = np.empty_like(u)
    solution[perm] = u
    return solution


def _lu_solve(system: npt.NDArray[np.float64], rhs: npt.NDArray[np.float64], scale: float):
    lu, piv = linalg.lu_factor(system)
    pivots = np.abs(np.diag(lu))
    if pivots.min() < PIVOT_TOL * scale:
        raise SingularSystemError(
            f"augmented system is singular (smallest LU pivot {pivots.min():.2e})"
        )
    return linalg.lu_solve((lu, piv), rhs)


def solve_anchored(
    cg: ConnectionGraph,
    anchor: GaugeAnchor,
    b: npt.ArrayLike | None = None,
    method: str = "ldl",
) -> npt.NDArray[np.float64]:
    """
    Solve the saddle system [[L_conn, A^T], [A, 0]] [f; lambda] = [b; a].

    Args:
        cg: Connection graph.
        anchor: Gauge anchor ``A f = a``.
        b: Right-hand side for the Laplacian block (zero by default).
        method: ``"ldl"`` (symmetric indefinite) or ``"lu"``.

    Returns:
        The stacked node vectors ``f``.

    Raises:
        InputError: On shape mismatches or an anchor with fewer than ``d`` rows.
        SingularSystemError: If the anchor does not pierce the kernel of ``L_conn``.
    """
    n = cg.size
    b = np.zeros(n) if b is None else np.asarray(b, dtype=float)
    if b.shape != (n,):
        raise InputError(f"right-hand side has {b.size} entries, expected {n}")
    if anchor.matrix.shape[1] != n:
        raise InputError(f"anchor acts on {anchor.matrix.shape[1]} entries, expected {n}")
    if anchor.r < cg.d:
        raise InputError(f"anchor has {anchor.r} rows; at least d={cg.d} are needed")

    laplacian = assemble_connection_laplacian(cg)
    if np.linalg.matrix_rank(np.vstack([laplacian, anchor.matrix])) < n:
        raise SingularSystemError(
            "gauge anchor does not pierce the kernel: ker(L_conn) and ker(A) intersect"
        )

    system = np.block([[laplacian, anchor.matrix.T], [anchor.matrix, np.zeros((anchor.r,) * 2)]])
    rhs = np.concatenate([b, anchor.value])
    scale = max(1.0, float(np.max(np.abs(system))))
    if method == "ldl":
        solution = _ldl_solve(system, rhs, scale)
    elif method == "lu":
        solution = _lu_solve(system, rhs, scale)
    else:
        raise InputError(f"unknown factorization '{method}'; expected 'ldl' or 'lu'")

    residual = float(np.linalg.norm(system @ solution - rhs))
    if residual > RESIDUAL_TOL * max(1.0, float(np.linalg.norm(rhs))):
        logger.warning(f"Anchored solve residual {residual:.3e} above {RESIDUAL_TOL:.0e}")
    return solution[:n]
