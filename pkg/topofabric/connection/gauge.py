import numpy as np
import numpy.typing as npt
from scipy.stats import special_ortho_group

from topofabric.exceptions import InputError
from topofabric.models.connection import ConnectionGraph

ORTHOGONALITY_TOL = 1e-9


def apply_gauge(
    cg: ConnectionGraph, f: npt.ArrayLike, g: list[npt.ArrayLike]
) -> tuple[ConnectionGraph, npt.NDArray[np.float64]]:
    """
    Act with a per-vertex orthogonal gauge: T'_ij = g_i T_ij g_j^T and f'_i = g_i f_i.

    ``g`` is ordered like the sorted vertex list.

    Raises:
        InputError: If a gauge element is not orthogonal or the shapes disagree.
    """
    d = cg.d
    f = np.asarray(f, dtype=float)
    if f.shape != (cg.size,):
        raise InputError(f"section has {f.size} entries, expected {cg.size}")
    if len(g) != cg.base.n:
        raise InputError(f"{len(g)} gauge elements given for {cg.base.n} vertices")

    gauges = [np.asarray(element, dtype=float).reshape(d, d) for element in g]
    for v, element in zip(cg.base.vertices, gauges, strict=True):
        if not np.allclose(element @ element.T, np.eye(d), atol=ORTHOGONALITY_TOL):
            raise InputError(f"gauge at vertex {v} is not orthogonal")

    index = cg.base.vertex_index()
    transforms = [
        gauges[index[edge.u]] @ transform @ gauges[index[edge.v]].T
        for edge, transform in zip(cg.base.edges, cg.transforms, strict=True)
    ]
    section = np.concatenate([gauges[i] @ f[i * d : (i + 1) * d] for i in range(cg.base.n)])
    return ConnectionGraph(base=cg.base, d=d, transforms=transforms), section


def random_orthogonal_gauge(
    n: int, d: int, rng: np.random.Generator
) -> list[npt.NDArray[np.float64]]:
    """Haar-distributed rotations, one per vertex (d=1 draws signs)."""
    if d == 1:
        return [np.array([[rng.choice([-1.0, 1.0])]]) for _ in range(n)]
    return [special_ortho_group.rvs(d, random_state=rng) for _ in range(n)]
