import logging

import numpy as np
import numpy.typing as npt
from scipy.spatial import cKDTree

from topofabric.exceptions import InputError
from topofabric.models.scene import FusionResult, SemanticMap

logger = logging.getLogger(__name__)

MAX_ROUNDS = 50
COLLINEAR_TOL = 1e-9


def project_pose(
    q: npt.ArrayLike, rotation: npt.ArrayLike, translation: npt.ArrayLike
) -> npt.NDArray[np.float64]:
    """Map camera-frame points (one per row) into the world frame: R q + t."""
    points = np.atleast_2d(np.asarray(q, dtype=float))
    projected = points @ np.asarray(rotation, dtype=float).T + np.asarray(translation, dtype=float)
    return projected.reshape(np.shape(q))


def kabsch(
    source: npt.NDArray[np.float64], target: npt.NDArray[np.float64]
) -> tuple[npt.NDArray[np.float64], npt.NDArray[np.float64]]:
    """
    Rotation R and translation t minimizing sum ||R p_i + t - q_i||^2.

    Raises:
        InputError: With fewer than 3 pairs or collinear source points.
    """
    if source.shape[0] < 3:
        raise InputError(f"rigid alignment needs at least 3 correspondences, got {source.shape[0]}")
    mu_p, mu_q = source.mean(axis=0), target.mean(axis=0)
    P, Q = source - mu_p, target - mu_q
    singular = np.linalg.svd(P, compute_uv=False)
    if singular.size < 2 or singular[1] <= COLLINEAR_TOL * max(singular[0], 1.0):
        raise InputError("correspondences are collinear; rotation is not unique")
    U, _, Vt = np.linalg.svd(P.T @ Q)
    sign = 1.0 if np.linalg.det(Vt.T @ U.T) >= 0 else -1.0
    rotation = Vt.T @ np.diag([1.0, 1.0, sign]) @ U.T
    return rotation, mu_q - rotation @ mu_p


def _correspondences(
    moved: npt.NDArray[np.float64],
    tree: cKDTree,
    A: SemanticMap,
    B: SemanticMap,
    eps: float,
    strict: bool,
) -> list[tuple[int, int]]:
    pairs = []
    for i, neighbours in enumerate(tree.query_ball_point(moved, r=eps)):
        for j in sorted(neighbours):
            if np.linalg.norm(moved[i] - B.points[j]) >= eps:
                continue
            if strict and A.classes[i] != B.classes[j]:
                continue
            pairs.append((i, j))
    return pairs


def _objective(
    A: SemanticMap, B: SemanticMap, rotation, translation, pairs, label_weight: float
) -> tuple[float, float, int]:
    if not pairs:
        return 0.0, 0.0, 0
    src = np.array([i for i, _ in pairs])
    dst = np.array([j for _, j in pairs])
    moved = project_pose(A.points[src], rotation, translation)
    geometric = float(np.sum((moved - B.points[dst]) ** 2))
    mismatches = sum(A.classes[i] != B.classes[j] for i, j in pairs)
    return geometric + label_weight * mismatches, geometric, mismatches


def fuse_maps(
    A: SemanticMap,
    B: SemanticMap,
    eps: float,
    label_weight: float = 1.0,
    strict: bool = False,
    correspondences: list[tuple[int, int]] | None = None,
    max_rounds: int = MAX_ROUNDS,
) -> FusionResult:
    """
    Align map ``A`` onto map ``B``.

    Alternates radius-``eps`` correspondence search with closed-form rigid alignment until the
    correspondence set stops changing. Fixed ``correspondences`` skip the search.
    Mismatched labels add ``label_weight`` each to the objective; ``strict`` drops those pairs,
    fixed ones included.
    """
    if eps <= 0:
        raise InputError(f"correspondence radius must be positive, got {eps}")
    if correspondences is not None and strict:
        kept = [(i, j) for i, j in correspondences if A.classes[i] == B.classes[j]]
        if len(kept) < len(correspondences):
            logger.info(
                f"strict fusion dropped {len(correspondences) - len(kept)} fixed "
                "correspondence(s) with mismatched labels"
            )
        correspondences = kept
    rotation, translation = np.eye(3), np.zeros(3)
    tree = cKDTree(B.points)
    pairs = list(correspondences) if correspondences is not None else None
    rounds = 0
    while rounds < max_rounds:
        rounds += 1
        if correspondences is not None:
            current = list(correspondences)
        else:
            moved = project_pose(A.points, rotation, translation)
            current = _correspondences(moved, tree, A, B, eps, strict)
        if len(current) < 3:
            raise InputError(
                f"only {len(current)} correspondences within eps={eps}; need at least 3"
            )
        src = A.points[[i for i, _ in current]]
        dst = B.points[[j for _, j in current]]
        rotation, translation = kabsch(src, dst)
        if current == pairs:
            break
        pairs = current
    else:
        logger.warning(f"map fusion stopped after {max_rounds} rounds without a fixpoint")

    objective, geometric, mismatches = _objective(
        A, B, rotation, translation, pairs, label_weight
    )
    return FusionResult(
        rotation=rotation,
        translation=translation,
        correspondences=pairs,
        objective=objective,
        geometric_cost=geometric,
        mismatches=mismatches,
        rounds=rounds,
    )
