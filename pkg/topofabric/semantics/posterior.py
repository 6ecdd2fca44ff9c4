import numpy as np
import numpy.typing as npt

from topofabric.exceptions import InputError

SUM_TOL = 1e-9


def fuse_class_posteriors(frames: list[npt.ArrayLike]) -> npt.NDArray[np.float64]:
    """
    Normalized geometric mean of per-frame class posteriors.

    A class that any frame rules out (probability 0) gets 0.

    Raises:
        InputError: On malformed frames or when every class is ruled out.
    """
    if not frames:
        raise InputError("at least one posterior frame is required")
    stacked = np.vstack([np.asarray(frame, dtype=float) for frame in frames])
    if np.any(stacked < 0) or not np.all(np.isfinite(stacked)):
        raise InputError("posteriors must be finite and non-negative")
    sums = stacked.sum(axis=1)
    if np.any(np.abs(sums - 1.0) > SUM_TOL):
        raise InputError(f"every frame must sum to 1, got sums {sums.tolist()}")

    ruled_out = np.any(stacked == 0, axis=0)
    with np.errstate(divide="ignore"):
        log_mean = np.log(np.where(ruled_out, 1.0, stacked)).mean(axis=0)
    fused = np.where(ruled_out, 0.0, np.exp(log_mean - log_mean[~ruled_out].max(initial=0.0)))
    total = fused.sum()
    if total == 0:
        raise InputError("all classes are ruled out by some frame")
    return fused / total
