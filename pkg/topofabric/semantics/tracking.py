import math
from collections.abc import Mapping, Sequence

import numpy as np
import numpy.typing as npt

from topofabric.exceptions import InputError
from topofabric.models.scene import TrackingReport

Sample = tuple[float, npt.ArrayLike]


def tracking_bound(L_phi: float, M: float, mu: float, horizon: float) -> float:
    """(L_phi M / mu)(1 - exp(-mu T))."""
    if mu <= 0:
        raise InputError(f"decay rate must be positive, got {mu}")
    return L_phi * M / mu * (1.0 - math.exp(-mu * horizon))


def tracking_report(
    segments: Sequence[Sequence[Sample]],
    transitions: Mapping[int, npt.ArrayLike],
    L_phi: float,
    M: float,
    mu: float,
) -> TrackingReport:
    """
    Jump errors at the boundaries between consecutive trace segments.

    Boundary k sits between ``segments[k]`` and ``segments[k + 1]``; ``transitions[k]`` maps the
    state space of the first into that of the second and defaults to the identity.

    Raises:
        InputError: On an empty segment or a dimension mismatch, naming the boundary.
    """
    if any(len(segment) == 0 for segment in segments):
        raise InputError("every trace segment needs at least one sample")
    errors = []
    for k in range(len(segments) - 1):
        before = np.asarray(segments[k][-1][1], dtype=float)
        after = np.asarray(segments[k + 1][0][1], dtype=float)
        phi = np.asarray(transitions.get(k, np.eye(before.size)), dtype=float)
        if phi.shape != (after.size, before.size):
            raise InputError(
                f"transition at boundary {k} has shape {phi.shape}, "
                f"expected {(after.size, before.size)}"
            )
        errors.append(float(np.linalg.norm(after - phi @ before)))

    horizon = float(segments[-1][-1][0] - segments[0][0][0]) if segments else 0.0
    cumulative = float(sum(errors))
    bound = tracking_bound(L_phi, M, mu, horizon)
    return TrackingReport(
        errors=errors,
        cumulative=cumulative,
        bound=bound,
        horizon=horizon,
        violated=cumulative > bound,
    )
