import logging

import numpy as np
import numpy.typing as npt

from topofabric.exceptions import InputError
from topofabric.models.scene import ReasoningTrace

logger = logging.getLogger(__name__)


def extrapolate(
    current: npt.ArrayLike, previous: npt.ArrayLike, delta: float, spacing: float
) -> npt.NDArray[np.float64]:
    """R(t) + delta (R(t) - R(t - h)) / h."""
    if spacing <= 0:
        raise InputError(f"history spacing must be positive, got {spacing}")
    now = np.asarray(current, dtype=float)
    return now + delta * (now - np.asarray(previous, dtype=float)) / spacing


def predictor_lipschitz(delta: float, spacing: float, joint: bool = False) -> float:
    """
    Lipschitz constant of the finite-difference predictor.

    1 + delta / h with respect to the newest sample; 1 + 2 delta / h when both samples move.
    """
    return 1.0 + (2.0 if joint else 1.0) * delta / spacing


def prediction_error_bound(L_phi: float, M: float, delta: float) -> float:
    """Worst-case error of predicting delta ahead a trace moving at most M with Lipschitz L_phi."""
    return L_phi * M * delta


def predict_trace(
    current: ReasoningTrace,
    previous: ReasoningTrace | None,
    delta: float,
    spacing: float | None = None,
) -> tuple[ReasoningTrace, bool]:
    """
    Extrapolate ``current`` by ``delta`` seconds from the two newest traces.

    Without usable history (none, or a different edge set) the prediction is a zero-order hold.
    Returns the predicted trace and whether it was held.
    """
    if delta < 0:
        raise InputError(f"prediction horizon must be non-negative, got {delta}")
    held = previous is None or previous.edges != current.edges
    if previous is not None and held:
        logger.warning(
            f"trace at t={current.timestamp} changed edge set; holding instead of extrapolating"
        )
    if held:
        states, interactions = current.states.copy(), current.interactions.copy()
    else:
        h = spacing if spacing is not None else current.timestamp - previous.timestamp
        states = extrapolate(current.states, previous.states, delta, h)
        interactions = extrapolate(current.interactions, previous.interactions, delta, h)
    predicted = current.model_copy(
        update={
            "timestamp": current.timestamp + delta,
            "states": states,
            "interactions": interactions,
            "predicted": True,
        }
    )
    return predicted, held
