import logging

import numpy as np
import numpy.typing as npt
from scipy import linalg

from topofabric.exceptions import InfeasibleConstraintError, InputError
from topofabric.models.constraints import AffineConstraint
from topofabric.models.graph import Cochain
from topofabric.settings import get_settings

logger = logging.getLogger(__name__)


class AffineProjector:
    """
    Orthogonal projection onto {x : C x = tau} with a cached Cholesky factor of C C^T.

    One step of iterative refinement follows every projection.
    """

    def __init__(self, constraint: AffineConstraint):
        if not constraint.feasible:
            raise InfeasibleConstraintError(
                "cannot project onto an inconsistent constraint; use exact_penalty_solve"
            )
        self.constraint = constraint
        self._factor = None
        if constraint.q:
            gram = constraint.matrix @ constraint.matrix.T
            try:
                self._factor = linalg.cho_factor(gram)
            except linalg.LinAlgError as e:
                raise InputError(f"constraint Gram matrix is not positive definite: {e}") from e

    def correction(self, x: Cochain) -> Cochain:
        c = self.constraint
        return c.matrix.T @ linalg.cho_solve(self._factor, c.matrix @ x - c.target)

    def __call__(self, x: Cochain) -> Cochain:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.constraint.m,) and self.constraint.q:
            raise InputError(
                f"cochain has {x.shape[0]} entries but the constraint acts on {self.constraint.m}"
            )
        if self._factor is None:
            return x.copy()
        projected = x - self.correction(x)
        return projected - self.correction(projected)


def project_onto_constraints(x: Cochain, c: AffineConstraint) -> Cochain:
    """
    Closest point to ``x`` on the affine set {C x = tau}.

    Returns:
        x - C^T (C C^T)^{-1} (C x - tau), refined once.

    Raises:
        InfeasibleConstraintError: If the constraint is inconsistent.
        InputError: On a dimension mismatch.
    """
    projected = AffineProjector(c)(x)
    tol = getattr(get_settings(), "FABRIC_PROJECTION_TOL", 1e-10)
    residual = c.residual(projected)
    if residual > tol * max(1.0, float(np.linalg.norm(c.target))):
        logger.warning(f"Projection residual {residual:.3e} exceeds tolerance {tol:.1e}")
    return projected


def project_matrix(c: AffineConstraint) -> npt.NDArray[np.float64]:
    """Orthogonal projector onto the null space of C (identity when there are no rows)."""
    if c.q == 0:
        return np.eye(c.m)
    return np.eye(c.m) - c.matrix.T @ np.linalg.solve(c.matrix @ c.matrix.T, c.matrix)
