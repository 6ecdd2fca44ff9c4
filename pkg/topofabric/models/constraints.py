import csv
import logging
import os
from collections.abc import Callable

import numpy as np
import numpy.typing as npt
from pydantic import BaseModel, ConfigDict, Field, model_validator

logger = logging.getLogger(__name__)

# least-squares residual above which Cx = tau is treated as inconsistent
CONSISTENCY_TOL = 1e-9


class AffineConstraint(BaseModel):
    """
    Affine set {x : C x = tau} over a cochain.

    Full row rank is required. A system that has no solution at all is still accepted but marked
    ``feasible=False`` so that callers can route it to the exact-penalty path.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True)

    matrix: np.ndarray = Field(description="q x m constraint matrix C")
    target: np.ndarray = Field(description="q-vector tau")
    feasible: bool = Field(default=True, description="False when C x = tau has no solution")

    @model_validator(mode="before")
    @classmethod
    def _as_arrays(cls, data):
        if isinstance(data, dict):
            data = dict(data)
            matrix = np.asarray(data.get("matrix", []), dtype=float)
            target = np.asarray(data.get("target", []), dtype=float).reshape(-1)
            if matrix.ndim == 1:
                matrix = matrix.reshape(len(target), -1) if len(target) else matrix.reshape(0, 0)
            data["matrix"] = matrix
            data["target"] = target
        return data

    @model_validator(mode="after")
    def _check_rank(self) -> "AffineConstraint":
        if self.matrix.ndim != 2:
            raise ValueError("constraint matrix must be two-dimensional")
        if self.matrix.shape[0] != self.target.shape[0]:
            raise ValueError(
                f"constraint has {self.matrix.shape[0]} rows but {self.target.shape[0]} targets"
            )
        if not (np.all(np.isfinite(self.matrix)) and np.all(np.isfinite(self.target))):
            raise ValueError("constraint entries must be finite")
        if self.q == 0:
            self.feasible = True
            return self

        rank = np.linalg.matrix_rank(self.matrix)
        if rank == self.q:
            self.feasible = True
            return self

        solution, *_ = np.linalg.lstsq(self.matrix, self.target, rcond=None)
        residual = float(np.linalg.norm(self.matrix @ solution - self.target))
        if residual <= CONSISTENCY_TOL * max(1.0, float(np.linalg.norm(self.target))):
            raise ValueError(
                f"constraint matrix is rank deficient (rank {rank} < {self.q} rows) "
                f"but consistent; drop the redundant rows"
            )
        logger.warning(
            f"Inconsistent constraint (rank {rank} < {self.q}, least-squares residual "
            f"{residual:.3e}); only the exact-penalty path can use it"
        )
        self.feasible = False
        return self

    @property
    def q(self) -> int:
        return int(self.matrix.shape[0])

    @property
    def m(self) -> int:
        return int(self.matrix.shape[1])

    def residual(self, x: npt.NDArray[np.float64]) -> float:
        if self.q == 0:
            return 0.0
        return float(np.linalg.norm(self.matrix @ x - self.target))

    @classmethod
    def empty(cls, m: int) -> "AffineConstraint":
        return cls(matrix=np.zeros((0, m)), target=np.zeros(0))


class EnergySpec(BaseModel):
    """
    Smooth convex energy with known smoothness ``L`` and strong-convexity modulus ``mu``.

    ``mu`` may be zero for merely convex levels of a lexicographic hierarchy; solvers that rely on
    strong convexity check it themselves.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True)

    value: Callable[[npt.NDArray[np.float64]], float]
    gradient: Callable[[npt.NDArray[np.float64]], npt.NDArray[np.float64]]
    L: float = Field(gt=0, description="Lipschitz constant of the gradient")
    mu: float = Field(default=0.0, ge=0, description="Strong-convexity modulus")
    hessian: np.ndarray | None = Field(
        default=None, description="Constant Hessian when the energy is quadratic"
    )
    linear: np.ndarray | None = Field(
        default=None, description="Linear coefficient when the energy is quadratic"
    )

    @model_validator(mode="after")
    def _check_moduli(self) -> "EnergySpec":
        if self.mu > self.L * (1 + 1e-12):
            raise ValueError(f"strong convexity mu={self.mu} exceeds smoothness L={self.L}")
        return self

    @classmethod
    def quadratic(
        cls,
        Q: npt.ArrayLike,
        c: npt.ArrayLike | None = None,
        const: float = 0.0,
    ) -> "EnergySpec":
        """Energy 0.5 x^T Q x + c^T x + const with L and mu read off the spectrum of Q."""
        Q = np.asarray(Q, dtype=float)
        Q = 0.5 * (Q + Q.T)
        c = np.zeros(Q.shape[0]) if c is None else np.asarray(c, dtype=float)
        eigenvalues = np.linalg.eigvalsh(Q)
        if eigenvalues[0] < -1e-12 * max(1.0, abs(eigenvalues[-1])):
            raise ValueError("quadratic energy needs a positive semidefinite matrix")
        L = max(float(eigenvalues[-1]), 1e-12)
        mu = min(max(float(eigenvalues[0]), 0.0), L)
        return cls(
            value=lambda x: float(0.5 * x @ Q @ x + c @ x + const),
            gradient=lambda x: Q @ x + c,
            L=L,
            mu=mu,
            hessian=Q,
            linear=c,
        )

    @classmethod
    def zero(cls, m: int) -> "EnergySpec":
        return cls.quadratic(np.zeros((m, m)))

    def check_gradient(
        self,
        x: npt.NDArray[np.float64],
        rel_tol: float = 1e-5,
        step: float = 1e-6,
    ) -> bool:
        """Compare the analytic gradient with central finite differences at ``x``."""
        x = np.asarray(x, dtype=float)
        analytic = np.asarray(self.gradient(x), dtype=float)
        numeric = np.empty_like(x)
        for k in range(x.size):
            offset = np.zeros_like(x)
            offset[k] = step
            numeric[k] = (self.value(x + offset) - self.value(x - offset)) / (2 * step)
        scale = max(1.0, float(np.linalg.norm(analytic)))
        return bool(np.linalg.norm(analytic - numeric) <= rel_tol * scale)


class IterationReport(BaseModel):
    """Per-step record of a projection-consensus run."""

    iterates: list[float] = Field(default_factory=list, description="Distance to the limit")
    constraint_residuals: list[float] = Field(default_factory=list)
    step_norms: list[float] = Field(default_factory=list)
    contraction_estimate: float = Field(default=0.0)
    theoretical_rate: float = Field(default=1.0)
    converged: bool = Field(default=False)

    @property
    def iterations(self) -> int:
        return len(self.step_norms)

    def to_csv(self, path: str) -> str:
        directory = os.path.dirname(path)
        if directory:
            os.makedirs(directory, exist_ok=True)
        with open(path, "w", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(["iteration", "residual", "distance"])
            for k, (residual, distance) in enumerate(
                zip(self.constraint_residuals, self.iterates, strict=True), start=1
            ):
                writer.writerow([k, format(residual, ".12g"), format(distance, ".12g")])
        return path
