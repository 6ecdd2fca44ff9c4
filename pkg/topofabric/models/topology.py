import math

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class Filtration(BaseModel):
    """Edge values of a sublevel-set filtration; every vertex enters at ``vertex_value``."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    edge_values: np.ndarray = Field(description="One value per canonical edge")
    vertex_value: float = Field(default=0.0, allow_inf_nan=False)

    @field_validator("edge_values", mode="before")
    @classmethod
    def _as_array(cls, value):
        return np.asarray(value, dtype=float).reshape(-1)

    @model_validator(mode="after")
    def _check_finite(self) -> "Filtration":
        if not np.all(np.isfinite(self.edge_values)):
            raise ValueError("filtration values must be finite")
        return self

    def entry_values(self) -> np.ndarray:
        """Value at which each edge enters (never before its endpoints)."""
        return np.maximum(self.edge_values, self.vertex_value)

    def sup_distance(self, other: "Filtration") -> float:
        if other.edge_values.shape != self.edge_values.shape:
            raise ValueError("filtrations cover different edge sets")
        if self.edge_values.size == 0:
            return 0.0
        return float(np.max(np.abs(self.edge_values - other.edge_values)))


class PersistenceDiagram(BaseModel):
    """Multiset of ``(birth, death)`` pairs of one homological dimension; death may be inf."""

    dim: int = Field(ge=0, le=1)
    points: list[tuple[float, float]] = Field(default_factory=list)

    @model_validator(mode="after")
    def _check_points(self) -> "PersistenceDiagram":
        for birth, death in self.points:
            if not math.isfinite(birth):
                raise ValueError("births must be finite")
            if death < birth:
                raise ValueError(f"point ({birth}, {death}) dies before it is born")
        return self

    def finite(self) -> list[tuple[float, float]]:
        return [p for p in self.points if math.isfinite(p[1])]

    def essential(self) -> list[float]:
        return sorted(b for b, d in self.points if not math.isfinite(d))

    def to_payload(self) -> dict:
        return {
            "dim": self.dim,
            "points": [[b, d] for b, d in sorted(self.finite())],
            "essential": self.essential(),
        }


class ScalePolicy(BaseModel):
    """Smoothing scales with weights for multi-scale analysis."""

    scales: list[float] = Field(default_factory=lambda: [0.25, 0.5, 1.0, 2.0])
    weights: list[float] | None = Field(default=None, description="Defaults to uniform")

    @model_validator(mode="after")
    def _check_policy(self) -> "ScalePolicy":
        if not self.scales:
            raise ValueError("at least one scale is required")
        if any(s < 0 for s in self.scales):
            raise ValueError("scales must be non-negative")
        if any(b <= a for a, b in zip(self.scales, self.scales[1:], strict=False)):
            raise ValueError("scales must be strictly ascending")
        if self.weights is None:
            self.weights = [1.0 / len(self.scales)] * len(self.scales)
        if len(self.weights) != len(self.scales):
            raise ValueError("one weight per scale is required")
        if any(w <= 0 for w in self.weights):
            raise ValueError("scale weights must be positive")
        if abs(sum(self.weights) - 1.0) > 1e-9:
            raise ValueError(f"scale weights sum to {sum(self.weights)}, expected 1")
        return self


class SurgeryLog(BaseModel):
    removed_edges: list[tuple[int, int]] = Field(default_factory=list)
    restored_edges: list[tuple[int, int]] = Field(default_factory=list)
    rejected_edges: list[tuple[int, int]] = Field(default_factory=list)
    cycles_examined: int = 0
    cycles_validated: int = 0
    variance_before: float = 0.0
    variance_after: float = 0.0
    mean_before: float = 0.0
    mean_after: float = 0.0
    connectivity_before: float = 0.0
    connectivity_after: float = 0.0


class TailEstimate(BaseModel):
    """Monte-Carlo frequency of {d_PH > eps} against the Gaussian tail bound."""

    eps: list[float]
    frequencies: list[float]
    standard_errors: list[float]
    bounds: list[float]
    trials: int

    def satisfied(self, sigmas: float = 3.0) -> list[bool]:
        return [
            freq <= bound + sigmas * se
            for freq, bound, se in zip(
                self.frequencies, self.bounds, self.standard_errors, strict=True
            )
        ]


class MultiscaleResult(BaseModel):
    """Per-scale diagrams and, when two filtrations are compared, the bottleneck drift."""

    scales: list[float]
    diagrams: list[dict[int, PersistenceDiagram]]
    drifts: list[float] = Field(default_factory=list)
    sup_drift: float | None = None
    sup_input_change: float | None = None
