from typing import Any

import numpy as np
import orjson
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from topofabric.models.constraints import AffineConstraint
from topofabric.models.graph import WeightedGraph
from topofabric.models.topology import PersistenceDiagram

BLOCK_NAMES = ("L", "B", "F", "I")


def default_block_dims(d: int) -> tuple[int, int, int, int]:
    """Split ``d`` into four blocks as evenly as possible, earlier blocks taking the remainder."""
    base, extra = divmod(d, 4)
    return tuple(base + (1 if i < extra else 0) for i in range(4))  # type: ignore[return-value]


class SemanticTensor(BaseModel):
    """Per-vertex state made of four opaque blocks."""

    L: list[float] = Field(default_factory=list)
    B: list[float] = Field(default_factory=list)
    F: list[float] = Field(default_factory=list)
    I: list[float] = Field(default_factory=list)

    @property
    def d(self) -> int:
        return len(self.L) + len(self.B) + len(self.F) + len(self.I)

    def vector(self) -> np.ndarray:
        return np.array([*self.L, *self.B, *self.F, *self.I], dtype=float)

    @classmethod
    def from_vector(
        cls, vector, block_dims: tuple[int, int, int, int] | None = None
    ) -> "SemanticTensor":
        vector = [float(x) for x in vector]
        dims = block_dims or default_block_dims(len(vector))
        if sum(dims) != len(vector):
            raise ValueError(f"block dimensions {dims} do not add up to {len(vector)}")
        bounds = np.cumsum([0, *dims])
        return cls(
            **{name: vector[bounds[i] : bounds[i + 1]] for i, name in enumerate(BLOCK_NAMES)}
        )


class SolveInfo(BaseModel):
    """Outcome of a semantic solve, stored on the solved scene."""

    converged: bool
    iterations: int
    loss: float
    losses: dict[str, float] = Field(default_factory=dict)
    constraint_residual: float = 0.0
    penalized: bool = False
    tol: float = 1e-9


class SceneState(BaseModel):
    """
    Contextual scene graph at one timestamp.

    ``states`` is an (n, d) array in sorted vertex order. ``constraint`` acts on the induced cochain
    x_e = r^T (S_head - S_tail) with readout ``r`` (uniform mean by default). ``transforms``
    holds one d x d relation transform per canonical edge and defaults to identities.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True)

    graph: WeightedGraph
    states: np.ndarray
    constraint: AffineConstraint
    labels: list[str] = Field(default_factory=list)
    timestamp: float = 0.0
    relations: dict[str, list[tuple[Any, Any]]] = Field(default_factory=dict)
    transforms: list[np.ndarray] | None = None
    readout: np.ndarray | None = None
    block_dims: tuple[int, int, int, int] | None = None
    solve_info: SolveInfo | None = None

    @field_validator("states", mode="before")
    @classmethod
    def _states_as_array(cls, value):
        states = np.asarray(value, dtype=float)
        return states[:, None] if states.ndim == 1 else states

    @model_validator(mode="after")
    def _check_consistency(self) -> "SceneState":
        n, m = self.graph.n, self.graph.m
        if self.states.ndim != 2 or self.states.shape[0] != n:
            raise ValueError(f"{self.states.shape[0]} state rows given for {n} vertices")
        if not np.all(np.isfinite(self.states)):
            raise ValueError("states must be finite")
        if self.constraint.q and self.constraint.m != m:
            raise ValueError(f"constraint acts on {self.constraint.m} entries, graph has {m} edges")
        if self.constraint.q == 0 and self.constraint.m != m:
            self.constraint = AffineConstraint.empty(m)
        if self.labels and len(self.labels) != n:
            raise ValueError(f"{len(self.labels)} labels given for {n} vertices")
        if not self.labels:
            self.labels = ["object"] * n

        d = self.d
        if self.transforms is None:
            self.transforms = [np.eye(d) for _ in range(m)]
        self.transforms = [np.asarray(t, dtype=float).reshape(d, d) for t in self.transforms]
        if len(self.transforms) != m:
            raise ValueError(f"{len(self.transforms)} transforms given for {m} edges")
        if self.readout is None:
            self.readout = np.full(d, 1.0 / d)
        self.readout = np.asarray(self.readout, dtype=float).reshape(-1)
        if self.readout.shape != (d,):
            raise ValueError(f"readout has {self.readout.size} entries, states have {d}")
        if self.block_dims is None:
            self.block_dims = default_block_dims(d)
        if sum(self.block_dims) != d:
            raise ValueError(f"block dimensions {self.block_dims} do not add up to {d}")
        return self

    @property
    def d(self) -> int:
        return int(self.states.shape[1])

    def tensors(self) -> list[SemanticTensor]:
        return [SemanticTensor.from_vector(row, self.block_dims) for row in self.states]

    def cochain_operator(self) -> np.ndarray:
        """Matrix M (m x n d) mapping stacked states to the induced cochain."""
        d = self.d
        index = self.graph.vertex_index()
        operator = np.zeros((self.graph.m, self.graph.n * d))
        for k, edge in enumerate(self.graph.edges):
            i, j = index[edge.u] * d, index[edge.v] * d
            operator[k, i : i + d] = -self.readout
            operator[k, j : j + d] = self.readout
        return operator

    def induced_cochain(self) -> np.ndarray:
        return self.cochain_operator() @ self.states.reshape(-1)

    def with_states(self, states: np.ndarray, solve_info: SolveInfo | None = None) -> "SceneState":
        update = {"states": np.asarray(states, dtype=float), "solve_info": solve_info}
        return self.model_copy(update=update)


class ReasoningTrace(BaseModel):
    """Packaged output of a converged semantic solve, consumed by the control layer."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    timestamp: float
    edges: list[tuple[int, int]]
    states: np.ndarray
    interactions: np.ndarray = Field(description="One (d + 1)-vector per edge")
    constraint_matrix: np.ndarray
    constraint_target: np.ndarray
    diagrams: dict[int, PersistenceDiagram]
    loss: float
    converged: bool
    predicted: bool = False

    def payload(self) -> dict:
        return {
            "timestamp": self.timestamp,
            "edges": [list(e) for e in self.edges],
            "states": self.states,
            "interactions": self.interactions,
            "constraint": {"C": self.constraint_matrix, "tau": self.constraint_target},
            "diagrams": {str(k): d.to_payload() for k, d in sorted(self.diagrams.items())},
            "loss": self.loss,
            "converged": self.converged,
            "predicted": self.predicted,
        }

    def to_json(self) -> bytes:
        return orjson.dumps(
            self.payload(), option=orjson.OPT_SORT_KEYS | orjson.OPT_SERIALIZE_NUMPY
        )


class SemanticMap(BaseModel):
    """Labelled 3-D points."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    points: np.ndarray
    classes: list[str]

    @field_validator("points", mode="before")
    @classmethod
    def _points_as_array(cls, value):
        return np.asarray(value, dtype=float).reshape(-1, 3)

    @model_validator(mode="after")
    def _check_lengths(self) -> "SemanticMap":
        if len(self.classes) != self.points.shape[0]:
            raise ValueError(f"{self.points.shape[0]} points but {len(self.classes)} classes")
        return self


class Atom(BaseModel):
    """Predicate applied to variables (in rules) or entities (in facts)."""

    model_config = ConfigDict(frozen=True)

    predicate: str
    args: tuple[str, ...]

    def __str__(self) -> str:
        return f"{self.predicate}({', '.join(self.args)})"


class OntologyRule(BaseModel):
    """Horn rule ``body_1 & ... & body_k -> head`` with a unary head."""

    body: list[Atom]
    head: Atom

    @model_validator(mode="after")
    def _range_restricted(self) -> "OntologyRule":
        if not self.body:
            raise ValueError("rule body must not be empty")
        if len(self.head.args) != 1:
            raise ValueError(f"rule head {self.head} must be unary")
        if any(len(atom.args) not in (1, 2) for atom in self.body):
            raise ValueError("body atoms must be unary class tests or binary relation tests")
        bound = {arg for atom in self.body for arg in atom.args}
        missing = set(self.head.args) - bound
        if missing:
            raise ValueError(f"head variables {sorted(missing)} do not appear in the body")
        return self

    def __str__(self) -> str:
        return " & ".join(str(a) for a in self.body) + f" -> {self.head}"


class FusionResult(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    rotation: np.ndarray
    translation: np.ndarray
    correspondences: list[tuple[int, int]]
    objective: float
    geometric_cost: float
    mismatches: int
    rounds: int


class TrackingReport(BaseModel):
    errors: list[float]
    cumulative: float
    bound: float
    horizon: float
    violated: bool


class LossWeights(BaseModel):
    """Coefficients of the semantic loss terms."""

    data: float = Field(default=1.0, ge=0, description="Fidelity to observed states")
    consensus: float = Field(default=1.0, ge=0)
    connection: float = Field(default=1.0, ge=0)
    context: float = Field(default=1.0, ge=0)
