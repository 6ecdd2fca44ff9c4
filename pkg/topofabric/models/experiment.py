import csv
import math
from pathlib import Path
from typing import ClassVar, Literal

import orjson
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from topofabric.exceptions import SchemaError
from topofabric.models.control import OrtsfConfig
from topofabric.models.scene import LossWeights
from topofabric.models.topology import ScalePolicy

Mode = Literal["pipeline", "ph-decay", "delay-sweep", "surgery-demo", "unified-bound"]
Method = Literal["ortsf", "smith", "direct"]


def format_value(value) -> str:
    """Stable CSV text: floats with 12 significant digits, None and NaN as empty cells."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return "" if math.isnan(value) else format(value, ".12g")
    return str(value)


def write_rows(path: str | Path, header: list[str], rows: list[list]) -> str:
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_value(v) for v in row])
    return str(path)


def validation_problems(error: ValidationError, prefix: str = "") -> list[tuple[str, str]]:
    """Pydantic errors as ``(json_pointer, message)`` pairs."""
    problems = []
    for item in error.errors():
        pointer = prefix + "".join(f"/{part}" for part in item["loc"])
        problems.append((pointer or "/", item["msg"]))
    return problems


class SolverSection(BaseModel):
    eta: float | None = Field(default=None, gt=0, description="Step size; 1 / ||Q|| when unset")
    tol: float = Field(default=1e-9, gt=0)
    k_max: int = Field(default=10_000, gt=0)
    rho: float = Field(default=10.0, gt=0, description="Exact-penalty weight")
    eps_lex: float = Field(default=1e-8, ge=0, description="Slack of lexicographic levels")
    weights: LossWeights = Field(default_factory=LossWeights)


class TopologySection(BaseModel):
    alpha: float = Field(default=1.0, ge=0, description="Weight of semantic distances")
    beta: float = Field(default=0.0, ge=0, description="Weight of |Forman-Ricci curvature|")
    dimension_weights: tuple[float, float] = (0.5, 0.5)
    scales: ScalePolicy = Field(default_factory=ScalePolicy)

    @model_validator(mode="after")
    def _check_weights(self) -> "TopologySection":
        if any(w < 0 for w in self.dimension_weights) or not math.isclose(
            sum(self.dimension_weights), 1.0
        ):
            raise ValueError("dimension weights must be non-negative and sum to 1")
        return self


class PipelineSection(BaseModel):
    loss_threshold: float = Field(default=1.0, gt=0, description="Verification: L_total < this")
    L_context: float = Field(default=1.0, gt=0)
    eps_transform: float = Field(default=0.5, gt=0, description="Context distance budget")
    residual_tol: float = Field(default=1e-8, gt=0)
    eps_conf: float = Field(default=0.05, gt=0, lt=1)
    L_c: float = Field(default=1.0, gt=0)
    sigma: float = Field(default=0.0, ge=0, description="Sensor noise level")
    hierarchy: bool = Field(
        default=True, description="Resolve constraint violations hierarchically"
    )
    history: int = Field(default=8, ge=2, description="Traces kept for the control transform")
    horizon: float = Field(default=60.0, gt=0, description="Stability simulation length (s)")


class PhDecaySection(BaseModel):
    vertices: int = Field(default=8, ge=3)
    extra_edges: int = Field(default=3, ge=0)
    d: int = Field(default=4, ge=1)
    amplitude: float = Field(
        default=0.1, ge=0, description="Initial offset from the constrained optimum"
    )
    noise: float = Field(default=0.2, ge=0, description="Std of the stochastic gradient noise")
    repeats: int = Field(default=8, ge=1, description="Independent runs averaged per checkpoint")
    k0: int = Field(default=10, ge=1, description="Step offset; raised to ||Q|| / mu when smaller")
    iterations: int = Field(default=4000, ge=2)
    checkpoints: int = Field(default=60, description="Log-spaced lags recorded")
    burn_in: int = Field(default=200, ge=0, description="First iteration used by the fit")

    @model_validator(mode="after")
    def _check_points(self) -> "PhDecaySection":
        if self.checkpoints < 50:
            raise ValueError(f"a fit needs at least 50 checkpoints, got {self.checkpoints}")
        return self


class DelaySweepSection(BaseModel):
    delays: list[float] = Field(
        default_factory=lambda: [round(0.01 * k, 6) for k in range(41)],
        description="Delays (s)",
    )
    methods: list[Method] = Field(default_factory=lambda: ["ortsf", "smith", "direct"])
    workers: int = Field(default=4, ge=1)


class SurgerySection(BaseModel):
    eps_neck: float = Field(default=0.5, gt=0)
    z_threshold: float = Field(default=2.0, gt=0)


class BoundSection(BaseModel):
    """Constants of the unified stability bound; unset ones must come from the config."""

    C1: list[float] | None = Field(default=None, description="C_{1,k} for k = 0, 1")
    C2: list[float] | None = Field(default=None, description="C_{2,k} for k = 0, 1")
    kappa: float | None = Field(default=None, gt=0, description="sqrt(m) of the graph when unset")
    L_ortsf: float | None = Field(default=None, gt=0)
    C_sem: float = Field(default=1.0, gt=0)
    L_context: float | None = Field(default=None, ge=0)
    eps_conf: float | None = Field(default=None, gt=0, lt=1)
    L_c: float = Field(default=1.0, gt=0)
    sigma: float | None = Field(default=None, ge=0)


class ExperimentConfig(BaseModel):
    """One experiment run; every section has defaults so ``{}`` is a valid document."""

    model_config = ConfigDict(extra="forbid")

    mode: Mode = "pipeline"
    input: str | None = None
    out: str = "out"
    seed: int = Field(default=0, ge=0)
    solver: SolverSection = Field(default_factory=SolverSection)
    topology: TopologySection = Field(default_factory=TopologySection)
    control: OrtsfConfig = Field(default_factory=OrtsfConfig)
    pipeline: PipelineSection = Field(default_factory=PipelineSection)
    ph_decay: PhDecaySection = Field(default_factory=PhDecaySection)
    delay_sweep: DelaySweepSection = Field(default_factory=DelaySweepSection)
    surgery: SurgerySection = Field(default_factory=SurgerySection)
    bound: BoundSection = Field(default_factory=BoundSection)

    @classmethod
    def from_json(cls, data: bytes | str, source: str | None = None) -> "ExperimentConfig":
        """
        Raises:
            SchemaError: On malformed JSON or any invalid field, all problems at once.
        """
        try:
            document = orjson.loads(data) if data else {}
        except orjson.JSONDecodeError as e:
            raise SchemaError([("/", f"invalid JSON: {e}")], source=source) from e
        try:
            return cls.model_validate(document)
        except ValidationError as e:
            raise SchemaError(validation_problems(e), source=source) from e

    @classmethod
    def from_file(cls, path: str | Path) -> "ExperimentConfig":
        return cls.from_json(Path(path).read_bytes(), source=str(path))


class StepRecord(BaseModel):
    """Verification results for one processed timestamp."""

    t: float
    edges: int = 0
    dt: float | None = None
    total_loss: float | None = None
    context_loss: float | None = None
    ricci_loss: float | None = None
    constraint_residual: float | None = None
    ph_distance: float | None = Field(default=None, description="d_PH to the previous step")
    multiscale_drift: float | None = None
    context_distance: float | None = Field(
        default=None, description="Solved scene against the scene rebuilt from the predicted trace"
    )
    context_bound: float | None = None
    phase_margin: float | None = None
    command: float | None = None
    command_delta: float | None = None
    output: float | None = None
    converged: bool = False
    penalized: bool = False
    hierarchical: bool = False
    loss_violation: bool = False
    margin_violation: bool = False
    context_violation: bool = False
    constraint_violation: bool = False
    context_bound_violation: bool = False
    unbounded: bool = False
    error: str | None = None

    FLAGS: ClassVar[tuple[str, ...]] = (
        "loss_violation",
        "margin_violation",
        "context_violation",
        "constraint_violation",
        "context_bound_violation",
        "unbounded",
    )

    @property
    def violated(self) -> bool:
        return self.error is not None or any(getattr(self, flag) for flag in self.FLAGS)


class RunReport(BaseModel):
    records: list[StepRecord] = Field(default_factory=list)

    @staticmethod
    def columns() -> list[str]:
        return list(StepRecord.model_fields)

    def to_csv(self, path: str | Path) -> str:
        columns = self.columns()
        return write_rows(path, columns, [[getattr(r, c) for c in columns] for r in self.records])


class DecayTable(BaseModel):
    """d_PH(G(k), G(k + lag_k)) at log-spaced iterations, with a log-log tail fit."""

    iterations: list[int]
    lags: list[int]
    distances: list[float]
    slope: float | None = None
    intercept: float | None = None
    r_squared: float | None = None
    fitted: bool = False
    note: str | None = None

    @property
    def final_distance(self) -> float:
        return self.distances[-1] if self.distances else math.nan

    def to_csv(self, path: str | Path) -> str:
        rows = [list(r) for r in zip(self.iterations, self.lags, self.distances, strict=True)]
        return write_rows(path, ["iteration", "lag", "ph_distance"], rows)


class SweepResult(BaseModel):
    """Phase margin of every method at every delay."""

    delays: list[float]
    methods: list[str]
    margins: dict[str, list[float | None]]
    first_unsafe: dict[str, float | None]
    phi_safe: float
    crossover_hz: float

    def to_csv(self, path: str | Path) -> str:
        rows = [
            [delay, *(self.margins[m][i] for m in self.methods)]
            for i, delay in enumerate(self.delays)
        ]
        return write_rows(path, ["delay", *self.methods], rows)


class BoundRecord(BaseModel):
    t: float
    ph_term: float
    multiscale_term: float
    command_term: float
    lhs: float
    topology_rhs: float
    control_rhs: float
    context_rhs: float
    confidence_rhs: float
    rhs: float
    satisfied: bool


class BoundReport(BaseModel):
    records: list[BoundRecord] = Field(default_factory=list)

    def to_csv(self, path: str | Path) -> str:
        columns = list(BoundRecord.model_fields)
        return write_rows(path, columns, [[getattr(r, c) for c in columns] for r in self.records])
