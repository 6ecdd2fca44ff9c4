import csv
import math
from pathlib import Path
from typing import Literal

import numpy as np
import numpy.typing as npt
from numpy.polynomial import polynomial as P
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

DEFAULT_PLANT_NUM = (1.0,)
DEFAULT_PLANT_DEN = (0.0, 1.0, 1.0)
DEFAULT_DESIGN_MARGIN = 30.0


class RationalTF(BaseModel):
    """
    Rational transfer function num(s) / den(s).

    Coefficients are in ascending powers of s, so ``RationalTF(num=[1], den=[0, 1, 1])`` is
    1 / (s^2 + s). Zero coefficients of the highest powers are trimmed.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    num: np.ndarray
    den: np.ndarray

    @field_validator("num", "den", mode="before")
    @classmethod
    def _as_array(cls, value):
        array = np.atleast_1d(np.asarray(value, dtype=float)).reshape(-1)
        if array.size == 0:
            raise ValueError("coefficient list must not be empty")
        if not np.all(np.isfinite(array)):
            raise ValueError("coefficients must be finite")
        return P.polytrim(array)

    @field_validator("den")
    @classmethod
    def _nonzero_denominator(cls, value: np.ndarray) -> np.ndarray:
        if value.size == 1 and value[0] == 0:
            raise ValueError("denominator must not be identically zero")
        return value

    @classmethod
    def gain(cls, k: float) -> "RationalTF":
        return cls(num=[k], den=[1.0])

    @classmethod
    def from_descending(cls, num: npt.ArrayLike, den: npt.ArrayLike) -> "RationalTF":
        """Build from scipy-style coefficient lists (highest power first)."""
        return cls(num=np.asarray(num, dtype=float)[::-1], den=np.asarray(den, dtype=float)[::-1])

    def descending(self) -> tuple[np.ndarray, np.ndarray]:
        return self.num[::-1].copy(), self.den[::-1].copy()

    @property
    def is_proper(self) -> bool:
        return self.num.size <= self.den.size

    def __call__(self, s: complex | npt.NDArray[np.complex128]):
        return P.polyval(s, self.num) / P.polyval(s, self.den)

    def __mul__(self, other: "RationalTF") -> "RationalTF":
        return RationalTF(num=P.polymul(self.num, other.num), den=P.polymul(self.den, other.den))

    def scaled(self, k: float) -> "RationalTF":
        return RationalTF(num=k * self.num, den=self.den)

    def poles(self) -> np.ndarray:
        return P.polyroots(self.den) if self.den.size > 1 else np.zeros(0, dtype=complex)

    def dc_gain(self) -> float:
        if self.den[0] == 0:
            return math.inf
        return float(self.num[0] / self.den[0])

    def high_frequency_gain(self) -> float:
        if self.num.size < self.den.size:
            return 0.0
        if self.num.size > self.den.size:
            return math.inf
        return float(abs(self.num[-1] / self.den[-1]))

    def to_payload(self) -> dict:
        return {"num": self.num.tolist(), "den": self.den.tolist()}


class SmithPredictor(BaseModel):
    """
    Classical Smith predictor around ``controller`` with an internal plant ``model`` and
    ``model_delay``: C / (1 + C G_model (1 - exp(-s model_delay))).
    """

    model_config = ConfigDict(frozen=True)

    controller: RationalTF
    model: RationalTF
    model_delay: float = Field(ge=0, allow_inf_nan=False)

    def __call__(self, s):
        c = self.controller(s)
        return c / (1.0 + c * self.model(s) * (1.0 - np.exp(-s * self.model_delay)))


Compensator = RationalTF | SmithPredictor


class LoopModel(BaseModel):
    """Open loop C(s) G(s) exp(-s delay) closed by unit negative feedback."""

    model_config = ConfigDict(frozen=True)

    plant: RationalTF
    compensator: Compensator = Field(default_factory=lambda: RationalTF.gain(1.0))
    delay: float = Field(default=0.0, ge=0, allow_inf_nan=False)

    def delay_free(self, s):
        return self.compensator(s) * self.plant(s)

    def __call__(self, s):
        return self.delay_free(s) * np.exp(-s * self.delay)

    def with_delay(self, delay: float) -> "LoopModel":
        return self.model_copy(update={"delay": float(delay)})


class MarginReport(BaseModel):
    """Stability margins at the lowest gain crossover; all None when there is no crossover."""

    has_crossover: bool
    crossover_rad: float | None = None
    crossover_hz: float | None = None
    phase_margin: float | None = Field(default=None, description="Degrees")
    gain_margin: float | None = Field(
        default=None, description="Ratio; inf without a -180 deg crossing"
    )
    delay_margin: float | None = Field(default=None, description="Seconds")

    def row(self) -> dict:
        return self.model_dump()


class SimResult(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    time: np.ndarray
    reference: np.ndarray
    output: np.ndarray
    control: np.ndarray
    growth_ratio: float
    bounded: bool
    delay_samples: int

    @model_validator(mode="after")
    def _check_lengths(self) -> "SimResult":
        sizes = {a.size for a in (self.time, self.reference, self.output, self.control)}
        if len(sizes) != 1:
            raise ValueError("time, reference, output and control must have equal lengths")
        return self

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(["t", "reference", "output", "control"])
            for row in zip(self.time, self.reference, self.output, self.control, strict=True):
                writer.writerow([format(float(v), ".12g") for v in row])


class OrtsfConfig(BaseModel):
    """Loop and compensation settings of the delay-robust control transform."""

    plant: RationalTF = Field(
        default_factory=lambda: RationalTF(num=DEFAULT_PLANT_NUM, den=DEFAULT_PLANT_DEN)
    )
    design_margin: float = Field(
        default=DEFAULT_DESIGN_MARGIN, gt=0, lt=90, description="Phase margin the gain is sized for"
    )
    design_gain: float | None = Field(
        default=None, gt=0, description="Loop gain K; sized from design_margin when unset"
    )
    crossover_hz: float | None = Field(
        default=None, gt=0, description="Crossover used for lead placement; measured when unset"
    )
    delay: float = Field(default=0.052, ge=0, allow_inf_nan=False)
    delay_threshold: float = Field(
        default=0.2, gt=0, description="Delays above this switch to the Smith predictor"
    )
    max_compensation: float = Field(default=60.0, gt=0, lt=90, description="Degrees")
    sampling_period: float | None = Field(default=None, gt=0)
    model_gain_error: float = Field(
        default=0.0, gt=-1, description="Relative gain error of the Smith internal model"
    )
    model_delay_error: float = Field(
        default=0.0, ge=-1, description="Relative delay error of the Smith internal model"
    )
    output_weights: list[list[float]] | None = Field(
        default=None, description="One row of per-edge weights per output channel"
    )
    phi_safe: float = Field(default=20.0, description="Minimum acceptable phase margin (deg)")
    sigma_buffer: float = Field(default=10.0, ge=0, description="Safety buffer on phi_safe (deg)")


class OrtsfCommand(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    command: np.ndarray = Field(description="Last control output, one entry per channel")
    commands: np.ndarray = Field(description="Full sampled output, shape (samples, channels)")
    references: np.ndarray = Field(description="Sampled reference, shape (samples, channels)")
    branch: Literal["lead-lag", "smith"]
    compensation: float = Field(description="Phase lead added at crossover (deg)")
    crossover_hz: float
    lipschitz_bound: float
    held: bool = Field(description="True when some prediction fell back to zero-order hold")


class EnvelopeReport(BaseModel):
    control_stable: bool
    topology_stable: bool
    context_consistent: bool

    @property
    def safe(self) -> bool:
        return self.control_stable and self.topology_stable and self.context_consistent
