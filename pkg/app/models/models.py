import math
from pathlib import Path
from typing import Annotated, Dict, List, Literal, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from app.core.config import config

# Angle comparisons for protocol pulses
_ANGLE_TOL = 1e-12


def is_pi(angle: float) -> bool:
    return math.isclose(angle, math.pi, abs_tol=_ANGLE_TOL)


def is_half_pi(angle: float) -> bool:
    return math.isclose(angle, math.pi / 2, abs_tol=_ANGLE_TOL)


class ChiralCoupling(BaseModel):
    """Cyclic coupling strength kappa on the ordered spin triple (p, q, r), 1-based."""

    model_config = ConfigDict(frozen=True)

    kappa: float = Field(gt=0)
    triple: Tuple[int, int, int] = (1, 2, 3)

    @field_validator("triple")
    @classmethod
    def _distinct_positive(cls, triple: Tuple[int, int, int]) -> Tuple[int, int, int]:
        if len(set(triple)) != 3:
            raise ValueError(f"triple spins must be pairwise distinct, got {triple}")
        if min(triple) < 1:
            raise ValueError(f"spin indices are 1-based, got {triple}")
        return triple


class PulseOp(BaseModel):
    """Ideal single-spin rotation exp(-i angle (cos(phase) sx + sin(phase) sy) / 2)."""

    model_config = ConfigDict(frozen=True)

    target: int = Field(ge=1)
    angle: float
    # azimuth of the rotation axis in the equatorial plane, 0 is the x axis
    phase: float = 0.0


class PulseStep(PulseOp):
    kind: Literal["pulse"] = "pulse"

    def as_pulse(self) -> PulseOp:
        return PulseOp(target=self.target, angle=self.angle, phase=self.phase)

    def describe(self) -> str:
        label = "pi" if is_pi(self.angle) else "pi/2" if is_half_pi(self.angle) else f"{self.angle:.6g} rad"
        axis = "" if self.phase == 0.0 else f" (axis phase {self.phase:.6g})"
        return f"Pulse({self.target}, {label}){axis}"


class InteractStep(BaseModel):
    """Chiral interaction on a consecutive triple for `periods` rotation steps T."""

    model_config = ConfigDict(frozen=True)

    kind: Literal["interact"] = "interact"
    triple: Tuple[int, int, int]
    periods: float = Field(gt=0)

    @field_validator("triple")
    @classmethod
    def _consecutive(cls, triple: Tuple[int, int, int]) -> Tuple[int, int, int]:
        p, q, r = triple
        if p < 1 or p % 2 != 1 or (q, r) != (p + 1, p + 2):
            raise ValueError(f"interaction triples must be (2k+1, 2k+2, 2k+3), got {triple}")
        return triple

    def describe(self) -> str:
        p, q, r = self.triple
        return f"Interact(({p},{q},{r}), {self.periods:g}T)"


ScheduleStep = Annotated[Union[PulseStep, InteractStep], Field(discriminator="kind")]


class Schedule(BaseModel):
    m_spins: int = Field(ge=3)
    steps: List[ScheduleStep]

    @model_validator(mode="after")
    def _protocol_shape(self) -> "Schedule":
        if self.m_spins % 2 != 1:
            raise ValueError(f"the zipper needs an odd number of spins, got {self.m_spins}")
        n = (self.m_spins - 1) // 2
        for step in self.steps:
            spins = (step.target,) if isinstance(step, PulseStep) else step.triple
            if max(spins) > self.m_spins:
                raise ValueError(f"{step.describe()} addresses a spin outside the {self.m_spins}-spin register")
        counts = self.pulse_counts()
        if counts["pi"] != 2 * n or counts["half_pi"] != 1:
            raise ValueError(f"expected {2 * n} pi pulses and one pi/2 pulse, got {counts}")
        interacts = sum(isinstance(step, InteractStep) for step in self.steps)
        if interacts != n:
            raise ValueError(f"expected {n} interaction steps, got {interacts}")
        return self

    def pulse_counts(self) -> Dict[str, int]:
        pulses = [step for step in self.steps if isinstance(step, PulseStep)]
        return {
            "pi": sum(is_pi(step.angle) for step in pulses),
            "half_pi": sum(is_half_pi(step.angle) for step in pulses),
        }

    def describe(self) -> List[str]:
        return [f"{i:3d}  {step.describe()}" for i, step in enumerate(self.steps, start=1)]


class TrajectoryEntry(BaseModel):
    step_index: int
    step_kind: Literal["pulse", "interact"]
    description: str
    target_or_triple: str
    duration: float
    target_ket: Optional[str] = None
    fidelity_to_target: Optional[float] = Field(default=None, ge=0.0, le=1.0)
    fidelity_to_ghz: float = Field(ge=0.0, le=1.0)
    populations: Optional[List[float]] = None


class TrajectoryRecord(BaseModel):
    m_spins: int
    kappa: float
    rotation_period: float
    pulse_counts: Dict[str, int]
    entries: List[TrajectoryEntry] = []
    final_fidelity_to_ghz: Optional[float] = None
    # amplitude(all up) / amplitude(all down) as (re, im)
    branch_ratio: Optional[Tuple[float, float]] = None


class ModulationParams(BaseModel):
    """Cavity-mediated drive: g, modulation amplitude f, frequency nu_d and per-spin phases."""

    model_config = ConfigDict(frozen=True)

    g: float = Field(ge=0)
    f: float
    nu_d: float = Field(gt=0)
    phases: Tuple[float, ...]
    photon_cutoff: int = Field(default=config.PHOTON_CUTOFF, ge=2)

    @field_validator("phases")
    @classmethod
    def _two_or_three(cls, phases: Tuple[float, ...]) -> Tuple[float, ...]:
        if len(phases) not in (2, 3):
            raise ValueError(f"two or three modulated spins are supported, got {len(phases)} phases")
        return phases

    @property
    def n_spins(self) -> int:
        return len(self.phases)

    @classmethod
    def protocol(cls, g: float, nu_d: float, f: float, photon_cutoff: int = config.PHOTON_CUTOFF) -> "ModulationParams":
        """Three spins with phi_j = 2 j pi / 3."""
        phases = tuple(2 * j * math.pi / 3 for j in (1, 2, 3))
        return cls(g=g, f=f, nu_d=nu_d, phases=phases, photon_cutoff=photon_cutoff)


class SweepPoint(BaseModel):
    nu_d_over_g: Optional[float]
    f: float
    time: float
    vacuum_weight: float
    fidelity_to_effective: float


# CLI run configurations

OutputFormat = Literal["csv", "json"]


class ChiralDemoConfig(BaseModel):
    kappa: float = Field(gt=0)
    periods: float = Field(gt=0)
    samples: int = Field(ge=2)
    out: Optional[Path] = None
    format: OutputFormat = "csv"


class ZipConfig(BaseModel):
    spins: int = Field(ge=3)
    kappa: float = Field(gt=0)
    out: Optional[Path] = None
    format: OutputFormat = "json"
    populations: bool = False
    half_pi_phase: float = -math.pi / 2

    @field_validator("spins")
    @classmethod
    def _odd(cls, spins: int) -> int:
        if spins % 2 != 1:
            raise ValueError(f"--spins must be odd, got {spins}")
        return spins


class ScheduleConfig(BaseModel):
    spins: int = Field(ge=3)

    @field_validator("spins")
    @classmethod
    def _odd(cls, spins: int) -> int:
        if spins % 2 != 1:
            raise ValueError(f"--spins must be odd, got {spins}")
        return spins


class EtaConfig(BaseModel):
    # None resolves to the first root of J0
    f: Optional[float] = None
    delta_phi: float = 2 * math.pi / 3
    n_max: int = Field(default=config.N_MAX, ge=1)
    g: float = Field(default=1.0, ge=0)
    nu_d: Optional[float] = Field(default=None, gt=0)


class FloquetVerifyConfig(BaseModel):
    ratios: List[float] = Field(min_length=1)
    g: float = Field(default=1.0, gt=0)
    f: Optional[float] = None
    samples: int = Field(default=11, ge=2)
    photon_cutoff: int = Field(default=config.PHOTON_CUTOFF, ge=2)
    steps_per_period: int = Field(default=config.STEPS_PER_PERIOD, ge=200)
    workers: int = Field(default=1, ge=1)
    out: Optional[Path] = None
    format: OutputFormat = "csv"

    @field_validator("ratios")
    @classmethod
    def _positive(cls, ratios: List[float]) -> List[float]:
        if any(r <= 0 for r in ratios):
            raise ValueError(f"--ratio values must be positive, got {ratios}")
        return ratios
