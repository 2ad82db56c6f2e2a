"""
Configuration management for the viscous scheme toolkit
"""
import os
from fractions import Fraction
from typing import Any, Dict, List, Literal, Optional, Tuple

from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field, field_serializer, field_validator, model_validator

load_dotenv()


class Config:
    """Application configuration"""

    # Output
    OUTPUT_DIR: str = os.getenv("OUTPUT_DIR", "outputs")
    LOG_LEVEL: str = os.getenv("LOG_LEVEL", "INFO").upper()
    SHOW_PROGRESS: bool = os.getenv("SHOW_PROGRESS", "false").lower() == "true"

    # Spectral analysis
    SPECTRAL_SAMPLES: int = int(os.getenv("SPECTRAL_SAMPLES", "4096"))
    RESOLVING_TOLERANCE: float = float(os.getenv("RESOLVING_TOLERANCE", "0.05"))
    OVERDISSIPATION_FACTOR: float = float(os.getenv("OVERDISSIPATION_FACTOR", "1.05"))
    # thresholds are compared at four-decimal precision
    THRESHOLD_SLACK: float = float(os.getenv("THRESHOLD_SLACK", "5e-5"))
    BISECTION_TOL: float = float(os.getenv("BISECTION_TOL", "1e-6"))

    # Time marching
    CFL: float = float(os.getenv("CFL", "0.5"))
    MAX_STEPS: int = int(os.getenv("MAX_STEPS", "20000"))
    BLOWUP_FACTOR: float = float(os.getenv("BLOWUP_FACTOR", "1e3"))

    # Flow solver
    GAMMA: float = float(os.getenv("GAMMA", "1.4"))
    PRANDTL: float = float(os.getenv("PRANDTL", "0.72"))
    FILTER_STRENGTH: float = float(os.getenv("FILTER_STRENGTH", "0.2"))


def _to_fraction(value: Any) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        return Fraction(repr(value))
    return Fraction(str(value).strip())


class ParameterRange(BaseModel):
    """Inclusive scan lo..hi in exact steps"""
    model_config = ConfigDict(extra="forbid", arbitrary_types_allowed=True)

    lo: Fraction
    hi: Fraction
    step: Fraction

    @field_validator("lo", "hi", "step", mode="before")
    @classmethod
    def _exact(cls, v: Any) -> Fraction:
        try:
            return _to_fraction(v)
        except (ValueError, ZeroDivisionError) as e:
            raise ValueError(f"not a rational number: {v!r}") from e

    @field_serializer("lo", "hi", "step")
    def _as_text(self, v: Fraction) -> str:
        return str(v)

    @model_validator(mode="after")
    def _check(self) -> "ParameterRange":
        if self.step <= 0:
            raise ValueError("step must be positive")
        if self.lo > self.hi:
            raise ValueError(f"lo ({self.lo}) exceeds hi ({self.hi})")
        return self

    def values(self) -> List[Fraction]:
        count = int((self.hi - self.lo) / self.step)
        return [self.lo + i * self.step for i in range(count + 1)]


_DEFAULT_RANGES: Dict[int, List[Tuple[str, str, str]]] = {
    4: [("-3/100", "1/100", "1/1000"), ("-1/100", "1/100", "1/1000")],
    6: [("25/12500", "35/12500", "1/12500"), ("-15/12500", "-5/12500", "1/12500"), ("5/1250", "7/1250", "1/1250")],
}


def default_ranges(order: int) -> List[ParameterRange]:
    if order not in _DEFAULT_RANGES:
        raise ValueError(f"no default search ranges for order {order}")
    return [ParameterRange(lo=lo, hi=hi, step=step) for lo, hi, step in _DEFAULT_RANGES[order]]


class SearchConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    order: Literal[4, 6] = 4
    eps: float = Field(default_factory=lambda: Config.RESOLVING_TOLERANCE, gt=0, lt=1)
    constraint_factor: float = Field(default_factory=lambda: Config.OVERDISSIPATION_FACTOR, gt=1)
    slack: float = Field(default_factory=lambda: Config.THRESHOLD_SLACK, ge=0)
    samples: int = Field(default_factory=lambda: Config.SPECTRAL_SAMPLES, ge=16)
    ranges: List[ParameterRange] = Field(default_factory=list)
    keep_surface: bool = True

    @model_validator(mode="after")
    def _fill_ranges(self) -> "SearchConfig":
        if not self.ranges:
            self.ranges = default_ranges(self.order)
        expected = 2 if self.order == 4 else 3
        if len(self.ranges) != expected:
            raise ValueError(f"order {self.order} search takes {expected} ranges, got {len(self.ranges)}")
        return self


class TimeStepPolicy(BaseModel):
    model_config = ConfigDict(extra="forbid")

    cfl: float = Field(default_factory=lambda: Config.CFL, gt=0)
    damping: Optional[float] = Field(default=None, gt=0)
    fixed_dt: Optional[float] = Field(default=None, gt=0)


class FilterPolicy(BaseModel):
    model_config = ConfigDict(extra="forbid")

    theta: Optional[int] = Field(default=None, ge=1)
    strength: float = Field(default_factory=lambda: Config.FILTER_STRENGTH, gt=0, le=1)
    order: Literal[6] = 6

    @property
    def enabled(self) -> bool:
        return self.theta is not None

    def due(self, step: int) -> bool:
        """True after every theta-th completed step"""
        return self.theta is not None and step % self.theta == 0


class DiffusionCase(BaseModel):
    model_config = ConfigDict(extra="forbid")

    scheme: str = "me4-opti"
    n: int = Field(default=144, ge=16)
    dt: float = Field(default=1.2e-6, gt=0)
    t_end: float = Field(default=0.0025, gt=0)
    wavenumber: float = 16.0
    nu_mean: float = 1.0
    nu_amp: float = 1.0
    alpha: float = 8.0 / 3.0
    blowup: float = Field(default_factory=lambda: Config.BLOWUP_FACTOR, gt=1)


CaseName = Literal["dpsl", "khi", "quirk"]

_CASE_DEFAULTS: Dict[str, Dict[str, Any]] = {
    "dpsl": {"nx": 128, "ny": 128, "re": 1.0e4, "mach": 0.1, "t_end": 1.0,
             "inviscid": "central", "shear": 80.0, "perturbation": 0.05, "filter_strength": 1.0},
    "khi": {"nx": 256, "ny": 256, "re": 200.0, "mach": 0.1, "t_end": 1.0, "dt": 1.5e-4,
            "inviscid": "central", "shear": 0.05 / 2 ** 0.5, "perturbation": 0.1},
    "quirk": {"nx": 800, "ny": 20, "re": 1000.0, "mach": 1.0, "t_end": 50.0,
              "inviscid": "weno5", "shock_mach": 6.0, "perturbation": 1e-6},
}


class CaseConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    case: CaseName
    nx: int = Field(ge=8)
    ny: int = Field(ge=8)
    re: float = Field(gt=0)
    mach: float = Field(gt=0)
    t_end: float = Field(gt=0)
    dt: Optional[float] = Field(default=None, gt=0)
    cfl: float = Field(default_factory=lambda: Config.CFL, gt=0)
    gamma: float = Field(default_factory=lambda: Config.GAMMA, gt=1)
    prandtl: float = Field(default_factory=lambda: Config.PRANDTL, gt=0)
    inviscid: Literal["central", "weno5"] = "central"
    viscous: bool = True
    shear: float = 80.0
    perturbation: float = 0.05
    shock_mach: float = 6.0
    max_steps: int = Field(default_factory=lambda: Config.MAX_STEPS, ge=1)
    snapshot_every: Optional[int] = Field(default=None, ge=1)
    # overrides Config.FILTER_STRENGTH for policies that leave strength unset
    filter_strength: Optional[float] = Field(default=None, gt=0, le=1)

    @model_validator(mode="before")
    @classmethod
    def _case_defaults(cls, data: Any) -> Any:
        if isinstance(data, dict) and data.get("case") in _CASE_DEFAULTS:
            merged = dict(_CASE_DEFAULTS[data["case"]])
            merged.update({k: v for k, v in data.items() if v is not None})
            return merged
        return data

    def resolve_filter(self, policy: Optional[FilterPolicy]) -> Optional[FilterPolicy]:
        if policy is None or self.filter_strength is None or "strength" in policy.model_fields_set:
            return policy
        return policy.model_copy(update={"strength": self.filter_strength})


class RunConfig(BaseModel):
    """Flat config file accepted by every CLI subcommand"""
    model_config = ConfigDict(extra="forbid")

    command: Optional[str] = None
    out: str = Field(default_factory=lambda: Config.OUTPUT_DIR)
    format: Literal["csv", "json"] = "csv"
    scheme: Optional[str] = None
    term: Literal["straight", "mixed"] = "straight"
    order: Optional[Literal[4, 6]] = None
    grids: List[int] = Field(default_factory=list)
    ranges: List[ParameterRange] = Field(default_factory=list)
    eps: Optional[float] = None
    samples: Optional[int] = None
    case: Optional[CaseName] = None
    grid: Optional[str] = None
    theta: Optional[int] = Field(default=None, ge=1)
    theta_range: Optional[Tuple[int, int]] = None
    cfl: Optional[float] = Field(default=None, gt=0)
    t_end: Optional[float] = Field(default=None, gt=0)
    dt: Optional[float] = Field(default=None, gt=0)
    n: Optional[int] = None
    nu_mean: Optional[float] = None
    nu_amp: Optional[float] = None
    filter_penalty: bool = True
    input: Optional[str] = None
    spacing: Optional[float] = Field(default=None, gt=0)
    progress: bool = False

    @field_validator("grids")
    @classmethod
    def _increasing(cls, v: List[int]) -> List[int]:
        if any(b <= a for a, b in zip(v, v[1:])):
            raise ValueError("grids must be strictly increasing")
        if any(n < 8 for n in v):
            raise ValueError("every grid needs at least 8 points")
        return v
