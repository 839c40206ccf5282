"""Declarative experiment descriptions and report schemas.

Everything crossing a process boundary (config files, service payloads, run
reports) is a pydantic model with ``extra="forbid"``, so unknown fields are
rejected with a structured error naming the offender.
"""

from __future__ import annotations

from typing import Annotated, Dict, List, Literal, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from . import state as state_mod
from . import symbols as symbols_mod


class StrictModel(BaseModel):
    model_config = ConfigDict(extra="forbid")


class ModeAmp(StrictModel):
    """One lattice mode with a complex amplitude."""

    k: List[int]
    re: float = 0.0
    im: float = 0.0


class StateJSON(StrictModel):
    """Wire form of a sparse state; modes are kept in lexicographic order."""

    d: int = Field(ge=1)
    modes: List[ModeAmp] = Field(default_factory=list)

    def to_state(self) -> state_mod.FourierState:
        return state_mod.make_state(
            self.d, {tuple(m.k): complex(m.re, m.im) for m in self.modes})

    @classmethod
    def from_state(cls, u: state_mod.FourierState) -> "StateJSON":
        return cls(d=u.d, modes=[ModeAmp(k=list(k), re=a.real, im=a.imag)
                                 for k, a in u.items()])


class CoefficientSpec(StrictModel):
    kind: Literal["constant", "gaussian", "poly_gaussian"]
    c_re: float = 1.0
    c_im: float = 0.0
    center: Optional[List[float]] = None
    width: float = 1.0
    powers: Optional[List[int]] = None

    def to_fn(self) -> symbols_mod.CoefficientFn:
        return symbols_mod.CoefficientFn(
            kind=self.kind,
            c=complex(self.c_re, self.c_im),
            center=tuple(self.center) if self.center is not None else None,
            width=self.width,
            powers=tuple(self.powers) if self.powers is not None else None,
        )


class SymbolMode(StrictModel):
    k: List[int]
    fn: CoefficientSpec


class FourierSymbolSpec(StrictModel):
    kind: Literal["fourier"] = "fourier"
    id: str
    hermitian: bool = False
    modes: List[SymbolMode]

    def to_symbol(self, d: int) -> symbols_mod.Symbol:
        table = {tuple(m.k): m.fn.to_fn() for m in self.modes}
        if self.hermitian:
            return symbols_mod.hermitian_symbol(d, table)
        return symbols_mod.symbol_from_modes(d, table)


class PositionSymbolSpec(StrictModel):
    """Momentum-independent observable given by the modes of m(x)."""

    kind: Literal["position"] = "position"
    id: str
    modes: List[ModeAmp]

    def m_modes(self) -> Dict[Tuple[int, ...], complex]:
        return {tuple(m.k): complex(m.re, m.im) for m in self.modes}

    def to_symbol(self, d: int) -> symbols_mod.Symbol:
        return symbols_mod.position_symbol(d, self.m_modes())


SymbolSpec = Annotated[Union[FourierSymbolSpec, PositionSymbolSpec],
                       Field(discriminator="kind")]


class WindowSpec(StrictModel):
    id: str
    amplitude: float = 1.0
    tau: float = 1.0
    t0: float = 0.0

    def to_window(self) -> symbols_mod.TimeWindow:
        return symbols_mod.TimeWindow(amplitude=self.amplitude, tau=self.tau,
                                      t0=self.t0)


class WavePacketSpec(StrictModel):
    kind: Literal["wave_packet"] = "wave_packet"
    x0: List[float]
    xi0: List[float]
    sigma: float = Field(gt=0)
    trunc: float = Field(default=1e-12, gt=0, lt=1)

    def to_family(self, d: int, seed: int) -> state_mod.WavePacketFamily:
        del seed
        if len(self.x0) != d or len(self.xi0) != d:
            raise ValueError("family dimension does not match config dimension")
        return state_mod.WavePacketFamily(x0=tuple(self.x0), xi0=tuple(self.xi0),
                                          sigma=self.sigma, trunc=self.trunc)


class PlaneWaveSpec(StrictModel):
    kind: Literal["plane_wave"] = "plane_wave"
    profile: List[ModeAmp]
    direction: List[int]

    def to_family(self, d: int, seed: int) -> state_mod.PlaneWaveFamily:
        del seed
        if len(self.direction) != d:
            raise ValueError("family dimension does not match config dimension")
        profile = tuple((tuple(m.k), complex(m.re, m.im)) for m in self.profile)
        return state_mod.PlaneWaveFamily(profile=profile,
                                         direction=tuple(self.direction))


class RandomModesSpec(StrictModel):
    kind: Literal["random"] = "random"
    n_modes: int = Field(gt=0)
    box: int = Field(gt=0)
    normalize: bool = True

    def to_family(self, d: int, seed: int) -> state_mod.RandomModesFamily:
        return state_mod.RandomModesFamily(d=d, n_modes=self.n_modes, box=self.box,
                                           seed=seed, normalize=self.normalize)


class ShellSpec(StrictModel):
    kind: Literal["shell"] = "shell"
    radius: float = Field(gt=0)
    width: float = Field(ge=0)

    def to_family(self, d: int, seed: int) -> state_mod.ShellFamily:
        return state_mod.ShellFamily(d=d, radius=self.radius, width=self.width,
                                     seed=seed)


class SuperpositionSpec(StrictModel):
    kind: Literal["superposition"] = "superposition"
    parts: List[Annotated[Union[WavePacketSpec, PlaneWaveSpec, RandomModesSpec,
                                ShellSpec], Field(discriminator="kind")]]
    weights: Optional[List[float]] = None

    def to_family(self, d: int, seed: int) -> state_mod.SuperpositionFamily:
        weights = self.weights or [1.0] * len(self.parts)
        if len(weights) != len(self.parts):
            raise ValueError("superposition weights do not match parts")
        parts = tuple(p.to_family(d, seed + i) for i, p in enumerate(self.parts))
        return state_mod.SuperpositionFamily(parts=parts,
                                             weights=tuple(complex(w) for w in weights))


FamilySpec = Union[WavePacketSpec, PlaneWaveSpec, RandomModesSpec, ShellSpec,
                   SuperpositionSpec]

QuantityKind = Literal["pairing", "residual", "classical_gap", "hyperplane_mass",
                       "oscillation_tail", "oracle_gap", "propagation_gap"]


class ToleranceSpec(StrictModel):
    """Pass conditions for one quantity; absent fields are not checked."""

    min_slope: Optional[float] = None
    min_r_squared: Optional[float] = None
    max_abs: Optional[float] = None
    max_final: Optional[float] = None
    max_final_rel: Optional[float] = None
    monotone: Optional[Literal["decreasing", "nonincreasing"]] = None


class QuantitySpec(StrictModel):
    name: str
    kind: QuantityKind
    symbol_id: Optional[str] = None
    window_id: Optional[str] = None
    direction: Optional[List[int]] = None
    n_cut: Optional[float] = None
    radius: Optional[float] = None
    t: float = 1.0
    tolerance: ToleranceSpec = Field(default_factory=ToleranceSpec)


class OutputSpec(StrictModel):
    csv: str = "results.csv"
    summary: str = "summary.json"
    report: str = "report.json"


class ExperimentConfig(StrictModel):
    """Full description of a sweep: family, schedule, observables, checks."""

    d: int = Field(ge=1)
    family: FamilySpec = Field(discriminator="kind")
    h_schedule: List[float] = Field(
        default_factory=lambda: [2.0**-k for k in range(3, 10)])
    symbols: List[SymbolSpec] = Field(default_factory=list)
    windows: List[WindowSpec] = Field(default_factory=list)
    quantities: List[QuantitySpec] = Field(default_factory=list)
    seed: int = 0
    workers: int = Field(default=1, ge=1)
    output: OutputSpec = Field(default_factory=OutputSpec)

    @field_validator("h_schedule")
    @classmethod
    def _schedule_decreasing(cls, v: List[float]) -> List[float]:
        if not v:
            raise ValueError("h_schedule must not be empty")
        if any(h <= 0 for h in v):
            raise ValueError("h_schedule entries must be positive")
        if any(b >= a for a, b in zip(v, v[1:])):
            raise ValueError("h_schedule must be strictly decreasing")
        return v

    @model_validator(mode="after")
    def _check_references(self) -> "ExperimentConfig":
        symbol_ids = [s.id for s in self.symbols]
        window_ids = [w.id for w in self.windows]
        if len(set(symbol_ids)) != len(symbol_ids):
            raise ValueError("duplicate symbol ids")
        if len(set(window_ids)) != len(window_ids):
            raise ValueError("duplicate window ids")
        names = [q.name for q in self.quantities]
        if len(set(names)) != len(names):
            raise ValueError("duplicate quantity names")
        for q in self.quantities:
            if q.symbol_id is not None and q.symbol_id not in symbol_ids:
                raise ValueError(f"quantity {q.name}: unknown symbol_id {q.symbol_id}")
            if q.window_id is not None and q.window_id not in window_ids:
                raise ValueError(f"quantity {q.name}: unknown window_id {q.window_id}")
            needs_rate = (q.tolerance.min_slope is not None
                          or q.tolerance.min_r_squared is not None)
            if needs_rate and len(self.h_schedule) < 3:
                raise ValueError(f"quantity {q.name}: rate fits need >= 3 points")
        return self


# ---------------------------------------------------------------------------
# report models


class SeriesPoint(StrictModel):
    h: float
    value_re: float
    value_im: float
    tail_bound: float
    tail_flag: bool = False


class QuantityReport(StrictModel):
    name: str
    kind: QuantityKind
    symbol_id: Optional[str] = None
    window_id: Optional[str] = None
    series: List[SeriesPoint]
    status: Literal["series", "fitted", "identically-zero",
                    "identically-zero-or-mixed"]
    slope: Optional[float] = None
    r_squared: Optional[float] = None
    oracle_re: Optional[float] = None
    oracle_im: Optional[float] = None
    failures: List[str] = Field(default_factory=list)
    passed: bool = True


class ConvergenceReport(StrictModel):
    family: str
    d: int
    seed: int
    config_digest: str
    environment: Dict[str, str]
    quantities: List[QuantityReport]
    passed: bool
