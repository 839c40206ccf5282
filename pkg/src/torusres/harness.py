"""Config-driven sweeps over oscillation scales with convergence-rate fits.

A run realizes the configured family at every scale in the schedule, computes
each requested quantity, fits log-log rates where asked, checks tolerances
and renders a CSV plus JSON artifacts.  Runs are deterministic for a fixed
config and seed: cells are pure, workers only change wall time, and floats
are serialized with 17 significant digits.
"""

from __future__ import annotations

import hashlib
import json
import platform
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import __version__
from .config import (ConvergenceReport, ExperimentConfig, PlaneWaveSpec,
                     PositionSymbolSpec, QuantityReport, QuantitySpec,
                     SeriesPoint, ToleranceSpec, WavePacketSpec)
from .lattice import primitive_direction
from .oracles import averaged_density_oracle, wave_packet_limit_oracle
from .resonant import kernel_trace_residual, propagation_pair
from .state import FourierState, h_oscillation_tail, near_hyperplane_mass
from .symbols import Symbol, TimeWindow
from .wigner import classical_limit_gap, time_averaged_pair

ZERO_FLOOR = 1e-12
TAIL_FLAG_RATIO = 0.01


class ConfigError(ValueError):
    """Raised when a structurally valid config cannot be executed."""


def fit_rate(series: Sequence[Tuple[float, float]]) -> Tuple[float, float]:
    """Least-squares slope and R^2 of log(value) against log(h).

    Requires at least three points with strictly positive values; series that
    violate this are reported through markers, not fitted.
    """
    if len(series) < 3:
        raise ValueError("rate fits need at least 3 points")
    if any(v <= 0 for _, v in series):
        raise ValueError("identically-zero-or-mixed")
    x = np.log([h for h, _ in series])
    y = np.log([v for _, v in series])
    xc = x - x.mean()
    yc = y - y.mean()
    denom = float(np.sum(xc * xc))
    if denom == 0:
        raise ValueError("degenerate schedule")
    slope = float(np.sum(xc * yc) / denom)
    ss_res = float(np.sum((yc - slope * xc) ** 2))
    ss_tot = float(np.sum(yc * yc))
    r_squared = 1.0 if ss_tot == 0 else 1.0 - ss_res / ss_tot
    return slope, r_squared


# ---------------------------------------------------------------------------
# quantity evaluation


class _RunContext:
    def __init__(self, cfg: ExperimentConfig):
        self.cfg = cfg
        self.family = cfg.family.to_family(cfg.d, cfg.seed)
        self.symbols: Dict[str, Symbol] = {}
        self.position_modes: Dict[str, Dict[tuple, complex]] = {}
        for spec in cfg.symbols:
            self.symbols[spec.id] = spec.to_symbol(cfg.d)
            if isinstance(spec, PositionSymbolSpec):
                self.position_modes[spec.id] = spec.m_modes()
        self.windows: Dict[str, TimeWindow] = {w.id: w.to_window()
                                               for w in cfg.windows}
        self._states: Dict[float, FourierState] = {}

    def state(self, h: float) -> FourierState:
        if h not in self._states:
            try:
                self._states[h] = self.family.realize(h)
            except ValueError as exc:
                raise ConfigError(str(exc)) from exc
        return self._states[h]

    def symbol(self, q: QuantitySpec) -> Symbol:
        if q.symbol_id is None:
            raise ConfigError(f"quantity {q.name}: symbol_id is required")
        return self.symbols[q.symbol_id]

    def window(self, q: QuantitySpec) -> TimeWindow:
        if q.window_id is None:
            raise ConfigError(f"quantity {q.name}: window_id is required")
        return self.windows[q.window_id]

    def oracle(self, q: QuantitySpec) -> complex:
        if q.symbol_id not in self.position_modes:
            raise ConfigError(
                f"quantity {q.name}: oracle gaps need a position-kind symbol")
        m_modes = self.position_modes[q.symbol_id]
        phi = self.window(q)
        fam = self.family
        if isinstance(self.cfg.family, WavePacketSpec):
            return wave_packet_limit_oracle(m_modes, phi, fam.rho_norm_sq, self.cfg.d)
        if isinstance(self.cfg.family, PlaneWaveSpec):
            return averaged_density_oracle(fam.profile_dict, fam.direction,
                                           m_modes, phi)
        raise ConfigError(
            f"quantity {q.name}: no oracle for family kind "
            f"{self.cfg.family.kind!r}")


def _evaluate_cell(ctx: _RunContext, q: QuantitySpec, h: float,
                   oracle: Optional[complex]) -> Tuple[complex, float]:
    u = ctx.state(h)
    if q.kind == "pairing":
        res = time_averaged_pair(u, h, ctx.symbol(q), ctx.window(q))
        return res.value, res.truncation_tail_bound
    if q.kind == "residual":
        value = kernel_trace_residual(u, h, ctx.symbol(q), ctx.window(q))
        return complex(value), 0.0
    if q.kind == "classical_gap":
        return complex(classical_limit_gap(u, h, ctx.symbol(q), q.t)), 0.0
    if q.kind == "hyperplane_mass":
        if q.direction is None or q.n_cut is None:
            raise ConfigError(f"quantity {q.name}: direction and n_cut required")
        p = primitive_direction(q.direction)
        return complex(near_hyperplane_mass(u, p, q.n_cut)), 0.0
    if q.kind == "oscillation_tail":
        if q.radius is None:
            raise ConfigError(f"quantity {q.name}: radius required")
        return complex(h_oscillation_tail(u, h, q.radius)), 0.0
    if q.kind == "oracle_gap":
        res = time_averaged_pair(u, h, ctx.symbol(q), ctx.window(q))
        return complex(abs(res.value - oracle)), res.truncation_tail_bound
    if q.kind == "propagation_gap":
        value = propagation_pair(u, h, ctx.symbol(q), ctx.window(q))
        return complex(abs(value - oracle)), 0.0
    raise ConfigError(f"unknown quantity kind {q.kind!r}")


def _check_tolerance(tol: ToleranceSpec, values: List[float],
                     status: str, slope: Optional[float],
                     r_squared: Optional[float], oracle: Optional[complex],
                     tol_scale: float) -> List[str]:
    failures: List[str] = []
    if tol.min_slope is not None:
        if status != "fitted" or slope is None or slope < tol.min_slope:
            failures.append(f"slope {slope} below {tol.min_slope} (status {status})")
    if tol.min_r_squared is not None:
        if status != "fitted" or r_squared is None or r_squared < tol.min_r_squared:
            failures.append(f"r_squared {r_squared} below {tol.min_r_squared}")
    if tol.max_abs is not None:
        bound = tol.max_abs * tol_scale
        if any(v > bound for v in values):
            failures.append(f"series exceeds max_abs {bound}")
    if tol.max_final is not None:
        bound = tol.max_final * tol_scale
        if values and values[-1] > bound:
            failures.append(f"final value {values[-1]} exceeds {bound}")
    if tol.max_final_rel is not None:
        if oracle is None:
            failures.append("max_final_rel requires an oracle quantity")
        else:
            bound = tol.max_final_rel * tol_scale * abs(oracle)
            if values and values[-1] > bound:
                failures.append(f"final value {values[-1]} exceeds {bound} "
                                f"(= {tol.max_final_rel} * |oracle|)")
    if tol.monotone is not None and values:
        slack = ZERO_FLOOR * max(1.0, max(values))
        ok = all(b <= a + slack for a, b in zip(values, values[1:]))
        if tol.monotone == "decreasing" and values[-1] >= values[0] and values[0] > slack:
            ok = False
        if not ok:
            failures.append(f"series is not {tol.monotone}")
    return failures


def run_experiment(cfg: ExperimentConfig, out_dir: Optional[Path] = None,
                   tol_scale: float = 1.0,
                   workers: Optional[int] = None) -> Tuple[ConvergenceReport, str]:
    """Execute a config; returns the report and the rendered CSV text.

    When ``out_dir`` is given the CSV, full report and condensed summary are
    written there.  Identical config and seed produce byte-identical files.
    """
    try:
        ctx = _RunContext(cfg)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    n_workers = workers if workers is not None else cfg.workers
    cells = [(qi, hi) for qi in range(len(cfg.quantities))
             for hi in range(len(cfg.h_schedule))]
    oracles: Dict[int, complex] = {}
    for qi, q in enumerate(cfg.quantities):
        if q.kind in ("oracle_gap", "propagation_gap"):
            oracles[qi] = ctx.oracle(q)

    def run_cell(cell: Tuple[int, int]) -> Tuple[complex, float]:
        qi, hi = cell
        q = cfg.quantities[qi]
        return _evaluate_cell(ctx, q, cfg.h_schedule[hi], oracles.get(qi))

    if n_workers > 1 and len(cells) > 1:
        # realize states up front: the per-h cache is shared across workers
        for h in cfg.h_schedule:
            ctx.state(h)
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            results = list(pool.map(run_cell, cells))
    else:
        results = [run_cell(c) for c in cells]

    table: Dict[Tuple[int, int], Tuple[complex, float]] = dict(zip(cells, results))
    quantity_reports: List[QuantityReport] = []
    for qi, q in enumerate(cfg.quantities):
        points: List[SeriesPoint] = []
        mags: List[float] = []
        for hi, h in enumerate(cfg.h_schedule):
            value, tail = table[(qi, hi)]
            mags.append(abs(value))
            points.append(SeriesPoint(
                h=h, value_re=value.real, value_im=value.imag, tail_bound=tail,
                tail_flag=tail > TAIL_FLAG_RATIO * abs(value),
            ))
        status = "series"
        slope = r_squared = None
        wants_fit = (q.tolerance.min_slope is not None
                     or q.tolerance.min_r_squared is not None
                     or q.kind in ("residual", "classical_gap"))
        if wants_fit:
            if all(v <= ZERO_FLOOR for v in mags):
                status = "identically-zero"
            elif any(v <= 0 for v in mags) or len(mags) < 3:
                status = "identically-zero-or-mixed"
            else:
                slope, r_squared = fit_rate(list(zip(cfg.h_schedule, mags)))
                status = "fitted"
        oracle = oracles.get(qi)
        failures = _check_tolerance(q.tolerance, mags, status, slope, r_squared,
                                    oracle, tol_scale)
        quantity_reports.append(QuantityReport(
            name=q.name, kind=q.kind, symbol_id=q.symbol_id,
            window_id=q.window_id, series=points, status=status, slope=slope,
            r_squared=r_squared,
            oracle_re=None if oracle is None else oracle.real,
            oracle_im=None if oracle is None else oracle.imag,
            failures=failures, passed=not failures,
        ))

    report = ConvergenceReport(
        family=cfg.family.kind,
        d=cfg.d,
        seed=cfg.seed,
        config_digest=config_digest(cfg),
        environment=environment_fingerprint(),
        quantities=quantity_reports,
        passed=all(qr.passed for qr in quantity_reports),
    )
    csv_text = render_csv(report)
    if out_dir is not None:
        write_run_dir(Path(out_dir), cfg, report, csv_text)
    return report, csv_text


def config_digest(cfg: ExperimentConfig) -> str:
    canon = json.dumps(cfg.model_dump(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()


def environment_fingerprint() -> Dict[str, str]:
    return {
        "package": __version__,
        "python": sys.version.split()[0],
        "numpy": np.__version__,
        "platform": platform.platform(),
    }


# ---------------------------------------------------------------------------
# rendering


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def render_csv(report: ConvergenceReport) -> str:
    lines = ["family,d,h,quantity,symbol_id,window_id,value_re,value_im,tail_bound"]
    for qr in report.quantities:
        for pt in qr.series:
            lines.append(",".join([
                report.family,
                str(report.d),
                _fmt(pt.h),
                qr.name,
                qr.symbol_id or "",
                qr.window_id or "",
                _fmt(pt.value_re),
                _fmt(pt.value_im),
                _fmt(pt.tail_bound),
            ]))
    return "\n".join(lines) + "\n"


def render_summary(report: ConvergenceReport) -> str:
    quantities = {}
    for qr in report.quantities:
        quantities[qr.name] = {
            "series": [[pt.h, pt.value_re, pt.value_im] for pt in qr.series],
            "slope": qr.slope,
            "r_squared": qr.r_squared,
            "pass": qr.passed,
        }
    payload = {"quantities": quantities, "pass": report.passed}
    return json.dumps(payload, sort_keys=True, separators=(",", ":")) + "\n"


def write_run_dir(out_dir: Path, cfg: ExperimentConfig,
                  report: ConvergenceReport, csv_text: str):
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / cfg.output.csv).write_text(csv_text)
    (out_dir / cfg.output.report).write_text(
        json.dumps(report.model_dump(), sort_keys=True, separators=(",", ":")) + "\n")
    (out_dir / cfg.output.summary).write_text(render_summary(report))


def load_config(path: Path) -> ExperimentConfig:
    try:
        raw = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    try:
        return ExperimentConfig.model_validate(raw)
    except Exception as exc:  # pydantic ValidationError
        raise ConfigError(str(exc)) from exc
