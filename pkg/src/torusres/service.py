"""HTTP service exposing the experiment runner and the core pairings.

The CLI talks to this app (in-process by default); any other client can POST
the same JSON payloads.  Sweeps can run long, so deployments typically keep
one service per machine and let clients submit configs.
"""

from __future__ import annotations

import json
from typing import Dict, List, Optional

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, ConfigDict, Field

from . import __version__, selfcheck
from .config import (ConvergenceReport, ExperimentConfig, StateJSON, SymbolSpec,
                     WindowSpec)
from .harness import (ConfigError, environment_fingerprint, render_csv,
                      render_summary, run_experiment)
from .lattice import primitive_direction
from .resonant import build_resonant, measure_to_json
from .wigner import time_averaged_pair, wigner_pair

app = FastAPI(title="torusres", version=__version__)


class StrictModel(BaseModel):
    model_config = ConfigDict(extra="forbid")


class RunRequest(StrictModel):
    config: ExperimentConfig
    tol_scale: float = Field(default=1.0, gt=0)
    workers: Optional[int] = Field(default=None, ge=1)


class RunResponse(StrictModel):
    report: ConvergenceReport
    csv: str
    summary: str


class ConvergeResponse(StrictModel):
    report: ConvergenceReport


class RenderResponse(StrictModel):
    csv: str
    summary: str


class CheckResult(StrictModel):
    name: str
    passed: bool
    detail: str


class CheckResponse(StrictModel):
    passed: bool
    checks: List[CheckResult]


class BuildResonantRequest(StrictModel):
    state: StateJSON
    h: float = Field(gt=0)
    omega: List[int]


class PairingRequest(StrictModel):
    state: StateJSON
    h: float = Field(gt=0)
    symbol: SymbolSpec
    window: Optional[WindowSpec] = None


class PairingResponse(StrictModel):
    value_re: float
    value_im: float
    terms_summed: int
    tail_bound: float


@app.get("/health")
def health() -> Dict[str, object]:
    return {"status": "ok", "version": __version__,
            "environment": environment_fingerprint()}


@app.post("/experiments/run", response_model=RunResponse)
def experiments_run(req: RunRequest) -> RunResponse:
    try:
        report, csv_text = run_experiment(req.config, tol_scale=req.tol_scale,
                                          workers=req.workers)
    except ConfigError as exc:
        raise HTTPException(status_code=400, detail=str(exc))
    return RunResponse(report=report, csv=csv_text, summary=render_summary(report))


@app.post("/experiments/converge", response_model=ConvergeResponse)
def experiments_converge(req: RunRequest) -> ConvergeResponse:
    try:
        report, _ = run_experiment(req.config, tol_scale=req.tol_scale,
                                   workers=req.workers)
    except ConfigError as exc:
        raise HTTPException(status_code=400, detail=str(exc))
    return ConvergeResponse(report=report)


@app.post("/reports/render", response_model=RenderResponse)
def reports_render(report: ConvergenceReport) -> RenderResponse:
    return RenderResponse(csv=render_csv(report), summary=render_summary(report))


@app.get("/selfcheck", response_model=CheckResponse)
def selfcheck_endpoint() -> CheckResponse:
    results = selfcheck.run_all()
    return CheckResponse(
        passed=all(r["passed"] for r in results),
        checks=[CheckResult(name=r["name"], passed=r["passed"], detail=r["detail"])
                for r in results],
    )


@app.post("/resonant/build")
def resonant_build(req: BuildResonantRequest) -> Dict[str, object]:
    try:
        omega = primitive_direction(req.omega)
        measure = build_resonant(req.state.to_state(), req.h, omega)
    except ValueError as exc:
        raise HTTPException(status_code=400, detail=str(exc))
    return json.loads(measure_to_json(measure))


@app.post("/pairings/time-averaged", response_model=PairingResponse)
def pairings_time_averaged(req: PairingRequest) -> PairingResponse:
    if req.window is None:
        raise HTTPException(status_code=400, detail="window is required")
    try:
        res = time_averaged_pair(req.state.to_state(), req.h,
                                 req.symbol.to_symbol(req.state.d),
                                 req.window.to_window())
    except ValueError as exc:
        raise HTTPException(status_code=400, detail=str(exc))
    return PairingResponse(value_re=res.value.real, value_im=res.value.imag,
                           terms_summed=res.terms_summed,
                           tail_bound=res.truncation_tail_bound)


@app.post("/pairings/wigner", response_model=PairingResponse)
def pairings_wigner(req: PairingRequest) -> PairingResponse:
    try:
        res = wigner_pair(req.state.to_state(), req.h,
                          req.symbol.to_symbol(req.state.d))
    except ValueError as exc:
        raise HTTPException(status_code=400, detail=str(exc))
    return PairingResponse(value_re=res.value.real, value_im=res.value.imag,
                           terms_summed=res.terms_summed,
                           tail_bound=res.truncation_tail_bound)
