"""HTTP service wrapping the simulator core.

Endpoints mirror the high-level operations: kernel extraction, single
attack simulation (optionally traced), parameter sweeps, and kinetics
calibration. Configs travel in the request body using the same schema as
the experiment JSON files; kernels can be attached inline so clients never
share a filesystem with the server.
"""

from __future__ import annotations

from typing import Optional

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from pydantic import BaseModel, ConfigDict

from . import __version__
from .calibrate import ReferencePoint
from .config import ExperimentConfig
from .errors import ValidationError, XhammerError
from .runner import calibrate, resolve_kernel, run_sweep, simulate


class AlphaEntry(BaseModel):
    di: int
    dj: int
    value: float
    r2: float = 1.0


class KernelArtifact(BaseModel):
    ambient_K: float
    r_th_K_per_W: float
    alpha: list[AlphaEntry]


class ExtractRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")
    config: ExperimentConfig


class SimulateRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")
    config: ExperimentConfig
    trace: bool = False
    alpha_kernel: Optional[KernelArtifact] = None


class TracePayload(BaseModel):
    pulse_index: list[int]
    victim_x: list[float]
    victim_T_K: list[float]
    aggressor_T_K: list[float]


class SimulateResponse(BaseModel):
    flipped: bool
    pulses_to_flip: Optional[int]
    final_x: list[list[float]]
    final_T_K: list[list[float]]
    trace: Optional[TracePayload] = None


class SweepRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")
    config: ExperimentConfig
    workers: Optional[int] = None
    alpha_kernel: Optional[KernelArtifact] = None


class SweepRowPayload(BaseModel):
    value: float
    pulses_to_flip: Optional[int]
    flipped: bool


class SweepResponse(BaseModel):
    variable: str
    rows: list[SweepRowPayload]


class ReferencePayload(BaseModel):
    model_config = ConfigDict(extra="forbid")
    pulses: int
    pulse_length_ns: Optional[float] = None
    ambient_K: Optional[float] = None


class CalibrateRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")
    config: ExperimentConfig
    reference: list[ReferencePayload]
    free: list[str] = ["k0"]
    alpha_kernel: Optional[KernelArtifact] = None


class ResidualPayload(BaseModel):
    pulse_length_ns: Optional[float]
    ambient_K: Optional[float]
    reference_pulses: int
    model_pulses: Optional[int]
    log_residual: float


class CalibrateResponse(BaseModel):
    device: dict
    free: list[str]
    residuals: list[ResidualPayload]


def create_app() -> FastAPI:
    app = FastAPI(title="xhammer", version=__version__)

    @app.exception_handler(ValidationError)
    async def _invalid(request: Request, err: ValidationError):
        return JSONResponse(status_code=422, content={"detail": err.violations})

    @app.exception_handler(XhammerError)
    async def _domain_error(request: Request, err: XhammerError):
        return JSONResponse(
            status_code=400,
            content={"detail": [f"{type(err).__name__}: {err}"]},
        )

    @app.get("/health")
    def health():
        return {"status": "ok", "version": __version__}

    @app.post("/alpha/extract", response_model=KernelArtifact)
    def extract(req: ExtractRequest):
        req.config.validate_cross_fields(require_program=False)
        kernel = resolve_kernel(req.config)
        return KernelArtifact.model_validate(kernel.to_artifact_dict())

    @app.post("/attack/simulate", response_model=SimulateResponse)
    def attack_simulate(req: SimulateRequest):
        req.config.validate_cross_fields()
        kernel = None
        if req.alpha_kernel is not None:
            kernel = resolve_kernel(req.config, inline=req.alpha_kernel.model_dump())
        res = simulate(req.config, kernel=kernel, trace=req.trace)
        trace = None
        if res.trace is not None:
            trace = TracePayload(
                pulse_index=res.trace.pulse_index.tolist(),
                victim_x=res.trace.victim_x.tolist(),
                victim_T_K=res.trace.victim_t.tolist(),
                aggressor_T_K=res.trace.aggressor_t.tolist(),
            )
        return SimulateResponse(
            flipped=res.flipped,
            pulses_to_flip=res.pulses_to_flip,
            final_x=res.final_x.tolist(),
            final_T_K=res.final_t_fil.tolist(),
            trace=trace,
        )

    @app.post("/attack/sweep", response_model=SweepResponse)
    def attack_sweep(req: SweepRequest):
        req.config.validate_cross_fields()
        if req.config.sweep is None:
            raise ValidationError(["sweep: config has no sweep block"])
        inline = req.alpha_kernel.model_dump() if req.alpha_kernel else None
        rows = run_sweep(req.config, workers=req.workers, inline_kernel=inline)
        return SweepResponse(
            variable=req.config.sweep.variable,
            rows=[
                SweepRowPayload(
                    value=r.value, pulses_to_flip=r.pulses_to_flip, flipped=r.flipped
                )
                for r in rows
            ],
        )

    @app.post("/calibrate", response_model=CalibrateResponse)
    def calibrate_endpoint(req: CalibrateRequest):
        req.config.validate_cross_fields()
        kernel = None
        if req.alpha_kernel is not None:
            kernel = resolve_kernel(req.config, inline=req.alpha_kernel.model_dump())
        reference = [ReferencePoint(**r.model_dump()) for r in req.reference]
        result = calibrate(req.config, reference, tuple(req.free), kernel=kernel)
        return CalibrateResponse(
            device=result.params.to_dict(),
            free=list(result.free),
            residuals=[ResidualPayload(**r) for r in result.residuals],
        )

    return app


app = create_app()
