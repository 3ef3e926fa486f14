"""FastAPI application exposing the estimator, simulator, and Monte Carlo harness.

The service is stateless: estimator state travels inside requests and
responses as the same versioned checkpoint bytes the CLI persists, so any
replica can continue any window and a client keeps custody of its own data.
"""

from __future__ import annotations

import base64

from fastapi import FastAPI
from fastapi.responses import JSONResponse

from .. import __version__
from ..baselines import EmiConfig
from ..coherence import PRESETS
from ..errors import RipekitError
from ..evaluation import run_monte_carlo
from ..ripe import RipeConfig, ingest, run_ripe_stateful
from ..simulate import simulate_stack
from ..stackio import read_state, write_state
from . import schemas


def create_app() -> FastAPI:
    app = FastAPI(
        title="ripekit",
        version=__version__,
        description=(
            "Progressive InSAR phase estimation: recursive phase linking with "
            "a calibrated running reference, stack simulation, an EMI "
            "baseline, and Monte Carlo bias/variance evaluation."
        ),
    )

    @app.exception_handler(RipekitError)
    async def _domain_error(request, exc: RipekitError):
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    @app.exception_handler(ValueError)
    async def _value_error(request, exc: ValueError):
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    @app.get("/health", response_model=schemas.HealthResponse)
    def health():
        return schemas.HealthResponse(status="ok", version=__version__)

    @app.get("/presets", response_model=schemas.PresetsResponse)
    def presets():
        return schemas.PresetsResponse(
            presets={
                name: schemas.ModelSpec.from_model(model)
                for name, model in PRESETS.items()
            }
        )

    @app.post("/simulate", response_model=schemas.SimulateResponse)
    def simulate(request: schemas.SimulateRequest):
        stack = simulate_stack(
            model=request.model.to_model(),
            timeline=request.timeline.to_timeline(),
            looks=request.looks,
            seed=request.seed,
        )
        return schemas.SimulateResponse(stack=schemas.StackPayload.from_stack(stack))

    @app.post("/estimate", response_model=schemas.EstimateResponse)
    def estimate(request: schemas.EstimateRequest):
        stack = request.stack.to_stack()
        config = request.options.to_config()
        series, state = run_ripe_stateful(stack, config)
        return schemas.EstimateResponse(
            series=schemas.PhaseSeriesPayload.from_series(series),
            state_b64=base64.b64encode(write_state(state, config)).decode(),
            config_digest=config.digest(),
        )

    @app.post("/estimate/append", response_model=schemas.AppendResponse)
    def estimate_append(request: schemas.AppendRequest):
        config = request.options.to_config()
        state = read_state(base64.b64decode(request.state_b64), config)
        start_epoch = state.epoch + 1
        block = request.acquisitions.to_stack()
        series = ingest(state, block.samples, config)
        return schemas.AppendResponse(
            series=schemas.PhaseSeriesPayload.from_series(series),
            state_b64=base64.b64encode(write_state(state, config)).decode(),
            start_epoch=start_epoch,
        )

    @app.post("/run", response_model=schemas.RunResponse)
    def run(request: schemas.RunRequest):
        methods = _method_configs(request)
        curves = run_monte_carlo(
            model=request.model.to_model(),
            timeline=request.timeline.to_timeline(),
            looks=request.looks,
            trials=request.trials,
            base_seed=request.base_seed,
            methods=methods,
            wavelength_m=request.wavelength_m,
            same_seed=request.same_seed,
            deformation_rate_rad_per_day=request.deformation_rate_rad_per_day,
            workers=request.workers,
        )
        return schemas.RunResponse(
            curves=[
                schemas.CurvesPayload(
                    method=c.method,
                    time_days=list(c.time_days),
                    bias_rad=list(c.bias_rad),
                    bias_mm=list(c.bias_mm),
                    std_rad=list(c.std_rad),
                    std_mm=list(c.std_mm),
                    mean_coh_short=(
                        None
                        if c.mean_short_coherence is None
                        else list(c.mean_short_coherence)
                    ),
                    mean_coh_long=(
                        None
                        if c.mean_long_coherence is None
                        else list(c.mean_long_coherence)
                    ),
                    trials=c.trials,
                    excluded=c.excluded,
                )
                for c in curves
            ]
        )

    return app


def _method_configs(request: schemas.RunRequest) -> dict:
    from ..config import canonical_methods

    tags = canonical_methods(",".join(request.methods))
    out: dict[str, RipeConfig | EmiConfig | None] = {}
    for tag in tags:
        if tag == "ripe-calibrated":
            out[tag] = request.ripe.model_copy(update={"calibrate": True}).to_config()
        elif tag == "ripe-uncalibrated":
            out[tag] = request.ripe.model_copy(update={"calibrate": False}).to_config()
        elif tag == "emi":
            out[tag] = request.emi.to_config()
        else:
            out[tag] = None
    return out
