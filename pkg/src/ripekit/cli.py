"""Command-line front end.

Every command is a thin client of the HTTP service: by default the service
runs in process behind an ASGI transport, and ``--server`` (or RIPE_SERVER)
points the same commands at a remote deployment. File I/O stays on the client
side; the service only ever sees request/response payloads.
"""

from __future__ import annotations

import base64
import json
from pathlib import Path

import click
import numpy as np

from . import __version__
from .client import ServiceClient, ServiceError
from .config import RunConfig, canonical_methods, load_config
from .errors import RipekitError
from .evaluation import BiasStdCurves
from .reports import (
    PHASE_HEADER,
    curves_csv,
    phase_series_csv,
    phase_series_rows,
    read_curves_csv,
    summarize_curves,
)
from .service import schemas
from .stackio import load_stack, write_stack

STATE_FILENAME = "ripe_state.bin"
PHASES_FILENAME = "phases.csv"


def _fail(exc: Exception) -> click.ClickException:
    return click.ClickException(str(exc))


def _model_spec(config: RunConfig) -> schemas.ModelSpec:
    if config.components:
        return schemas.ModelSpec(
            preset=None,
            components=[
                schemas.ComponentSpec(
                    amplitude=c["amplitude"],
                    decay_days=(
                        None if c["decay_days"] == float("inf") else c["decay_days"]
                    ),
                    phase_rate_rad_per_day=c.get("phase_rate_rad_per_day", 0.0),
                )
                for c in config.components
            ],
            nugget=config.nugget if config.nugget is not None else 0.0,
        )
    return schemas.ModelSpec(preset=config.preset)


def _ripe_options(config: RunConfig, calibrate: bool) -> schemas.RipeOptions:
    return schemas.RipeOptions(
        beta=config.beta,
        alpha=config.alpha,
        calibrate=calibrate,
        calibration_cadence=config.calibration_cadence,
        stable_mode=config.stable_mode,
        snapshot_epoch=config.snapshot_epoch,
        rescale=config.rescale,
    )


def _load(config_path, **overrides) -> RunConfig:
    if "methods" in overrides and overrides["methods"] is not None:
        overrides["methods"] = canonical_methods(overrides["methods"])
    try:
        return load_config(config_path, overrides=overrides)
    except (RipekitError, OSError, json.JSONDecodeError) as exc:
        raise _fail(exc) from exc


@click.group()
@click.version_option(version=__version__, prog_name="ripekit")
@click.option(
    "--server",
    envvar="RIPE_SERVER",
    default=None,
    metavar="URL",
    help="Service URL; without it the service runs in process.",
)
@click.pass_context
def main(ctx, server):
    """Progressive InSAR phase estimation toolkit."""
    ctx.obj = server


def _client(ctx) -> ServiceClient:
    return ServiceClient(ctx.obj)


_shared = [
    click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False)),
    click.option("--preset", default=None, help="Coherence model preset name."),
    click.option("--epochs", type=int, default=None),
    click.option("--spacing-days", type=float, default=None),
    click.option("--looks", type=int, default=None),
    click.option("--seed", "base_seed", type=int, default=None),
    click.option("--out", default=None, help="Output path."),
]


def _with_options(options):
    def deco(f):
        for opt in reversed(options):
            f = opt(f)
        return f

    return deco


@main.command()
@_with_options(_shared)
@click.pass_context
def simulate(ctx, config_path, preset, epochs, spacing_days, looks, base_seed, out):
    """Simulate a multilook stack and write the dump plus metadata."""
    config = _load(
        config_path,
        preset=preset,
        epochs=epochs,
        spacing_days=spacing_days,
        looks=looks,
        base_seed=base_seed,
        out=out,
    )
    out_path = Path(config.out)
    if out_path.suffix != ".rkst":
        out_path = out_path / "stack.rkst"
    request = schemas.SimulateRequest(
        model=_model_spec(config),
        timeline=schemas.TimelineSpec(
            epochs=config.epochs, spacing_days=config.spacing_days
        ),
        looks=config.looks,
        seed=config.base_seed,
    )
    try:
        with _client(ctx) as client:
            response = client.simulate(request)
        stack = response.stack.to_stack()
    except (ServiceError, RipekitError, ValueError) as exc:
        raise _fail(exc) from exc
    out_path.parent.mkdir(parents=True, exist_ok=True)
    out_path.write_bytes(write_stack(stack))
    meta = {
        "model": request.model.model_dump(mode="json"),
        "epochs": config.epochs,
        "spacing_days": config.spacing_days,
        "looks": config.looks,
        "seed": config.base_seed,
        "format": "RKST v1, little-endian float64 interleaved re/im",
    }
    out_path.with_suffix(".json").write_text(json.dumps(meta, indent=2) + "\n")
    click.echo(f"wrote {out_path} ({config.epochs} x {config.looks})")


@main.command()
@_with_options(_shared)
@click.option("--methods", default=None, help="Comma-separated method list.")
@click.option("--trials", type=int, default=None)
@click.option(
    "--same-seed",
    is_flag=True,
    default=None,
    help="Diagnostic: reuse the base seed for every trial.",
)
@click.pass_context
def run(
    ctx, config_path, preset, epochs, spacing_days, looks, base_seed, out,
    methods, trials, same_seed,
):
    """Monte Carlo bias/std evaluation; one curves CSV per method plus metadata."""
    config = _load(
        config_path,
        preset=preset,
        epochs=epochs,
        spacing_days=spacing_days,
        looks=looks,
        base_seed=base_seed,
        out=out,
        methods=methods,
        trials=trials,
        same_seed=same_seed,
    )
    request = schemas.RunRequest(
        model=_model_spec(config),
        timeline=schemas.TimelineSpec(
            epochs=config.epochs, spacing_days=config.spacing_days
        ),
        looks=config.looks,
        trials=config.trials,
        base_seed=config.base_seed,
        methods=list(config.methods),
        ripe=_ripe_options(config, calibrate=True),
        emi=schemas.EmiOptions(
            coherence_floor=config.emi_floor, shrinkage=config.emi_shrinkage
        ),
        wavelength_m=config.wavelength_m,
        same_seed=config.same_seed,
        deformation_rate_rad_per_day=config.deformation_rate_rad_per_day,
        workers=config.workers,
    )
    try:
        with _client(ctx) as client:
            response = client.run(request)
    except (ServiceError, RipekitError) as exc:
        raise _fail(exc) from exc

    out_dir = Path(config.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    excluded = {}
    for payload in response.curves:
        curves = BiasStdCurves(
            method=payload.method,
            time_days=np.asarray(payload.time_days),
            bias_rad=np.asarray(payload.bias_rad),
            bias_mm=np.asarray(payload.bias_mm),
            std_rad=np.asarray(payload.std_rad),
            std_mm=np.asarray(payload.std_mm),
            mean_short_coherence=(
                None if payload.mean_coh_short is None else np.asarray(payload.mean_coh_short)
            ),
            mean_long_coherence=(
                None if payload.mean_coh_long is None else np.asarray(payload.mean_coh_long)
            ),
            trials=payload.trials,
            excluded=payload.excluded,
        )
        path = out_dir / f"curves_{payload.method}.csv"
        path.write_text(curves_csv(curves))
        excluded[payload.method] = payload.excluded
        click.echo(f"wrote {path}")
    sidecar = {
        "config": config.to_json_dict(),
        "run": {
            "base_seed": config.base_seed,
            "seed_derivation": "splitmix64(base_seed + (trial+1)*0x9E3779B97F4A7C15)",
            "same_seed": config.same_seed,
            "trials": config.trials,
            "excluded_trials": excluded,
        },
    }
    meta_path = out_dir / "run_meta.json"
    meta_path.write_text(json.dumps(sidecar, indent=2) + "\n")
    click.echo(f"wrote {meta_path}")


@main.command()
@click.argument("stack_path", required=False, type=click.Path(exists=True, dir_okay=False))
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", default=None, help="Output directory.")
@click.option("--append", "append_path", type=click.Path(exists=True, dir_okay=False),
              help="Stack file with new acquisitions to append to a persisted state.")
@click.option("--beta", type=float, default=None)
@click.option("--alpha", type=float, default=None)
@click.option("--calibrate/--no-calibrate", "calibrate", default=None)
@click.option("--cadence", "calibration_cadence", type=int, default=None)
@click.option("--stable-mode", default=None, type=click.Choice(["accumulate", "first", "snapshot"]))
@click.option("--snapshot-epoch", type=int, default=None)
@click.option("--rescale", is_flag=True, default=None)
@click.pass_context
def estimate(
    ctx, stack_path, config_path, out, append_path, beta, alpha, calibrate,
    calibration_cadence, stable_mode, snapshot_epoch, rescale,
):
    """Estimate a phase series from a stack, or append acquisitions to one.

    Writes phases.csv and the estimator checkpoint under --out. With
    --append, loads the checkpoint, ingests the new acquisitions, appends the
    new rows, and updates the checkpoint; earlier rows are never touched.
    """
    config = _load(
        config_path,
        out=out,
        beta=beta,
        alpha=alpha,
        calibration_cadence=calibration_cadence,
        stable_mode=stable_mode,
        snapshot_epoch=snapshot_epoch,
        rescale=rescale,
    )
    options = _ripe_options(config, calibrate=calibrate if calibrate is not None else True)
    out_dir = Path(config.out)
    state_path = out_dir / STATE_FILENAME
    phases_path = out_dir / PHASES_FILENAME

    if append_path is None and stack_path is None:
        raise click.UsageError("give a stack file, or --append with a persisted state")
    if append_path is not None and stack_path is not None:
        raise click.UsageError("--append continues a previous run; drop the stack argument")

    try:
        if append_path is None:
            stack = load_stack(stack_path)
            request = schemas.EstimateRequest(
                stack=schemas.StackPayload.from_stack(stack), options=options
            )
            with _client(ctx) as client:
                response = client.estimate(request)
            out_dir.mkdir(parents=True, exist_ok=True)
            phases_path.write_text(
                phase_series_csv(response.series.to_series(), stack.timeline.as_array())
            )
            state_path.write_bytes(base64.b64decode(response.state_b64))
            click.echo(f"wrote {phases_path} and {state_path}")
        else:
            if not state_path.exists():
                raise _fail(
                    FileNotFoundError(
                        f"no persisted state at {state_path}; run estimate on a "
                        "stack before appending"
                    )
                )
            block = load_stack(append_path)
            request = schemas.AppendRequest(
                state_b64=base64.b64encode(state_path.read_bytes()).decode(),
                acquisitions=schemas.StackPayload.from_stack(block),
                options=options,
            )
            with _client(ctx) as client:
                response = client.append(request)
            rows = phase_series_rows(
                response.series.to_series(),
                block.timeline.as_array(),
                start_epoch=response.start_epoch,
            )
            existing = (
                phases_path.read_text().rstrip("\n")
                if phases_path.exists()
                else PHASE_HEADER
            )
            phases_path.write_text("\n".join([existing, *rows]) + "\n")
            state_path.write_bytes(base64.b64decode(response.state_b64))
            click.echo(f"appended {len(rows)} row(s) to {phases_path}")
    except (ServiceError, RipekitError, ValueError) as exc:
        raise _fail(exc) from exc


@main.command()
@click.argument("csv_paths", nargs=-1, required=True, type=click.Path(exists=True, dir_okay=False))
def report(csv_paths):
    """Summarize one or more curves CSVs as a table."""
    text = "\n".join(Path(p).read_text() for p in csv_paths)
    try:
        click.echo(summarize_curves(read_curves_csv(text)))
    except ValueError as exc:
        raise _fail(exc) from exc


@main.command()
@click.option("--host", default="127.0.0.1")
@click.option("--port", type=int, default=8000)
def serve(host, port):
    """Run the HTTP service."""
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(), host=host, port=port)


if __name__ == "__main__":
    main()
