"""Monte Carlo harness and circular statistics for bias/variance analysis.

Residual phases live on the circle, so the per-epoch bias is the angle of the
mean unit phasor across trials and the spread is the linear standard deviation
of the residuals after that bias has been removed in the complex domain. For
plotting and drift fitting the per-epoch bias sequence is unwrapped along the
epoch axis: a secular drift of a few mm/yr crosses the half-wavelength wrap
point within the simulated time span.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from math import isfinite

import numpy as np

from .baselines import EmiConfig, direct_phase_series, emi_phases
from .coherence import (
    AcquisitionTimeline,
    CoherenceComponent,
    TemporalCoherenceModel,
    covariance_matrix,
)
from .errors import MonteCarloError, RipekitError, UndefinedBiasError
from .ripe import PhaseSeries, RipeConfig, run_ripe, wrap_phase
from .simulate import SLCStack, cholesky_lower, draw_looks, mix_seed, sample_coherence

# Sentinel-1 C-band (5.405 GHz) line-of-sight wavelength in meters.
DEFAULT_WAVELENGTH_M = 0.05546

METHOD_TAGS = ("ripe-calibrated", "ripe-uncalibrated", "emi", "direct")

DAYS_PER_YEAR = 365.25


def circular_bias(residuals) -> float:
    """Angle of the mean unit phasor of the residuals, in (-pi, pi].

    Raises :class:`UndefinedBiasError` when the phasors cancel (perfectly
    dispersed residuals), in which case no direction is preferred.
    """
    r = np.asarray(residuals, dtype=float)
    if r.size == 0:
        raise ValueError("need at least one residual")
    mean = np.mean(np.exp(1j * r))
    if abs(mean) < 1e-12:
        raise UndefinedBiasError("residual phasors cancel; bias undefined")
    return wrap_phase(float(np.angle(mean)))


def circular_std(residuals) -> float:
    """Standard deviation of the residuals after circular bias removal.

    The bias is removed in the complex domain (subtract, then wrap), so
    residuals clustered across the +-pi boundary are measured by their true
    spread rather than by the wrap discontinuity.
    """
    r = np.asarray(residuals, dtype=float)
    if r.size < 2:
        raise ValueError("need at least two residuals")
    debiased = wrap_phase(r - circular_bias(r))
    return float(np.std(debiased))


def phase_to_displacement(phase, wavelength_m: float = DEFAULT_WAVELENGTH_M):
    """Line-of-sight displacement in millimeters for a phase in radians.

    d = 1000 * wavelength * phase / (4 pi); odd in the phase.
    """
    if not wavelength_m > 0:
        raise ValueError("wavelength must be positive")
    return 1000.0 * wavelength_m * np.asarray(phase) / (4.0 * np.pi)


def fit_drift(time_days, values, t_min: float, t_max: float) -> float:
    """Least-squares slope of values against time, per year, over [t_min, t_max]."""
    t = np.asarray(time_days, dtype=float)
    v = np.asarray(values, dtype=float)
    sel = (t >= t_min) & (t <= t_max)
    if sel.sum() < 2:
        raise ValueError("need at least two epochs inside the fit window")
    design = np.column_stack([t[sel], np.ones(sel.sum())])
    slope_per_day = np.linalg.lstsq(design, v[sel], rcond=None)[0][0]
    return float(slope_per_day * DAYS_PER_YEAR)


@dataclass(frozen=True)
class TrialResult:
    """One estimator run inside the Monte Carlo loop."""

    method: str
    series: PhaseSeries
    trial: int
    seed: int


@dataclass(frozen=True)
class BiasStdCurves:
    """Per-epoch bias and spread of one estimator across trials.

    ``bias_rad`` is the per-epoch circular bias unwrapped along the epoch
    axis (so secular drifts fit as straight lines); ``std_rad`` is the
    circular-debiased standard deviation. The mm columns are the same curves
    after line-of-sight conversion. Coherence means are None for estimators
    that do not produce quality series.
    """

    method: str
    time_days: np.ndarray
    bias_rad: np.ndarray
    bias_mm: np.ndarray
    std_rad: np.ndarray
    std_mm: np.ndarray
    mean_short_coherence: np.ndarray | None
    mean_long_coherence: np.ndarray | None
    trials: int
    excluded: int

    def __post_init__(self):
        n = len(self.time_days)
        for name in ("bias_rad", "bias_mm", "std_rad", "std_mm"):
            if len(getattr(self, name)) != n:
                raise ValueError(f"{name} length must match time_days")
        if np.any(np.asarray(self.std_rad) < 0):
            raise ValueError("standard deviations must be non-negative")


def _inject_deformation(
    model: TemporalCoherenceModel, rate_rad_per_day: float
) -> TemporalCoherenceModel:
    """Add a linear phase ramp to the non-decaying (stable) component."""
    components = []
    injected = False
    for comp in model.components:
        if not injected and not isfinite(comp.decay_days):
            components.append(
                CoherenceComponent(
                    comp.amplitude, comp.decay_days, comp.phase_rate + rate_rad_per_day
                )
            )
            injected = True
        else:
            components.append(comp)
    if not injected:
        raise ValueError("deformation injection needs a non-decaying component")
    return TemporalCoherenceModel(components=tuple(components), nugget=model.nugget)


def _run_method(tag: str, config, stack: SLCStack, coh_cache: dict) -> PhaseSeries:
    if tag == "ripe-calibrated" or tag == "ripe-uncalibrated":
        return run_ripe(stack, config)
    if tag == "emi":
        if "coh" not in coh_cache:
            coh_cache["coh"] = sample_coherence(stack)
        return emi_phases(coh_cache["coh"], config)
    if tag == "direct":
        return direct_phase_series(stack)
    raise ValueError(f"unknown method tag {tag!r}; known: {', '.join(METHOD_TAGS)}")


def normalize_method_config(tag: str, config):
    """Validate and default the per-method configuration for a tag."""
    if tag in ("ripe-calibrated", "ripe-uncalibrated"):
        if config is None:
            config = RipeConfig(calibrate=tag == "ripe-calibrated")
        if not isinstance(config, RipeConfig):
            raise ValueError(f"method {tag} needs a RipeConfig")
        want_cal = tag == "ripe-calibrated"
        if config.calibrate != want_cal:
            raise ValueError(
                f"method {tag} requires calibrate={want_cal}, got {config.calibrate}"
            )
        return config
    if tag == "emi":
        if config is None:
            config = EmiConfig()
        if not isinstance(config, EmiConfig):
            raise ValueError("method emi needs an EmiConfig")
        return config
    if tag == "direct":
        if config is not None:
            raise ValueError("method direct takes no configuration")
        return None
    raise ValueError(f"unknown method tag {tag!r}; known: {', '.join(METHOD_TAGS)}")


def run_monte_carlo(
    model: TemporalCoherenceModel,
    timeline: AcquisitionTimeline,
    looks: int,
    trials: int,
    base_seed: int,
    methods: dict,
    *,
    wavelength_m: float = DEFAULT_WAVELENGTH_M,
    same_seed: bool = False,
    deformation_rate_rad_per_day: float = 0.0,
    workers: int = 1,
) -> list[BiasStdCurves]:
    """Simulate, estimate, and aggregate bias/std curves per method.

    Each trial simulates one stack (trial seeds derived from the base seed via
    :func:`mix_seed`, or the base seed itself under ``same_seed``), runs every
    requested method on it, and records the per-epoch residuals phi_n - phi_1
    minus the known truth (zero unless a deformation ramp is injected).
    Aggregation is keyed by trial index, so results are independent of
    completion order; trials may run on several threads.

    Per-trial estimator failures are excluded and counted; the run aborts with
    :class:`MonteCarloError` if more than 1% of trials fail for any method.
    """
    if trials < 2:
        raise ValueError("Monte Carlo needs at least 2 trials")
    if len(timeline) < 2:
        raise ValueError("Monte Carlo needs at least 2 epochs")
    configs = {tag: normalize_method_config(tag, cfg) for tag, cfg in methods.items()}
    if not configs:
        raise ValueError("no methods requested")

    sim_model = model
    times = timeline.as_array()
    truth = np.zeros(len(timeline))
    if deformation_rate_rad_per_day != 0.0:
        sim_model = _inject_deformation(model, deformation_rate_rad_per_day)
        truth = deformation_rate_rad_per_day * (times - times[0])

    chol = cholesky_lower(covariance_matrix(sim_model, timeline))
    n_epochs = len(timeline)

    residuals = {tag: np.zeros((trials, n_epochs)) for tag in configs}
    ok = {tag: np.zeros(trials, dtype=bool) for tag in configs}
    short_coh = {tag: np.full((trials, n_epochs), np.nan) for tag in configs}
    long_coh = {tag: np.full((trials, n_epochs), np.nan) for tag in configs}

    def one_trial(trial: int) -> None:
        seed = base_seed if same_seed else mix_seed(base_seed, trial)
        stack = SLCStack(draw_looks(chol, looks, seed), timeline)
        coh_cache: dict = {}
        for tag, cfg in configs.items():
            try:
                series = _run_method(tag, cfg, stack, coh_cache)
            except RipekitError:
                continue
            residuals[tag][trial] = wrap_phase(series.phases - series.phases[0] - truth)
            ok[tag][trial] = True
            if series.short_coherence is not None:
                short_coh[tag][trial] = series.short_coherence
                long_coh[tag][trial] = series.long_coherence

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(one_trial, range(trials)))
    else:
        for trial in range(trials):
            one_trial(trial)

    curves = []
    for tag, cfg in configs.items():
        good = ok[tag]
        excluded = int(trials - good.sum())
        if excluded > 0.01 * trials:
            raise MonteCarloError(
                f"method {tag}: {excluded}/{trials} trials errored (> 1% threshold)"
            )
        r = residuals[tag][good]
        bias_wrapped = np.array([circular_bias(r[:, n]) for n in range(n_epochs)])
        std = np.array([circular_std(r[:, n]) for n in range(n_epochs)])
        bias = np.unwrap(bias_wrapped)
        produced_coh = not np.all(np.isnan(short_coh[tag][good]))
        mean_short = short_coh[tag][good].mean(axis=0) if produced_coh else None
        mean_long = long_coh[tag][good].mean(axis=0) if produced_coh else None
        curves.append(
            BiasStdCurves(
                method=tag,
                time_days=times,
                bias_rad=bias,
                bias_mm=np.asarray(phase_to_displacement(bias, wavelength_m)),
                std_rad=std,
                std_mm=np.asarray(phase_to_displacement(std, wavelength_m)),
                mean_short_coherence=mean_short,
                mean_long_coherence=mean_long,
                trials=int(good.sum()),
                excluded=excluded,
            )
        )
    return curves
