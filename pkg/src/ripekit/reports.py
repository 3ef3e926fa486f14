"""CSV serialization and human-readable summaries.

Floats are written with ``repr`` so values round-trip exactly; missing
coherence columns are written as ``nan``.
"""

from __future__ import annotations

import math

import numpy as np

from .evaluation import BiasStdCurves, fit_drift
from .ripe import PhaseSeries

PHASE_HEADER = "epoch,time_days,phase_rad,short_coherence,long_coherence"
CURVES_HEADER = (
    "method,epoch,time_days,bias_rad,bias_mm,std_rad,std_mm,"
    "mean_coh_short,mean_coh_long"
)


def _fmt(x) -> str:
    return repr(float(x))


def phase_series_rows(
    series: PhaseSeries, times, start_epoch: int = 1
) -> list[str]:
    """CSV rows (no header) for a phase series; epochs are 1-based."""
    times = np.asarray(times, dtype=float)
    if times.shape != series.phases.shape:
        raise ValueError("times length must match the phase series")
    rows = []
    for i in range(len(series)):
        short = series.short_coherence[i] if series.short_coherence is not None else math.nan
        long = series.long_coherence[i] if series.long_coherence is not None else math.nan
        rows.append(
            f"{start_epoch + i},{_fmt(times[i])},{_fmt(series.phases[i])},"
            f"{_fmt(short)},{_fmt(long)}"
        )
    return rows


def phase_series_csv(series: PhaseSeries, times) -> str:
    return "\n".join([PHASE_HEADER, *phase_series_rows(series, times)]) + "\n"


def curves_csv(curves: BiasStdCurves) -> str:
    lines = [CURVES_HEADER]
    for i in range(len(curves.time_days)):
        short = (
            curves.mean_short_coherence[i]
            if curves.mean_short_coherence is not None
            else math.nan
        )
        long = (
            curves.mean_long_coherence[i]
            if curves.mean_long_coherence is not None
            else math.nan
        )
        lines.append(
            f"{curves.method},{i + 1},{_fmt(curves.time_days[i])},"
            f"{_fmt(curves.bias_rad[i])},{_fmt(curves.bias_mm[i])},"
            f"{_fmt(curves.std_rad[i])},{_fmt(curves.std_mm[i])},"
            f"{_fmt(short)},{_fmt(long)}"
        )
    return "\n".join(lines) + "\n"


def read_curves_csv(text: str) -> dict[str, dict[str, np.ndarray]]:
    """Parse one or more concatenated curves CSVs, grouped by method."""
    grouped: dict[str, dict[str, list[float]]] = {}
    cols = CURVES_HEADER.split(",")
    for line in text.splitlines():
        line = line.strip()
        if not line or line == CURVES_HEADER:
            continue
        parts = line.split(",")
        if len(parts) != len(cols):
            raise ValueError(f"malformed curves row: {line!r}")
        method = parts[0]
        bucket = grouped.setdefault(method, {c: [] for c in cols[1:]})
        for name, value in zip(cols[1:], parts[1:]):
            bucket[name].append(float(value))
    return {
        method: {name: np.asarray(vals) for name, vals in bucket.items()}
        for method, bucket in grouped.items()
    }


def summarize_curves(parsed: dict[str, dict[str, np.ndarray]]) -> str:
    """Plain-text summary table for one or more methods."""
    header = (
        f"{'method':<20} {'epochs':>6} {'drift mm/yr':>12} "
        f"{'max|bias| mm':>13} {'final std mm':>13} {'mean std mm':>12}"
    )
    lines = [header, "-" * len(header)]
    for method in sorted(parsed):
        data = parsed[method]
        t = data["time_days"]
        bias = data["bias_mm"]
        std = data["std_mm"]
        t_hi = min(1300.0, float(t[-1]))
        t_lo = min(200.0, 0.5 * t_hi)
        drift = fit_drift(t, bias, t_lo, t_hi)
        settled = t >= t_lo
        lines.append(
            f"{method:<20} {len(t):>6d} {drift:>12.3f} "
            f"{np.max(np.abs(bias[settled])):>13.3f} {std[-1]:>13.3f} "
            f"{np.mean(std):>12.3f}"
        )
    return "\n".join(lines)
