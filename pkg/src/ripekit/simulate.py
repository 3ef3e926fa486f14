"""Multilook stack simulation with a prescribed temporal covariance.

Each look is an independent draw y = C g where C is the lower Cholesky factor
of the model covariance and g is a vector of i.i.d. standard circular complex
Gaussians (real and imaginary parts independent with variance 1/2 each, so
E[|g_n|^2] = 1). Looks are i.i.d.: spatial correlation inside the multilook
window is modeled only through the effective number of looks L.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .coherence import AcquisitionTimeline, TemporalCoherenceModel, covariance_matrix
from .errors import DegenerateWindowError, InvalidModelError

# Jitter ladder for nearly singular user models; the escalation stops at 1e-8.
_JITTERS = (0.0, 1e-12, 1e-11, 1e-10, 1e-9, 1e-8)

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class SLCStack:
    """N acquisitions by L looks of complex samples plus their timeline."""

    samples: np.ndarray
    timeline: AcquisitionTimeline

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=complex)
        if samples.ndim != 2:
            raise ValueError("stack samples must be a 2-D (N, L) array")
        if samples.shape[0] != len(self.timeline):
            raise ValueError(
                f"stack has {samples.shape[0]} rows but timeline has "
                f"{len(self.timeline)} acquisitions"
            )
        if samples.shape[1] < 1:
            raise ValueError("stack needs at least one look")
        if not np.all(np.isfinite(samples.view(float))):
            raise ValueError("stack samples must be finite")
        object.__setattr__(self, "samples", samples)

    @property
    def n_acquisitions(self) -> int:
        return self.samples.shape[0]

    @property
    def n_looks(self) -> int:
        return self.samples.shape[1]


def cholesky_lower(cov: np.ndarray) -> np.ndarray:
    """Lower Cholesky factor of a Hermitian PSD matrix.

    Retries with a small escalating diagonal jitter before giving up, so
    barely-PSD user models still factor. Raises :class:`InvalidModelError`
    once the ladder is exhausted.
    """
    cov = np.asarray(cov, dtype=complex)
    for jitter in _JITTERS:
        try:
            c = np.linalg.cholesky(cov + jitter * np.eye(cov.shape[0]))
        except np.linalg.LinAlgError:
            continue
        return c
    raise InvalidModelError(
        "covariance is not positive semidefinite within jitter tolerance 1e-8"
    )


def mix_seed(base_seed: int, trial_index: int) -> int:
    """Derive a per-trial seed from a base seed and a trial index.

    Uses the splitmix64 finalizer on base_seed + (trial_index + 1) * GOLDEN,
    a fixed 64-bit mix that decorrelates consecutive trial indices. Distinct
    trial indices map to distinct, statistically independent generator
    streams; identical inputs always map to the same seed.
    """
    x = (base_seed + (trial_index + 1) * 0x9E3779B97F4A7C15) & _MASK64
    x ^= x >> 30
    x = (x * 0xBF58476D1CE4E5B9) & _MASK64
    x ^= x >> 27
    x = (x * 0x94D049BB133111EB) & _MASK64
    x ^= x >> 31
    return x


def draw_looks(chol: np.ndarray, looks: int, seed: int) -> np.ndarray:
    """Draw an (N, L) matrix of colored circular complex Gaussian looks."""
    if looks < 1:
        raise ValueError("looks must be >= 1")
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((2, chol.shape[0], looks))
    white = (g[0] + 1j * g[1]) * np.sqrt(0.5)
    return chol @ white


def simulate_stack(
    model: TemporalCoherenceModel,
    timeline: AcquisitionTimeline,
    looks: int,
    seed: int,
) -> SLCStack:
    """Simulate a multilook stack with the model's temporal covariance.

    Deterministic: identical (model, timeline, looks, seed) produce
    bit-identical stacks.
    """
    chol = cholesky_lower(covariance_matrix(model, timeline))
    return SLCStack(samples=draw_looks(chol, looks, seed), timeline=timeline)


def sample_coherence(stack: SLCStack) -> np.ndarray:
    """Sample coherence matrix of a stack.

    Entry (m, n) is sum_l y_m conj(y_n) normalized by the row powers; the
    result is Hermitian with a unit diagonal and |entries| <= 1. A zero-power
    acquisition row makes the normalization undefined and raises
    :class:`DegenerateWindowError`.
    """
    y = stack.samples
    gram = y @ y.conj().T
    power = np.real(np.diag(gram))
    if np.any(power <= 0.0):
        bad = int(np.argmin(power))
        raise DegenerateWindowError(f"acquisition row {bad} has zero power")
    norm = np.sqrt(power)
    return gram / np.outer(norm, norm)
