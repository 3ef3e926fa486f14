"""Comparison estimators: EMI full-covariance phase linking and direct interferograms.

EMI inverts the (regularized) element-wise magnitude of the sample coherence,
multiplies it entry-by-entry with the complex sample coherence, and takes the
eigenvector of the minimum eigenvalue of that Hermitian matrix as the phase
series. The direct interferogram is the plain multilook product between two
acquisitions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EigendecompositionError, SingularCoherenceError
from .ripe import PhaseSeries, estimate_phase, wrap_phase
from .simulate import SLCStack


@dataclass(frozen=True)
class EmiConfig:
    """Regularization of the magnitude matrix before inversion.

    ``coherence_floor`` replaces any magnitude entry below it; ``shrinkage``
    blends the floored magnitude matrix toward the identity. The floor keeps
    noise-dominated entries from injecting huge inverse weights; the shrinkage
    keeps the inversion stable when the number of acquisitions approaches or
    exceeds the number of looks, which otherwise produces wild phase series.
    """

    coherence_floor: float = 0.05
    shrinkage: float = 0.1

    def __post_init__(self):
        if not 0.0 < self.coherence_floor < 1.0:
            raise ValueError("coherence_floor must lie in (0, 1)")
        if not 0.0 <= self.shrinkage < 1.0:
            raise ValueError("shrinkage must lie in [0, 1)")


def emi_phases(sample_coh: np.ndarray, config: EmiConfig | None = None) -> PhaseSeries:
    """Phase series from a sample coherence matrix via the minimum eigenvector.

    The returned phases are rotated so the first entry is 0 and wrapped to
    (-pi, pi]. Coherence quality series are not defined for this estimator.
    """
    if config is None:
        config = EmiConfig()
    coh = np.asarray(sample_coh, dtype=complex)
    if coh.ndim != 2 or coh.shape[0] != coh.shape[1]:
        raise ValueError("sample coherence must be a square matrix")
    if coh.shape[0] < 2:
        raise ValueError("phase linking needs at least two acquisitions")

    magnitude = np.maximum(np.abs(coh), config.coherence_floor)
    if config.shrinkage > 0.0:
        magnitude = (1.0 - config.shrinkage) * magnitude + config.shrinkage * np.eye(
            coh.shape[0]
        )
    try:
        inverse = np.linalg.inv(magnitude)
    except np.linalg.LinAlgError as exc:
        raise SingularCoherenceError(
            "magnitude matrix is singular after regularization"
        ) from exc

    linking = inverse * coh
    eigvals, eigvecs = np.linalg.eigh(linking)
    vec = eigvecs[:, 0]

    residual = np.linalg.norm(linking @ vec - eigvals[0] * vec)
    scale = float(np.max(np.abs(eigvals)))
    if residual > 1e-8 * scale:
        raise EigendecompositionError(
            f"minimum-eigenvector residual {residual:.3e} exceeds 1e-8 * {scale:.3e}"
        )

    phases = wrap_phase(np.angle(vec * np.conj(vec[0])))
    phases[0] = 0.0
    return PhaseSeries(phases=phases)


def direct_interferogram_phase(stack: SLCStack, m: int, n: int) -> float:
    """Multilook interferometric phase between acquisitions m and n (0-based)."""
    y = stack.samples
    return estimate_phase(y[m], y[n])


def direct_phase_series(stack: SLCStack) -> PhaseSeries:
    """Direct interferograms of every acquisition against the first."""
    y = stack.samples
    phases = np.zeros(y.shape[0])
    for n in range(1, y.shape[0]):
        phases[n] = estimate_phase(y[0], y[n])
    return PhaseSeries(phases=phases)
