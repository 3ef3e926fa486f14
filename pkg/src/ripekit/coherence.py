"""Parametric complex temporal coherence models.

A model is a sum of exponentially decaying components, each with its own
phase ramp, plus a white (nugget) term that only contributes at zero
temporal separation:

    gamma(dt) = sum_k a_k * exp(-|dt|/tau_k) * exp(1j*w_k*dt) + nugget*[dt == 0]

The amplitudes and the nugget must sum to one so that gamma(0) = 1. The
phase ramp uses the signed separation while the decay uses |dt|, which makes
gamma Hermitian: gamma(-dt) = conj(gamma(dt)). Each term is a valid positive
semidefinite kernel (an Ornstein-Uhlenbeck kernel modulated by a frequency
shift), so any covariance matrix built from a valid model is PSD.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidModelError

AMPLITUDE_SUM_TOL = 1e-12


@dataclass(frozen=True)
class CoherenceComponent:
    """One scattering component of a temporal coherence model.

    Parameters
    ----------
    amplitude : float
        Power fraction in [0, 1].
    decay_days : float
        e-folding decorrelation time in days; ``math.inf`` marks a
        non-decaying (stable) component.
    phase_rate : float
        Phase ramp in radians/day, signed. Applied to the signed time
        separation.
    """

    amplitude: float
    decay_days: float
    phase_rate: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.amplitude <= 1.0:
            raise InvalidModelError(
                f"component amplitude must be in [0, 1], got {self.amplitude}"
            )
        if not self.decay_days > 0.0:
            raise InvalidModelError(
                f"component decay time must be positive (or inf), got {self.decay_days}"
            )


@dataclass(frozen=True)
class TemporalCoherenceModel:
    """Stationary complex temporal coherence model.

    The sum of component amplitudes plus the nugget must equal 1 within
    ``AMPLITUDE_SUM_TOL`` so that the coherence at zero separation is exactly
    one. Violations raise :class:`InvalidModelError`; there is deliberately
    no silent renormalization.

    Instances are immutable and safe to share across threads.
    """

    components: tuple[CoherenceComponent, ...]
    nugget: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(self.components))
        if not 0.0 <= self.nugget <= 1.0:
            raise InvalidModelError(f"nugget must be in [0, 1], got {self.nugget}")
        total = math.fsum(c.amplitude for c in self.components) + self.nugget
        if abs(total - 1.0) > AMPLITUDE_SUM_TOL:
            raise InvalidModelError(
                "component amplitudes plus nugget must sum to 1 so that the "
                f"zero-separation coherence is 1; got {total!r}"
            )

    def coherence(self, dt):
        """Evaluate gamma at a (signed) separation in days.

        Accepts a scalar or an ndarray of separations; returns a complex
        scalar or ndarray of the same shape. |gamma| <= 1 everywhere and
        gamma(0) = 1.
        """
        dt_arr = np.asarray(dt, dtype=float)
        out = np.zeros(dt_arr.shape, dtype=complex)
        for comp in self.components:
            if math.isinf(comp.decay_days):
                decay = 1.0
            else:
                decay = np.exp(-np.abs(dt_arr) / comp.decay_days)
            out = out + comp.amplitude * decay * np.exp(1j * comp.phase_rate * dt_arr)
        out = out + self.nugget * (dt_arr == 0.0)
        if np.ndim(dt) == 0:
            return complex(out)
        return out


@dataclass(frozen=True)
class AcquisitionTimeline:
    """Strictly increasing acquisition times in days."""

    times: tuple[float, ...] = field()

    def __post_init__(self):
        times = tuple(float(t) for t in self.times)
        object.__setattr__(self, "times", times)
        if len(times) == 0:
            raise ValueError("timeline must contain at least one acquisition")
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ValueError("acquisition times must be strictly increasing")

    def __len__(self) -> int:
        return len(self.times)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.times, dtype=float)

    @classmethod
    def regular(cls, epochs: int, spacing_days: float) -> "AcquisitionTimeline":
        """Regular timeline 0, spacing, 2*spacing, ..."""
        if epochs < 1:
            raise ValueError("epochs must be >= 1")
        if spacing_days <= 0:
            raise ValueError("spacing_days must be positive")
        return cls(tuple(n * spacing_days for n in range(epochs)))


def covariance_matrix(
    model: TemporalCoherenceModel, timeline: AcquisitionTimeline
) -> np.ndarray:
    """Hermitian unit-diagonal covariance of a timeline under a model.

    Entry (m, n) is gamma(t_m - t_n). The result is Hermitian with ones on
    the diagonal and positive semidefinite by construction of the kernel.
    """
    t = timeline.as_array()
    return model.coherence(t[:, None] - t[None, :])


def phase_flat(model: TemporalCoherenceModel) -> TemporalCoherenceModel:
    """The same decorrelation structure with all phase ramps removed."""
    return TemporalCoherenceModel(
        components=tuple(
            CoherenceComponent(c.amplitude, c.decay_days, 0.0) for c in model.components
        ),
        nugget=model.nugget,
    )


# C-band Sentinel-1 model: two decaying transient components carrying phase
# ramps, a 13% stable floor, and a 44% white term.
SICILY_C_BAND = TemporalCoherenceModel(
    components=(
        CoherenceComponent(amplitude=0.18, decay_days=11.0, phase_rate=0.03),
        CoherenceComponent(amplitude=0.25, decay_days=50.0, phase_rate=0.002),
        CoherenceComponent(amplitude=0.13, decay_days=math.inf, phase_rate=0.0),
    ),
    nugget=0.44,
)

PRESETS: dict[str, TemporalCoherenceModel] = {
    "sicily-c-band": SICILY_C_BAND,
}


def get_preset(name: str) -> TemporalCoherenceModel:
    try:
        return PRESETS[name]
    except KeyError:
        known = ", ".join(sorted(PRESETS))
        raise InvalidModelError(f"unknown preset {name!r}; known presets: {known}") from None
