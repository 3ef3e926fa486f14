"""Pydantic request/response models for the service.

Bulk complex data crosses the wire as base64 of the same interleaved
little-endian float64 encoding used by the on-disk formats, so a client can
persist payloads verbatim. Non-decaying coherence components are sent with
``decay_days: null`` (JSON has no infinity).
"""

from __future__ import annotations

import base64
import math

import numpy as np
from pydantic import BaseModel, Field

from ..baselines import EmiConfig
from ..coherence import (
    AcquisitionTimeline,
    CoherenceComponent,
    TemporalCoherenceModel,
    get_preset,
)
from ..ripe import DEFAULT_BETA, PhaseSeries, RipeConfig
from ..simulate import SLCStack
from ..stackio import bytes_to_complex, complex_to_bytes


class ComponentSpec(BaseModel):
    amplitude: float
    decay_days: float | None = Field(default=None, description="null = non-decaying")
    phase_rate_rad_per_day: float = 0.0

    def to_component(self) -> CoherenceComponent:
        decay = math.inf if self.decay_days is None else self.decay_days
        return CoherenceComponent(
            amplitude=self.amplitude,
            decay_days=decay,
            phase_rate=self.phase_rate_rad_per_day,
        )

    @classmethod
    def from_component(cls, comp: CoherenceComponent) -> "ComponentSpec":
        return cls(
            amplitude=comp.amplitude,
            decay_days=None if math.isinf(comp.decay_days) else comp.decay_days,
            phase_rate_rad_per_day=comp.phase_rate,
        )


class ModelSpec(BaseModel):
    preset: str | None = "sicily-c-band"
    components: list[ComponentSpec] = []
    nugget: float | None = None

    def to_model(self) -> TemporalCoherenceModel:
        if self.components:
            return TemporalCoherenceModel(
                components=tuple(c.to_component() for c in self.components),
                nugget=self.nugget if self.nugget is not None else 0.0,
            )
        if self.preset is None:
            raise ValueError("model needs either a preset name or components")
        return get_preset(self.preset)

    @classmethod
    def from_model(cls, model: TemporalCoherenceModel) -> "ModelSpec":
        return cls(
            preset=None,
            components=[ComponentSpec.from_component(c) for c in model.components],
            nugget=model.nugget,
        )


class TimelineSpec(BaseModel):
    epochs: int = Field(ge=1)
    spacing_days: float = Field(gt=0.0)

    def to_timeline(self) -> AcquisitionTimeline:
        return AcquisitionTimeline.regular(self.epochs, self.spacing_days)


class StackPayload(BaseModel):
    times: list[float]
    looks: int = Field(ge=1)
    samples_b64: str

    def to_stack(self) -> SLCStack:
        samples = bytes_to_complex(base64.b64decode(self.samples_b64))
        expected = len(self.times) * self.looks
        if samples.size != expected:
            raise ValueError(
                f"stack payload carries {samples.size} samples, expected {expected}"
            )
        return SLCStack(
            samples=samples.reshape(len(self.times), self.looks),
            timeline=AcquisitionTimeline(tuple(self.times)),
        )

    @classmethod
    def from_stack(cls, stack: SLCStack) -> "StackPayload":
        return cls(
            times=list(stack.timeline.times),
            looks=stack.n_looks,
            samples_b64=base64.b64encode(complex_to_bytes(stack.samples)).decode(),
        )


class RipeOptions(BaseModel):
    beta: float = DEFAULT_BETA
    alpha: float = 1.0
    calibrate: bool = True
    calibration_cadence: int = 1
    stable_mode: str = "accumulate"
    snapshot_epoch: int = 10
    rescale: bool = False

    def to_config(self) -> RipeConfig:
        return RipeConfig(
            beta=self.beta,
            alpha=self.alpha,
            calibrate=self.calibrate,
            calibration_cadence=self.calibration_cadence,
            stable_mode=self.stable_mode,
            snapshot_epoch=self.snapshot_epoch,
            rescale=self.rescale,
        )


class EmiOptions(BaseModel):
    coherence_floor: float = 0.05
    shrinkage: float = 0.1

    def to_config(self) -> EmiConfig:
        return EmiConfig(coherence_floor=self.coherence_floor, shrinkage=self.shrinkage)


class PhaseSeriesPayload(BaseModel):
    phases: list[float]
    short_coherence: list[float] | None = None
    long_coherence: list[float] | None = None

    @classmethod
    def from_series(cls, series: PhaseSeries) -> "PhaseSeriesPayload":
        return cls(
            phases=[float(x) for x in series.phases],
            short_coherence=(
                None
                if series.short_coherence is None
                else [float(x) for x in series.short_coherence]
            ),
            long_coherence=(
                None
                if series.long_coherence is None
                else [float(x) for x in series.long_coherence]
            ),
        )

    def to_series(self) -> PhaseSeries:
        return PhaseSeries(
            phases=np.asarray(self.phases),
            short_coherence=(
                None if self.short_coherence is None else np.asarray(self.short_coherence)
            ),
            long_coherence=(
                None if self.long_coherence is None else np.asarray(self.long_coherence)
            ),
        )


class HealthResponse(BaseModel):
    status: str
    version: str


class PresetsResponse(BaseModel):
    presets: dict[str, ModelSpec]


class SimulateRequest(BaseModel):
    model: ModelSpec = ModelSpec()
    timeline: TimelineSpec
    looks: int = Field(default=200, ge=1)
    seed: int = 0


class SimulateResponse(BaseModel):
    stack: StackPayload


class EstimateRequest(BaseModel):
    stack: StackPayload
    options: RipeOptions = RipeOptions()


class EstimateResponse(BaseModel):
    series: PhaseSeriesPayload
    state_b64: str
    config_digest: str


class AppendRequest(BaseModel):
    state_b64: str
    acquisitions: StackPayload
    options: RipeOptions = RipeOptions()


class AppendResponse(BaseModel):
    series: PhaseSeriesPayload
    state_b64: str
    start_epoch: int


class RunRequest(BaseModel):
    model: ModelSpec = ModelSpec()
    timeline: TimelineSpec
    looks: int = Field(default=200, ge=1)
    trials: int = Field(default=500, ge=2)
    base_seed: int = 0
    methods: list[str]
    ripe: RipeOptions = RipeOptions()
    emi: EmiOptions = EmiOptions()
    wavelength_m: float = Field(default=0.05546, gt=0.0)
    same_seed: bool = False
    deformation_rate_rad_per_day: float = 0.0
    workers: int = Field(default=1, ge=1)


class CurvesPayload(BaseModel):
    method: str
    time_days: list[float]
    bias_rad: list[float]
    bias_mm: list[float]
    std_rad: list[float]
    std_mm: list[float]
    mean_coh_short: list[float] | None = None
    mean_coh_long: list[float] | None = None
    trials: int
    excluded: int


class RunResponse(BaseModel):
    curves: list[CurvesPayload]
