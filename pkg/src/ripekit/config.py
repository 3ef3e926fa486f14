"""Run configuration: flat key=value files, environment overrides, JSON round-trip.

The on-disk format is line oriented and diff friendly: ``key = value`` pairs,
``#`` comments, and repeated ``[component]`` blocks holding ``amplitude``,
``decay_days`` and ``phase_rate_rad_per_day`` for explicit coherence models.
``nugget`` is a top-level key. Every validation error carries the 1-based line
it came from.

Run metadata sidecars are JSON with the resolved configuration under a
``config`` key; :func:`load_config` accepts those directly, so a sidecar can
be replayed as-is.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path

from .baselines import EmiConfig
from .coherence import (
    AcquisitionTimeline,
    CoherenceComponent,
    TemporalCoherenceModel,
    get_preset,
)
from .errors import ConfigError, InvalidModelError
from .evaluation import DEFAULT_WAVELENGTH_M
from .ripe import DEFAULT_BETA, RipeConfig

ENV_PREFIX = "RIPE_"

METHOD_ALIASES = {
    "ripe": "ripe-calibrated",
    "ripe-nocal": "ripe-uncalibrated",
    "ripe-calibrated": "ripe-calibrated",
    "ripe-uncalibrated": "ripe-uncalibrated",
    "emi": "emi",
    "direct": "direct",
}

_COMPONENT_KEYS = ("amplitude", "decay_days", "phase_rate_rad_per_day")


@dataclass(frozen=True)
class RunConfig:
    """Everything a simulation/estimation/Monte Carlo run needs."""

    preset: str | None = "sicily-c-band"
    components: tuple[dict, ...] = ()
    nugget: float | None = None
    epochs: int = 220
    spacing_days: float = 6.0
    looks: int = 200
    trials: int = 500
    base_seed: int = 20230811
    methods: tuple[str, ...] = ("ripe-calibrated", "ripe-uncalibrated", "emi")
    beta: float = DEFAULT_BETA
    alpha: float = 1.0
    calibration_cadence: int = 1
    stable_mode: str = "accumulate"
    snapshot_epoch: int = 10
    rescale: bool = False
    emi_floor: float = 0.05
    emi_shrinkage: float = 0.1
    wavelength_m: float = DEFAULT_WAVELENGTH_M
    out: str = "runs/latest"
    same_seed: bool = False
    workers: int = 1
    deformation_rate_rad_per_day: float = 0.0

    def validate(self) -> "RunConfig":
        if self.epochs < 2:
            raise ConfigError("epochs must be >= 2 (estimation needs N >= 2)")
        if self.spacing_days <= 0:
            raise ConfigError("spacing_days must be positive")
        if self.looks < 1:
            raise ConfigError("looks must be >= 1")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if self.preset is not None and self.components:
            raise ConfigError("give either a preset or explicit components, not both")
        for name in self.methods:
            if name not in METHOD_ALIASES.values():
                raise ConfigError(
                    f"unknown method {name!r}; valid methods: "
                    + ", ".join(sorted(set(METHOD_ALIASES)))
                )
        try:
            self.model()
            self.ripe_config(calibrate=True)
            self.emi_config()
        except (InvalidModelError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc
        if self.wavelength_m <= 0:
            raise ConfigError("wavelength_m must be positive")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        return self

    def model(self) -> TemporalCoherenceModel:
        if self.preset is not None:
            return get_preset(self.preset)
        comps = tuple(
            CoherenceComponent(
                amplitude=c["amplitude"],
                decay_days=c["decay_days"],
                phase_rate=c.get("phase_rate_rad_per_day", 0.0),
            )
            for c in self.components
        )
        return TemporalCoherenceModel(
            components=comps, nugget=self.nugget if self.nugget is not None else 0.0
        )

    def timeline(self) -> AcquisitionTimeline:
        return AcquisitionTimeline.regular(self.epochs, self.spacing_days)

    def ripe_config(self, calibrate: bool) -> RipeConfig:
        return RipeConfig(
            beta=self.beta,
            alpha=self.alpha,
            calibrate=calibrate,
            calibration_cadence=self.calibration_cadence,
            stable_mode=self.stable_mode,
            snapshot_epoch=self.snapshot_epoch,
            rescale=self.rescale,
        )

    def emi_config(self) -> EmiConfig:
        return EmiConfig(coherence_floor=self.emi_floor, shrinkage=self.emi_shrinkage)

    def method_configs(self) -> dict:
        out: dict = {}
        for name in self.methods:
            if name == "ripe-calibrated":
                out[name] = self.ripe_config(calibrate=True)
            elif name == "ripe-uncalibrated":
                out[name] = self.ripe_config(calibrate=False)
            elif name == "emi":
                out[name] = self.emi_config()
            else:
                out[name] = None
        return out

    def to_json_dict(self) -> dict:
        doc = asdict(self)
        doc["methods"] = list(self.methods)
        doc["components"] = [
            {
                key: ("inf" if key == "decay_days" and math.isinf(val) else val)
                for key, val in comp.items()
            }
            for comp in self.components
        ]
        return doc

    @classmethod
    def from_json_dict(cls, doc: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(doc) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
        doc = dict(doc)
        if "components" in doc:
            doc["components"] = tuple(
                {key: float(val) if key in _COMPONENT_KEYS else val for key, val in comp.items()}
                for comp in doc["components"]
            )
        if "methods" in doc:
            doc["methods"] = tuple(doc["methods"])
        return cls(**doc).validate()


def canonical_methods(raw: str) -> tuple[str, ...]:
    """Map a comma-separated method list to canonical tags."""
    out = []
    for part in raw.split(","):
        name = part.strip()
        if not name:
            continue
        if name not in METHOD_ALIASES:
            raise ConfigError(
                f"unknown method {name!r}; valid methods: "
                + ", ".join(sorted(set(METHOD_ALIASES)))
            )
        out.append(METHOD_ALIASES[name])
    if not out:
        raise ConfigError("method list is empty")
    return tuple(out)


_BOOL_VALUES = {"true": True, "1": True, "yes": True, "false": False, "0": False, "no": False}


def _coerce(key: str, value: str, line: int | None):
    int_keys = {
        "epochs", "looks", "trials", "base_seed", "calibration_cadence",
        "snapshot_epoch", "workers",
    }
    float_keys = {
        "spacing_days", "beta", "alpha", "emi_floor", "emi_shrinkage",
        "wavelength_m", "deformation_rate_rad_per_day", "nugget",
    }
    bool_keys = {"rescale", "same_seed"}
    try:
        if key in int_keys:
            return int(value)
        if key in float_keys:
            return float(value)
        if key in bool_keys:
            try:
                return _BOOL_VALUES[value.lower()]
            except KeyError:
                raise ValueError(f"expected a boolean, got {value!r}") from None
        if key == "methods":
            return canonical_methods(value)
        if key in ("preset", "stable_mode", "out"):
            return value
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"invalid value for {key}: {exc}", line=line) from exc
    raise ConfigError(f"unknown config key {key!r}", line=line)


def parse_flat_config(text: str) -> RunConfig:
    """Parse the flat key=value format with [component] blocks."""
    top: dict = {}
    components: list[dict] = []
    current: dict | None = None

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line == "[component]":
            current = {}
            components.append(current)
            continue
        if line.startswith("["):
            raise ConfigError(f"unknown section {line!r}", line=lineno)
        if "=" not in line:
            raise ConfigError(f"expected key = value, got {line!r}", line=lineno)
        key, _, value = line.partition("=")
        key = key.strip().lower()
        value = value.strip()
        if key == "seed":
            key = "base_seed"
        if current is not None and key in _COMPONENT_KEYS:
            if key in current:
                raise ConfigError(f"duplicate component key {key!r}", line=lineno)
            try:
                current[key] = float(value)
            except ValueError as exc:
                raise ConfigError(f"invalid value for {key}: {exc}", line=lineno) from exc
            continue
        current = None  # non-component key closes the block
        if key in top:
            raise ConfigError(f"duplicate key {key!r}", line=lineno)
        top[key] = _coerce(key, value, lineno)

    if components:
        top["components"] = tuple(components)
        top.setdefault("preset", None)
        for idx, comp in enumerate(components):
            if "amplitude" not in comp or "decay_days" not in comp:
                raise ConfigError(
                    f"component {idx + 1} needs both amplitude and decay_days"
                )
    try:
        return replace(RunConfig(), **top).validate()
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def env_overrides(environ=None) -> dict:
    """Collect RIPE_* environment overrides as coerced config values."""
    if environ is None:
        environ = os.environ
    out = {}
    overridable = {f.name for f in fields(RunConfig)} - {"components", "nugget"}
    overridable.add("seed")
    for name, value in environ.items():
        if not name.startswith(ENV_PREFIX):
            continue
        key = name[len(ENV_PREFIX) :].lower()
        if key == "seed":
            key = "base_seed"
        if key == "server":
            continue  # transport option, handled by the CLI
        if key not in overridable:
            raise ConfigError(f"unknown environment override {name}")
        out[key] = _coerce(key, value, None)
    return out


def load_config(path, environ=None, overrides: dict | None = None) -> RunConfig:
    """Load a config file (flat or JSON sidecar), then apply env and overrides.

    Precedence: explicit overrides > RIPE_* environment > file > defaults.
    """
    config = RunConfig()
    if path is not None:
        text = Path(path).read_text()
        if text.lstrip().startswith("{"):
            doc = json.loads(text)
            if "config" in doc and isinstance(doc["config"], dict):
                doc = doc["config"]
            config = RunConfig.from_json_dict(doc)
        else:
            config = parse_flat_config(text)
    merged = env_overrides(environ)
    if overrides:
        merged.update({k: v for k, v in overrides.items() if v is not None})
    if merged:
        if "components" in merged:
            merged.setdefault("preset", None)
        config = replace(config, **merged).validate()
    return config
