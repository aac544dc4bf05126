"""JSON scenario files: validation, defaults and round-tripping."""

from __future__ import annotations

import hashlib
import json
from dataclasses import fields
from importlib import resources
from pathlib import Path

import jsonschema

from .errors import ConfigError
from .harness import ScenarioConfig
from .measurement import EmitterPosition, SignalParams, UavState

_SCHEMA = None


def schema() -> dict:
    global _SCHEMA
    if _SCHEMA is None:
        text = resources.files("uavloc").joinpath("config.schema.json").read_text()
        _SCHEMA = json.loads(text)
    return _SCHEMA


def _path(err) -> str:
    parts = [str(p) for p in err.absolute_path]
    if err.validator == "additionalProperties":
        # jsonschema reports the parent; name the offending key instead
        extra = set(err.instance) - set(err.schema.get("properties", {}))
        parts.extend(sorted(extra)[:1])
    return ".".join(parts) or "<root>"


def config_from_dict(data: dict) -> ScenarioConfig:
    """Validate ``data`` and fill unspecified fields with the default scenario."""
    validator = jsonschema.Draft202012Validator(schema())
    errors = sorted(validator.iter_errors(data), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        raise ConfigError(_path(err), err.message)

    base = ScenarioConfig()
    try:
        em = data.get("emitter", {})
        emitter = EmitterPosition(float(em.get("x", base.emitter.x)), float(em.get("y", base.emitter.y)))
    except ValueError as exc:
        raise ConfigError("emitter", str(exc)) from None
    try:
        ui = data.get("uav_init", {})
        uav = UavState(
            ui.get("position", base.uav_init.position.tolist()),
            ui.get("velocity", base.uav_init.velocity.tolist()),
        )
    except ValueError as exc:
        raise ConfigError("uav_init.velocity", str(exc)) from None
    try:
        sig = {f.name: getattr(base.signal, f.name) for f in fields(SignalParams)}
        sig.update(data.get("signal", {}))
        signal = SignalParams(**sig)
    except ValueError as exc:
        raise ConfigError("signal", str(exc)) from None

    top = {}
    for key in ("num_frames", "trajectory_enabled", "num_trials", "v_max", "seed", "normalize_line_row"):
        if key in data:
            top[key] = data[key]
    if data.get("snr_sweep") is not None:
        top["snr_sweep"] = tuple(float(v) for v in data["snr_sweep"])
    try:
        return ScenarioConfig(emitter=emitter, uav_init=uav, signal=signal, **top)
    except ValueError as exc:
        raise ConfigError("<root>", str(exc)) from None


def parse_config(path) -> ScenarioConfig:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except FileNotFoundError:
        raise ConfigError(str(path), "file not found") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(str(path), f"invalid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError("<root>", "top level must be an object")
    return config_from_dict(data)


def config_to_dict(config: ScenarioConfig) -> dict:
    sig = config.signal
    return {
        "emitter": {"x": config.emitter.x, "y": config.emitter.y},
        "uav_init": {
            "position": [float(v) for v in config.uav_init.position],
            "velocity": [float(v) for v in config.uav_init.velocity],
        },
        "signal": {f.name: getattr(sig, f.name) for f in fields(SignalParams)},
        "num_frames": config.num_frames,
        "trajectory_enabled": config.trajectory_enabled,
        "num_trials": config.num_trials,
        "snr_sweep": None if config.snr_sweep is None else list(config.snr_sweep),
        "v_max": config.v_max,
        "seed": config.seed,
        "normalize_line_row": config.normalize_line_row,
    }


def serialize_config(config: ScenarioConfig) -> str:
    return json.dumps(config_to_dict(config), indent=2, sort_keys=True)


def config_hash(config: ScenarioConfig) -> str:
    canonical = json.dumps(config_to_dict(config), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()
