"""Experiment configuration: JSON files validated against ``schema/config.schema.json``
and merged over built-in defaults."""

from __future__ import annotations

import copy
import json
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Any

import jsonschema
import numpy as np

from .control import AnchorGains, TemplateParams
from .dynamics import BodyState, InertiaModel
from .so3 import Rotation, random_rotation, rot_axis_angle, rot_x

DEFAULTS: dict[str, Any] = {
    "inertia": [0.05, 0.15, 0.15],
    "mass": 8.0,
    "gains": {"kappa1": 1.0, "kappa2": 1.0, "kp_lat": 50.0, "kd_lat": 10.0},
    "template": {"enabled": True, "gamma": 2.0, "beta": 1.0, "mu": 0.15, "pitch0": 0.0},
    "integrator": {"h": 1e-3, "T": 30.0},
    "tolerances": {"angle": 1e-3, "omega": 1e-3, "membership": 1e-9},
    "monte_carlo": {"n": 1000, "seed": 7, "omega_max": 3.0, "T": 120.0, "sampler": "haar"},
    "initial_state": {
        "rotation": {"axis": [1.0, 0.0, 0.0], "angle": 0.5},
        "seed": 0,
        "omega": [0.0, 0.0, 0.0],
        "p_y": 0.0,
        "v_y": 0.0,
    },
    "verify": {
        "n_samples": 1000,
        "n_trajectories": 5,
        "T": 5.0,
        "seed": 0,
        "tolerances": {
            "grad_fd": 1e-6,
            "trace_form": 1e-12,
            "critical_set": 1e-12,
            "hessian": 1e-12,
            "quadratic_form": 1e-10,
            "taylor": 1e-6,
            "energy_step": 1e-9,
            "energy_rate_rms": 1e-4,
            "gyroscopic": 1e-13,
            "limit_set": 1e-12,
        },
    },
    "stance": {
        "p": [0.1, 0.0, -0.2],
        "q": [0.0, 0.1, 0.0],
        "force": [0.0, 0.0, 80.0],
        "torque": [1.0, 0.0, 0.0],
        "f_min": 0.0,
        "gravity_ff": None,
    },
}


class ConfigError(ValueError):
    """Invalid or unreadable configuration."""


def schema() -> dict:
    text = resources.files("pitchanchor").joinpath("schema/config.schema.json").read_text()
    return json.loads(text)


_VALIDATOR = jsonschema.Draft202012Validator(schema())


def _merge(base: dict, override: dict) -> dict:
    out = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], value)
        else:
            out[key] = copy.deepcopy(value)
    return out


def _validate(doc: Any, where: str) -> None:
    errors = sorted(_VALIDATOR.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        e = errors[0]
        path = "/".join(str(p) for p in e.absolute_path) or "<root>"
        raise ConfigError(f"{where}: {path}: {e.message}")


@dataclass(frozen=True)
class ExperimentConfig:
    data: dict

    @classmethod
    def from_dict(cls, doc: dict | None = None, where: str = "config") -> ExperimentConfig:
        doc = {} if doc is None else doc
        _validate(doc, where)
        merged = _merge(DEFAULTS, doc)
        _validate(merged, where)
        return cls(merged)

    def with_overrides(self, overrides: dict) -> ExperimentConfig:
        return ExperimentConfig.from_dict(_merge(self.data, overrides))

    def __getitem__(self, key):
        return self.data[key]

    def inertia(self) -> InertiaModel:
        try:
            return InertiaModel(tuple(self.data["inertia"]), float(self.data["mass"]))
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def gains(self, strict: bool = True) -> AnchorGains:
        g = self.data["gains"]
        if not strict:
            return AnchorGains.unchecked(**g)
        try:
            return AnchorGains(**g)
        except ValueError as exc:
            raise ConfigError(f"gains: {exc}") from exc

    def template(self, strict: bool = True) -> TemplateParams:
        t = self.data["template"]
        if not strict:
            return TemplateParams.unchecked(**t)
        try:
            return TemplateParams(**t)
        except ValueError as exc:
            raise ConfigError(f"template: {exc}") from exc

    def initial_state(self) -> BodyState:
        spec = self.data["initial_state"]
        return BodyState(
            build_rotation(spec["rotation"], spec["seed"]),
            np.array(spec["omega"], dtype=float),
            float(spec["p_y"]),
            float(spec["v_y"]),
        )


def build_rotation(spec, seed: int = 0) -> Rotation:
    if spec == "random":
        return random_rotation(np.random.default_rng(seed))
    if spec == "q0":
        return rot_x(math.pi)
    if "quaternion" in spec:
        try:
            return Rotation(np.array(spec["quaternion"], dtype=float))
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    axis = np.array(spec["axis"], dtype=float)
    n = float(np.linalg.norm(axis))
    if n == 0.0:
        raise ConfigError("initial_state.rotation.axis must be non-zero")
    return rot_axis_angle(axis / n, float(spec["angle"]))


def load_config(path: str | Path | None = None, overrides: dict | None = None) -> ExperimentConfig:
    doc: dict = {}
    if path is not None:
        try:
            doc = json.loads(Path(path).read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc.strerror}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON: {exc}") from exc
        if not isinstance(doc, dict):
            raise ConfigError(f"{path}: top level must be an object")
    if overrides:
        doc = _merge(doc, overrides)
    return ExperimentConfig.from_dict(doc, where=str(path) if path else "config")
