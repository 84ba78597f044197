"""Anchoring control laws: orientation torque, lateral PD force and an
emulated pitch-steady template."""

from __future__ import annotations

from dataclasses import dataclass, fields

import numpy as np

from .potential import grad
from .so3 import Rotation, pitch_decompose, wrap_angle


class _Unchecked:
    @classmethod
    def unchecked(cls, **values):
        """Build without the positivity checks (for degenerate-gain analysis)."""
        obj = object.__new__(cls)
        for f in fields(cls):
            object.__setattr__(obj, f.name, float(values.get(f.name, f.default))
                               if f.type == "float" else values.get(f.name, f.default))
        return obj


@dataclass(frozen=True)
class AnchorGains(_Unchecked):
    """Roll/yaw damping ``kappa1``/``kappa2`` (N m s) and lateral PD gains."""

    kappa1: float = 1.0
    kappa2: float = 1.0
    kp_lat: float = 50.0
    kd_lat: float = 10.0

    def __post_init__(self):
        if not (self.kappa1 > 0.0 and self.kappa2 > 0.0):
            raise ValueError("kappa1 and kappa2 must be strictly positive")
        if self.kp_lat < 0.0 or self.kd_lat < 0.0:
            raise ValueError("lateral gains must be non-negative")

    @property
    def damping(self) -> np.ndarray:
        """``K_D = diag(kappa1, 0, kappa2)``; its kernel is span(y)."""
        return np.diag([self.kappa1, 0.0, self.kappa2])


@dataclass(frozen=True)
class TemplateParams(_Unchecked):
    """Linear pitch template ``mu p'' + beta p' + gamma p = 0`` about ``pitch0``.

    The template is realized as a pitch-axis torque, so ``mu`` is played by the
    stance-frame pitch inertia; the field is kept for reporting the template's
    own model.
    """

    beta: float = 1.0
    gamma: float = 2.0
    mu: float = 0.15
    enabled: bool = True
    pitch0: float = 0.0

    def __post_init__(self):
        if self.enabled and not (self.beta > 0.0 and self.gamma > 0.0 and self.mu > 0.0):
            raise ValueError("template parameters must be strictly positive when enabled")

    def model_matrix(self) -> np.ndarray:
        return np.array([[0.0, 1.0], [-self.gamma / self.mu, -self.beta / self.mu]])


DISABLED_TEMPLATE = TemplateParams(enabled=False)


@dataclass(frozen=True)
class Wrench:
    force: np.ndarray
    torque: np.ndarray


def anchor_torque(R: Rotation, omega, g: AnchorGains) -> np.ndarray:
    omega = np.asarray(omega, dtype=float)
    return -grad(R) - g.damping @ omega


def lateral_force(p_y: float, v_y: float, g: AnchorGains) -> float:
    return -g.kp_lat * p_y - g.kd_lat * v_y


def template_pitch_torque(pitch: float, pitch_rate: float, t: TemplateParams) -> np.ndarray:
    """PD torque about y. ``pitch`` is the template coordinate whose rate is ``omega_y``."""
    if not t.enabled:
        return np.zeros(3)
    return np.array([0.0, -t.gamma * pitch - t.beta * pitch_rate, 0.0])


def template_coordinate(R: Rotation, t: TemplateParams) -> float:
    """Template pitch error for the current pose.

    Under ``Rdot = R J(w)^T`` a pure pitch ``rot_y(phi)`` evolves with
    ``phi' = -w_y``, so the coordinate advancing with ``w_y`` is
    ``pitch0 - phi`` (wrapped).
    """
    pitch, _ = pitch_decompose(R)
    return wrap_angle(t.pitch0 - pitch)


def total_wrench(state, g: AnchorGains, t: TemplateParams) -> Wrench:
    """Parallel composition of anchoring and template inputs for a ``BodyState``."""
    omega = np.asarray(state.omega, dtype=float)
    torque = anchor_torque(state.R, omega, g)
    if t.enabled:
        torque = torque + template_pitch_torque(template_coordinate(state.R, t), omega[1], t)
    force = np.array([0.0, lateral_force(state.p_y, state.v_y, g), 0.0])
    return Wrench(force, torque)
