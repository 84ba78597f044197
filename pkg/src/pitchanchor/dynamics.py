"""Closed-loop rigid-body dynamics on TSO(3) with a decoupled lateral channel.

    Rdot   = R J(w)^T
    wdot   = M(R)^{-1} (tau - w x M(R) w),     M(R) = R^T I_B R
    p_y''  = u_y / m

``w`` is the stance-frame angular velocity. The total energy
``eta = phi(R) + 1/2 w^T M(R) w`` is non-increasing for the anchoring-only
loop, with ``eta' = -w^T K_D w``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from ._backend import kernels
from .control import AnchorGains, TemplateParams, total_wrench
from .potential import phi
from .so3 import Rotation, skew

DEFAULT_H = 1e-3

COLUMNS = (
    "t", "qw", "qx", "qy", "qz", "wx", "wy", "wz", "py", "vy",
    "phi", "eta", "eta_rate", "swing", "pitch",
)
_COL = {name: i for i, name in enumerate(COLUMNS)}


class NumericalAbort(ArithmeticError):
    """The integrated state became non-finite."""

    def __init__(self, message: str, step: int, last_state: np.ndarray):
        super().__init__(message)
        self.step = step
        self.last_state = last_state


@dataclass(frozen=True)
class InertiaModel:
    I_B: tuple[float, float, float] = (0.05, 0.15, 0.15)
    m: float = 8.0

    def __post_init__(self):
        a, b, c = (float(v) for v in self.I_B)
        object.__setattr__(self, "I_B", (a, b, c))
        if min(a, b, c) <= 0.0 or self.m <= 0.0:
            raise ValueError("inertia entries and mass must be strictly positive")
        if a > b + c or b > a + c or c > a + b:
            raise ValueError(f"inertia {self.I_B} violates the triangle inequality")


@dataclass(frozen=True)
class BodyState:
    R: Rotation = field(default_factory=Rotation.identity)
    omega: np.ndarray = field(default_factory=lambda: np.zeros(3))
    p_y: float = 0.0
    v_y: float = 0.0
    t: float = 0.0

    def __post_init__(self):
        w = np.asarray(self.omega, dtype=float).reshape(3)
        if not np.all(np.isfinite(w)):
            raise ValueError("angular velocity must be finite")
        object.__setattr__(self, "omega", w)

    def to_vector(self) -> np.ndarray:
        return np.concatenate([self.R.q, self.omega, [self.p_y, self.v_y]])

    @classmethod
    def from_vector(cls, v, t: float = 0.0) -> BodyState:
        v = np.asarray(v, dtype=float)
        return cls(Rotation(v[:4]), v[4:7], float(v[7]), float(v[8]), t)


@dataclass(frozen=True)
class StateDerivative:
    R_dot: np.ndarray
    q_dot: np.ndarray
    omega_dot: np.ndarray
    p_dot: float
    v_dot: float


def kernel_params(inert: InertiaModel, gains: AnchorGains, template: TemplateParams) -> np.ndarray:
    """Flat parameter vector in the kernels' ``PARAM_NAMES`` order."""
    return np.array([
        *inert.I_B, inert.m,
        gains.kappa1, gains.kappa2, gains.kp_lat, gains.kd_lat,
        1.0 if template.enabled else 0.0, template.gamma, template.beta, template.pitch0,
    ])


def inertia_stance(R: Rotation, inert: InertiaModel) -> np.ndarray:
    Rm = R.matrix
    return Rm.T @ np.diag(inert.I_B) @ Rm


def vector_field(state: BodyState, inert: InertiaModel, gains: AnchorGains,
                 template: TemplateParams) -> StateDerivative:
    """Reference (matrix-form) evaluation of the closed-loop vector field."""
    Rm = state.R.matrix
    w = state.omega
    M = inertia_stance(state.R, inert)
    wrench = total_wrench(state, gains, template)
    omega_dot = np.linalg.solve(M, wrench.torque - np.cross(w, M @ w))
    R_dot = Rm @ skew(w).T
    qw, qx, qy, qz = state.R.q
    # q (x) (0, -w) / 2
    q_dot = -0.5 * np.array([
        -(qx * w[0] + qy * w[1] + qz * w[2]),
        qw * w[0] + qy * w[2] - qz * w[1],
        qw * w[1] - qx * w[2] + qz * w[0],
        qw * w[2] + qx * w[1] - qy * w[0],
    ])
    return StateDerivative(R_dot, q_dot, omega_dot, state.v_y, wrench.force[1] / inert.m)


def energy(state: BodyState, inert: InertiaModel) -> float:
    w = state.omega
    return phi(state.R) + 0.5 * float(w @ inertia_stance(state.R, inert) @ w)


def energy_rate(state: BodyState, gains: AnchorGains) -> float:
    """``-w^T K_D w`` for the anchoring-only loop."""
    wx, _, wz = state.omega
    return -gains.kappa1 * wx * wx - gains.kappa2 * wz * wz


@dataclass(frozen=True)
class Trajectory:
    """Uniformly sampled closed-loop trajectory; one row per sample, see ``COLUMNS``."""

    data: np.ndarray
    h: float

    def __len__(self) -> int:
        return self.data.shape[0]

    def column(self, name: str) -> np.ndarray:
        return self.data[:, _COL[name]]

    @property
    def t(self) -> np.ndarray:
        return self.data[:, 0]

    @property
    def quaternions(self) -> np.ndarray:
        return self.data[:, 1:5]

    @property
    def omega(self) -> np.ndarray:
        return self.data[:, 5:8]

    @property
    def eta(self) -> np.ndarray:
        return self.column("eta")

    @property
    def eta_rate(self) -> np.ndarray:
        return self.column("eta_rate")

    @property
    def phi(self) -> np.ndarray:
        return self.column("phi")

    @property
    def swing(self) -> np.ndarray:
        return self.column("swing")

    def state(self, k: int) -> BodyState:
        row = self.data[k]
        return BodyState.from_vector(row[1:10], float(row[0]))

    @property
    def final(self) -> BodyState:
        return self.state(-1)


def _n_steps(h: float, T: float) -> int:
    if not h > 0.0:
        raise ValueError("step size must be positive")
    if T < h:
        raise ValueError("duration must be at least one step")
    return int(round(T / h))


def simulate(state0: BodyState, inert: InertiaModel, gains: AnchorGains,
             template: TemplateParams, h: float = DEFAULT_H, T: float = 30.0) -> Trajectory:
    """Fixed-step RK4 with quaternion renormalization after every step."""
    n = _n_steps(h, T)
    data, n_valid = kernels.trajectory(
        state0.to_vector(), kernel_params(inert, gains, template), h, n, state0.t)
    if n_valid < n + 1:
        last = data[n_valid - 1, 1:10].copy()
        raise NumericalAbort(
            f"state became non-finite at step {n_valid} (t = {state0.t + n_valid * h:.6g} s)",
            n_valid, last)
    return Trajectory(data, h)


class Outcome(enum.Enum):
    CONVERGED_P = "ConvergedP"
    CONVERGED_Q = "ConvergedQ"
    UNDECIDED = "Undecided"


@dataclass(frozen=True)
class Convergence:
    outcome: Outcome
    time: float | None = None


def _tail_start(n_samples: int) -> int:
    """First index of the trailing 10 % of samples."""
    return n_samples - max(1, math.ceil(0.1 * n_samples))


def classify_tail(last_fail_p: int, last_fail_q: int, n_samples: int, t0: float,
                  h: float) -> Convergence:
    tail = _tail_start(n_samples)
    if last_fail_p < tail:
        return Convergence(Outcome.CONVERGED_P, t0 + (last_fail_p + 1) * h)
    if last_fail_q < tail:
        return Convergence(Outcome.CONVERGED_Q, t0 + (last_fail_q + 1) * h)
    return Convergence(Outcome.UNDECIDED)


def convergence_probe(traj: Trajectory, tol_angle: float = 1e-3,
                      tol_omega: float = 1e-3) -> Convergence:
    """Detect entry into P x W or Q x U sustained over the trailing 10 % of samples.

    The reported time is the first sample after which the criterion holds
    through the end of the trajectory.
    """
    if not (tol_angle > 0.0 and tol_omega > 0.0):
        raise ValueError("tolerances must be positive")
    swing = traj.swing
    w = traj.omega
    tr = np.sqrt(w[:, 0] ** 2 + w[:, 2] ** 2)
    near = tr <= tol_omega
    ok_p = (swing <= tol_angle) & near
    ok_q = (swing >= math.pi - tol_angle) & near

    def last_fail(ok):
        bad = np.flatnonzero(~ok)
        return int(bad[-1]) if bad.size else -1

    return classify_tail(last_fail(ok_p), last_fail(ok_q), len(traj), float(traj.t[0]), traj.h)


@dataclass(frozen=True)
class ProbeResult:
    convergence: Convergence
    final: BodyState
    max_eta_rise: float


def simulate_probe(state0: BodyState, inert: InertiaModel, gains: AnchorGains,
                   template: TemplateParams, h: float = DEFAULT_H, T: float = 120.0,
                   tol_angle: float = 1e-3, tol_omega: float = 1e-3) -> ProbeResult:
    """Same as ``convergence_probe(simulate(...))`` without storing the samples."""
    n = _n_steps(h, T)
    last_p, last_q, n_valid, final, rise = kernels.probe(
        state0.to_vector(), kernel_params(inert, gains, template), h, n, tol_angle, tol_omega)
    if n_valid < n + 1:
        raise NumericalAbort(f"state became non-finite at step {n_valid}", n_valid, final)
    conv = classify_tail(last_p, last_q, n + 1, state0.t, h)
    return ProbeResult(conv, BodyState.from_vector(final, state0.t + n * h), float(rise))
