"""Numerical property suites behind ``pitchanchor verify``.

Each check returns a :class:`PropertyResult`; a failing result carries the
worst case so it can be replayed.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

from . import potential
from .basin import sample_omega
from .config import ExperimentConfig
from .control import DISABLED_TEMPLATE
from .dynamics import BodyState, inertia_stance, simulate
from .so3 import Rotation, SetTag, classify_set, exp_map, random_rotation, rot_x, rot_y, skew
from .stability import limit_set_residual

FD_STEP = 1e-5
TAYLOR_STEPS = (1e-3, 2e-3, 4e-3)


@dataclass
class PropertyResult:
    name: str
    passed: bool
    max_error: float
    tolerance: float
    case: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


def _result(name, errors, cases, tol) -> PropertyResult:
    errors = np.asarray(errors, dtype=float)
    k = int(np.argmax(errors))
    worst = float(errors[k])
    return PropertyResult(name, bool(worst <= tol), worst, tol, cases[k])


def fd_gradient(R: Rotation, step: float = FD_STEP) -> np.ndarray:
    """Central differences of the potential along ``R exp(-t J(e_i))``.

    The minus sign matches the kinematics ``Rdot = R J(w)^T``.
    """
    g = np.zeros(3)
    for i in range(3):
        e = np.zeros(3)
        e[i] = step
        g[i] = (potential.phi(R @ exp_map(-e)) - potential.phi(R @ exp_map(e))) / (2.0 * step)
    return g


def check_gradient_fd(rots, grad_fn, tol) -> PropertyResult:
    errs, cases = [], []
    for R in rots:
        errs.append(float(np.max(np.abs(grad_fn(R) - fd_gradient(R)))))
        cases.append({"q": R.q.tolist()})
    return _result("gradient_fd", errs, cases, tol)


def check_trace_form(rots, us, grad_fn, tol) -> PropertyResult:
    errs, cases = [], []
    for R, u in zip(rots, us):
        errs.append(abs(potential.grad_trace_form(R, u) - float(grad_fn(R) @ u)))
        cases.append({"q": R.q.tolist(), "u": u.tolist()})
    return _result("trace_form", errs, cases, tol)


def critical_samples(rng: np.random.Generator, n: int) -> list[tuple[Rotation, np.ndarray]]:
    """Elements of P and Q (alternating) paired with their expected Hessians."""
    out = []
    for k in range(n):
        a = rng.uniform(-math.pi, math.pi)
        if k % 2 == 0:
            out.append((rot_y(a), np.diag([1.0, 0.0, 1.0])))
        else:
            out.append((rot_x(math.pi) @ rot_y(a), np.diag([-1.0, 0.0, -1.0])))
    return out


def check_critical_set(rots, crit, grad_fn, tol, membership_tol) -> PropertyResult:
    """grad(R) = 0 exactly on P and Q, and is bounded away from 0 elsewhere."""
    errs, cases = [], []
    for R, _ in crit:
        errs.append(float(np.linalg.norm(grad_fn(R))))
        cases.append({"q": R.q.tolist(), "expected": "critical"})
    for R in rots:
        tag = classify_set(R, membership_tol).tag
        g = float(np.linalg.norm(grad_fn(R)))
        if tag is SetTag.REGULAR:
            # any regular sample with vanishing gradient is a violation
            errs.append(0.0 if g > tol else math.inf)
        else:
            errs.append(g)
        cases.append({"q": R.q.tolist(), "tag": tag.value, "grad_norm": g})
    return _result("critical_set", errs, cases, tol)


def check_hessian(crit, tol) -> PropertyResult:
    errs, cases = [], []
    for R, H_expected in crit:
        H = potential.hessian(R)
        errs.append(max(float(np.max(np.abs(H - H_expected))),
                        float(np.max(np.abs(H @ np.array([0.0, 1.0, 0.0]))))))
        cases.append({"q": R.q.tolist()})
    return _result("hessian_values", errs, cases, tol)


def check_quadratic_form(crit, us, tol) -> PropertyResult:
    errs, cases = [], []
    for (R, _), u in zip(crit, us):
        errs.append(abs(potential.hessian_quadratic_form(R, u) - float(u @ potential.hessian(R) @ u)))
        cases.append({"q": R.q.tolist(), "u": u.tolist()})
    return _result("hessian_quadratic_form", errs, cases, tol)


def taylor_coefficient(R: Rotation, u: np.ndarray, steps=TAYLOR_STEPS) -> float:
    """Fit ``phi(R exp(t J(u))) - phi(R) = a t^2 + b t^3 + c t^4`` and return ``2 a``."""
    t = np.asarray(steps)
    f = np.array([potential.phi(R @ exp_map(ti * u)) - potential.phi(R) for ti in t])
    V = np.stack([t ** 2, t ** 3, t ** 4], axis=1)
    a, _, _ = np.linalg.solve(V, f)
    return 2.0 * a


def check_taylor(crit, us, tol) -> PropertyResult:
    errs, cases = [], []
    for (R, H), u in zip(crit, us):
        errs.append(abs(taylor_coefficient(R, u) - float(u @ H @ u)))
        cases.append({"q": R.q.tolist(), "u": u.tolist()})
    return _result("taylor_second_order", errs, cases, tol)


def check_energy(cfg: ExperimentConfig, rng, n_traj, T, tol_step, tol_rms, tol_gyro) -> list[PropertyResult]:
    """Anchoring-only runs: monotone energy, rate identity and gyroscopic neutrality."""
    inert, gains = cfg.inertia(), cfg.gains()
    h = cfg["integrator"]["h"]
    omax = cfg["monte_carlo"]["omega_max"]
    rise, rms, gyro, cases = [], [], [], []
    for _ in range(n_traj):
        s0 = BodyState(random_rotation(rng), sample_omega(rng, omax))
        tr = simulate(s0, inert, gains, DISABLED_TEMPLATE, h=h, T=T)
        eta = tr.eta
        rise.append(float(np.max(np.diff(eta))))
        fd = (eta[2:] - eta[:-2]) / (2.0 * h)
        rms.append(float(np.sqrt(np.mean((fd - tr.eta_rate[1:-1]) ** 2))))
        g = 0.0
        for k in np.linspace(0, len(tr) - 1, 50).astype(int):
            st = tr.state(int(k))
            M = inertia_stance(st.R, inert)
            w = st.omega
            Mdot = skew(w) @ M - M @ skew(w)
            g = max(g, abs(float(w @ np.cross(w, M @ w))), abs(float(w @ Mdot @ w)))
        gyro.append(g)
        cases.append({"q": s0.R.q.tolist(), "omega": s0.omega.tolist(), "T": T, "h": h})
    return [
        _result("energy_monotone", rise, cases, tol_step),
        _result("energy_rate_identity", rms, cases, tol_rms),
        _result("gyroscopic_neutrality", gyro, cases, tol_gyro),
    ]


def check_limit_set(cfg: ExperimentConfig, rng, n, tol) -> PropertyResult:
    """Steady spins off the critical set never satisfy the limit-set condition,
    and on P and Q the residual vanishes."""
    inert = cfg.inertia()
    errs, cases = [], []
    for _ in range(n):
        R = random_rotation(rng)
        alpha = float(rng.uniform(-5.0, 5.0))
        if np.linalg.norm(potential.grad(R)) <= 1e-6 or alpha == 0.0:
            continue
        r = float(np.linalg.norm(limit_set_residual(R, alpha, inert)))
        errs.append(0.0 if r > tol else math.inf)
        cases.append({"q": R.q.tolist(), "alpha": alpha, "residual": r})
    for R in (rot_y(0.7), rot_x(math.pi) @ rot_y(-1.3)):
        alpha = float(rng.uniform(-5.0, 5.0))
        errs.append(float(np.linalg.norm(limit_set_residual(R, alpha, inert))))
        cases.append({"q": R.q.tolist(), "alpha": alpha})
    return _result("limit_set_residual", errs, cases, tol)


def run_all(cfg: ExperimentConfig, grad_fn: Callable[[Rotation], np.ndarray] | None = None) -> list[PropertyResult]:
    grad_fn = potential.grad if grad_fn is None else grad_fn
    v = cfg["verify"]
    tol = v["tolerances"]
    n = v["n_samples"]
    rng = np.random.default_rng(v["seed"])
    rots = [random_rotation(rng) for _ in range(n)]
    us = [rng.standard_normal(3) for _ in range(n)]
    crit = critical_samples(rng, max(2, n // 10))
    results = [
        check_gradient_fd(rots, grad_fn, tol["grad_fd"]),
        check_trace_form(rots, us, grad_fn, tol["trace_form"]),
        check_critical_set(rots, crit, grad_fn, tol["critical_set"], cfg["tolerances"]["membership"]),
        check_hessian(crit, tol["hessian"]),
        check_quadratic_form(crit, us, tol["quadratic_form"]),
        check_taylor(crit, us, tol["taylor"]),
    ]
    results += check_energy(cfg, rng, v["n_trajectories"], v["T"], tol["energy_step"],
                            tol["energy_rate_rms"], tol["gyroscopic"])
    results.append(check_limit_set(cfg, rng, n, tol["limit_set"]))
    return results
