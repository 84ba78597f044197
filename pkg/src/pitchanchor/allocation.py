"""Toe-force allocation for a two-foot stance in sum/difference coordinates.

With toes at ``x_l = p + q`` and ``x_r = p - q`` relative to the COM and
``s = f_l + f_r``, ``d = f_l - f_r``::

    m p''   = s
    M w'    = p x s + q x d

The template and lateral controllers set ``s``; the anchoring torque (roll and
yaw only) is produced by ``d``, which is scaled down when it would lift a toe.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .control import Wrench

ORTHO_TOL = 1e-9


@dataclass(frozen=True)
class StanceGeometry:
    p: np.ndarray
    q: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.p, dtype=float).reshape(3)
        q = np.asarray(self.q, dtype=float).reshape(3)
        if not np.any(q):
            raise ValueError("toe half-separation q must be non-zero")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", q)

    @property
    def x_l(self) -> np.ndarray:
        return self.p + self.q

    @property
    def x_r(self) -> np.ndarray:
        return self.p - self.q


@dataclass(frozen=True)
class ToeForces:
    f_l: np.ndarray
    f_r: np.ndarray
    sigma: float
    s: np.ndarray
    d: np.ndarray
    feasible: bool = True
    dropped_torque: float = 0.0  # torque component along the toe line, left to p x s


def torque_to_difference(q, tau) -> np.ndarray:
    """Minimum-norm ``d`` with ``q x d = tau`` (and ``d . q = 0``).

    ``tau`` must have no component along ``q``.
    """
    q = np.asarray(q, dtype=float)
    tau = np.asarray(tau, dtype=float)
    n = float(np.linalg.norm(q))
    if n == 0.0:
        raise ValueError("q must be non-zero")
    qhat = q / n
    par = float(tau @ qhat)
    if abs(par) > ORTHO_TOL * float(np.linalg.norm(tau)):
        raise ValueError(f"torque has a component {par:.6g} along the toe line")
    # (tau x q) / |q|^2, written to stay exact for axis-aligned q
    return np.cross(tau, qhat) / n


def _min_vertical(s_z: float, d_z: float, sigma: float) -> float:
    f_l = 0.5 * (s_z + sigma * d_z)
    return min(f_l, s_z - f_l)


def _max_sigma(s_z: float, d_z: float, f_min: float) -> float:
    """Largest sigma in [0, 1] keeping both vertical toe forces ``>= f_min``.

    Evaluated with the same expressions ``allocate`` uses, so the returned
    sigma satisfies the constraint exactly in floating point.
    """
    if _min_vertical(s_z, d_z, 1.0) >= f_min:
        return 1.0
    sigma = min(1.0, (s_z - 2.0 * f_min) / abs(d_z))
    while sigma > 0.0 and _min_vertical(s_z, d_z, sigma) < f_min:
        sigma = math.nextafter(sigma, 0.0)
    return max(sigma, 0.0)


def _exact_split(total: float, left: float, floor: float = -math.inf, max_ulps: int = 64) -> tuple[float, float]:
    """Nudge ``left`` by a few ulps so that ``left + (total - left) == total``.

    Both parts stay ``>= floor``. When the two parts cancel (``|left| > 2|total|``)
    their sum lives on a coarser grid than ``total`` and no such pair may exist;
    the unmodified split is returned then.
    """
    right = total - left
    if left + right == total:
        return left, right
    for direction in (math.inf, -math.inf):
        x = left
        for _ in range(max_ulps):
            x = math.nextafter(x, direction)
            y = total - x
            if x + y == total and x >= floor and y >= floor:
                return x, y
    return left, right


def allocate(geom: StanceGeometry, wrench: Wrench, f_min: float = 0.0,
             gravity_ff: float | None = None) -> ToeForces:
    """Split a body wrench into left/right toe forces.

    ``s`` takes the commanded force (plus an optional vertical gravity
    feedforward). The torque component along the toe line cannot come from
    ``d``; it is dropped here and reported in ``dropped_torque``.
    """
    s = np.array(wrench.force, dtype=float)
    if gravity_ff is not None:
        s[2] += gravity_ff
    tau = np.asarray(wrench.torque, dtype=float)
    qhat = geom.q / np.linalg.norm(geom.q)
    along = float(tau @ qhat)
    tau_perp = tau - along * qhat
    # a torque purely along the toe line leaves only rounding noise behind
    if np.linalg.norm(tau_perp) <= 8.0 * np.finfo(float).eps * np.linalg.norm(tau):
        d = np.zeros(3)
    else:
        d = torque_to_difference(geom.q, tau_perp)

    feasible = 0.5 * s[2] >= f_min
    sigma = _max_sigma(s[2], d[2], f_min) if feasible else 0.0
    f_l = 0.5 * (s + sigma * d)
    f_r = s - f_l
    for i in range(3):
        floor = f_min if (i == 2 and feasible) else -math.inf
        f_l[i], f_r[i] = _exact_split(float(s[i]), float(f_l[i]), floor)
    return ToeForces(f_l, f_r, float(sigma), s, d, bool(feasible), along)


def reconstruct_wrench(forces: ToeForces, geom: StanceGeometry) -> tuple[np.ndarray, np.ndarray]:
    """Net force and torque about the COM from the two toe forces."""
    force = forces.f_l + forces.f_r
    torque = np.cross(geom.x_l, forces.f_l) + np.cross(geom.x_r, forces.f_r)
    return force, torque


def pitch_coupling_residual(geom: StanceGeometry, s) -> np.ndarray:
    """Off-pitch part of ``p x s`` neglected by the pitch-only approximation.

    With ``p = r_p + e_y`` (``e_y`` the y part) this is
    ``e_y x s_xz + r_p x s_y``.
    """
    s = np.asarray(s, dtype=float)
    p = geom.p
    e_y = np.array([0.0, p[1], 0.0])
    r_p = np.array([p[0], 0.0, p[2]])
    s_xz = np.array([s[0], 0.0, s[2]])
    s_y = np.array([0.0, s[1], 0.0])
    return np.cross(e_y, s_xz) + np.cross(r_p, s_y)
