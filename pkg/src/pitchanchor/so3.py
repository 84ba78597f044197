"""Rotation-group primitives.

Conventions
-----------
- Quaternions are stored ``(w, x, y, z)`` (Hamilton product).
- ``Rotation.matrix`` is the active rotation ``v -> q v q*``, so
  ``rot_axis_angle(a, t).matrix == expm(t * skew(a))``.
- The pitch set ``P`` is ``{R : R^T y = y}``, the antipodal set ``Q`` is
  ``{R : R^T y = -y}`` with ``y = (0, 1, 0)``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

Y_AXIS = np.array([0.0, 1.0, 0.0])

ALGEBRAIC_TOL = 1e-9
CONVERGENCE_TOL = 1e-3


def skew(a) -> np.ndarray:
    """Matrix ``J(a)`` with ``J(a) @ b == cross(a, b)``."""
    ax, ay, az = (float(v) for v in a)
    return np.array([
        [0.0, -az, ay],
        [az, 0.0, -ax],
        [-ay, ax, 0.0],
    ])


def vee(S: np.ndarray) -> np.ndarray:
    """Inverse of :func:`skew` (reads the antisymmetric part)."""
    S = np.asarray(S, dtype=float)
    return 0.5 * np.array([S[2, 1] - S[1, 2], S[0, 2] - S[2, 0], S[1, 0] - S[0, 1]])


def quat_mul(a, b) -> np.ndarray:
    aw, ax, ay, az = a
    bw, bx, by, bz = b
    return np.array([
        aw * bw - ax * bx - ay * by - az * bz,
        aw * bx + ax * bw + ay * bz - az * by,
        aw * by - ax * bz + ay * bw + az * bx,
        aw * bz + ax * by - ay * bx + az * bw,
    ])


def quat_to_matrix(q) -> np.ndarray:
    w, x, y, z = (float(v) for v in q)
    return np.array([
        [1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - w * z), 2.0 * (x * z + w * y)],
        [2.0 * (x * y + w * z), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - w * x)],
        [2.0 * (x * z - w * y), 2.0 * (y * z + w * x), 1.0 - 2.0 * (x * x + y * y)],
    ])


def matrix_to_quat(R) -> np.ndarray:
    """Shepperd's method; returns the representative with ``w >= 0``."""
    R = np.asarray(R, dtype=float)
    tr = R[0, 0] + R[1, 1] + R[2, 2]
    cands = np.array([tr, R[0, 0], R[1, 1], R[2, 2]])
    k = int(np.argmax(cands))
    if k == 0:
        s = 2.0 * math.sqrt(1.0 + tr)
        q = [0.25 * s, (R[2, 1] - R[1, 2]) / s, (R[0, 2] - R[2, 0]) / s, (R[1, 0] - R[0, 1]) / s]
    elif k == 1:
        s = 2.0 * math.sqrt(1.0 + R[0, 0] - R[1, 1] - R[2, 2])
        q = [(R[2, 1] - R[1, 2]) / s, 0.25 * s, (R[0, 1] + R[1, 0]) / s, (R[0, 2] + R[2, 0]) / s]
    elif k == 2:
        s = 2.0 * math.sqrt(1.0 + R[1, 1] - R[0, 0] - R[2, 2])
        q = [(R[0, 2] - R[2, 0]) / s, (R[0, 1] + R[1, 0]) / s, 0.25 * s, (R[1, 2] + R[2, 1]) / s]
    else:
        s = 2.0 * math.sqrt(1.0 + R[2, 2] - R[0, 0] - R[1, 1])
        q = [(R[1, 0] - R[0, 1]) / s, (R[0, 2] + R[2, 0]) / s, (R[1, 2] + R[2, 1]) / s, 0.25 * s]
    q = np.array(q)
    q /= np.linalg.norm(q)
    return -q if q[0] < 0.0 else q


@dataclass(frozen=True, eq=False)
class Rotation:
    """Element of SO(3) held as a unit quaternion ``(w, x, y, z)``."""

    q: np.ndarray

    def __post_init__(self):
        q = np.asarray(self.q, dtype=float).reshape(4)
        n = math.sqrt(float(q @ q))
        if not math.isfinite(n) or n == 0.0:
            raise ValueError(f"cannot build a rotation from quaternion {q}")
        if abs(n - 1.0) > 1e-12:
            q = q / n
        q.setflags(write=False)
        object.__setattr__(self, "q", q)

    @classmethod
    def identity(cls) -> Rotation:
        return cls(np.array([1.0, 0.0, 0.0, 0.0]))

    @classmethod
    def from_matrix(cls, R) -> Rotation:
        return cls(matrix_to_quat(R))

    @cached_property
    def matrix(self) -> np.ndarray:
        m = quat_to_matrix(self.q)
        m.setflags(write=False)
        return m

    def inverse(self) -> Rotation:
        w, x, y, z = self.q
        return Rotation(np.array([w, -x, -y, -z]))

    def __matmul__(self, other: Rotation) -> Rotation:
        return Rotation(quat_mul(self.q, other.q))

    def apply(self, v) -> np.ndarray:
        return self.matrix @ np.asarray(v, dtype=float)

    def as_rotvec(self) -> np.ndarray:
        """Exponential coordinates ``theta * axis`` with ``theta`` in ``[0, pi]``."""
        q = self.q if self.q[0] >= 0.0 else -self.q
        v = q[1:]
        s = math.sqrt(float(v @ v))
        if s == 0.0:
            return np.zeros(3)
        return (2.0 * math.atan2(s, q[0]) / s) * v

    def __repr__(self) -> str:
        w, x, y, z = self.q
        return f"Rotation(w={w:.6g}, x={x:.6g}, y={y:.6g}, z={z:.6g})"


def rot_axis_angle(axis, angle: float) -> Rotation:
    axis = np.asarray(axis, dtype=float).reshape(3)
    n = float(np.linalg.norm(axis))
    if abs(n - 1.0) > ALGEBRAIC_TOL:
        raise ValueError(f"rotation axis must be a unit vector, got norm {n!r}")
    h = 0.5 * angle
    s = math.sin(h)
    return Rotation(np.array([math.cos(h), s * axis[0], s * axis[1], s * axis[2]]))


def rot_x(angle: float) -> Rotation:
    return rot_axis_angle((1.0, 0.0, 0.0), angle)


def rot_y(angle: float) -> Rotation:
    return rot_axis_angle((0.0, 1.0, 0.0), angle)


def rot_z(angle: float) -> Rotation:
    return rot_axis_angle((0.0, 0.0, 1.0), angle)


def exp_map(v) -> Rotation:
    v = np.asarray(v, dtype=float).reshape(3)
    theta = float(np.linalg.norm(v))
    if theta == 0.0:
        return Rotation.identity()
    return rot_axis_angle(v / theta, theta)


def wrap_angle(a: float) -> float:
    """Wrap to ``[-pi, pi]`` (IEEE remainder, exact)."""
    return math.remainder(a, 2.0 * math.pi)


def pitch_decompose(R: Rotation) -> tuple[float, float]:
    """Split ``R = swing @ rot_y(pitch)`` with the swing axis orthogonal to y.

    Returns ``(pitch, swing_angle)``. ``swing_angle`` lies in ``[0, pi]`` and is
    the geodesic distance from ``R`` to the pitch set. On the antipodal set the
    pitch is not unique; every candidate ``rot_y(p)`` is then equidistant from
    ``R`` in the Frobenius norm, so the tie-break returns ``0.0``.
    """
    w, x, y, z = R.q
    swing = 2.0 * math.atan2(math.sqrt(x * x + z * z), math.sqrt(w * w + y * y))
    pitch = wrap_angle(2.0 * math.atan2(y, w))
    return pitch, swing


class SetTag(enum.Enum):
    PITCH = "PitchSet"
    ANTIPODAL = "AntipodalSet"
    REGULAR = "Regular"


@dataclass(frozen=True)
class SetMembership:
    tag: SetTag
    distance: float


def classify_set(R: Rotation, tol: float = ALGEBRAIC_TOL) -> SetMembership:
    """Locate ``R`` relative to the pitch set and its antipode.

    ``distance`` is the geodesic distance to the nearer critical component
    (to ``Q`` when tagged antipodal, to ``P`` otherwise).
    """
    if not tol > 0.0:
        raise ValueError("tol must be positive")
    ry = R.matrix[1]  # R^T y
    _, swing = pitch_decompose(R)
    if np.linalg.norm(ry - Y_AXIS) <= tol:
        return SetMembership(SetTag.PITCH, swing)
    if np.linalg.norm(ry + Y_AXIS) <= tol:
        return SetMembership(SetTag.ANTIPODAL, math.pi - swing)
    return SetMembership(SetTag.REGULAR, swing)


def random_rotation(rng: np.random.Generator) -> Rotation:
    """Haar-uniform rotation from a normalized 4-D Gaussian."""
    while True:
        g = rng.standard_normal(4)
        n = float(np.linalg.norm(g))
        if n > 1e-12:
            return Rotation(g / n)


def random_rotations(rng: np.random.Generator, n: int) -> np.ndarray:
    """Batch form of :func:`random_rotation`; returns an ``(n, 4)`` quaternion array."""
    g = rng.standard_normal((n, 4))
    return g / np.linalg.norm(g, axis=1, keepdims=True)
