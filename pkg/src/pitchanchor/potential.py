"""Pitch potential ``phi(R) = 1 - y^T R y`` on SO(3), its gradient and Hessian.

The additive constant puts the minimum (value 0) on the pitch set and the
maximum (value 2) on the antipodal set. Gradients are expressed in the same
coordinates as the stance-frame angular velocity under ``Rdot = R J(w)^T``,
so that ``d/dt phi(R(t)) = w . grad(R)``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .so3 import Y_AXIS, Rotation, skew

CRITICAL_TOL = 1e-9

_YYT = np.outer(Y_AXIS, Y_AXIS)
_JY = skew(Y_AXIS)


class NotCriticalError(ValueError):
    """Raised when a Hessian is requested away from the critical set."""


def phi(R: Rotation) -> float:
    return 1.0 - float(R.matrix[1, 1])


def grad(R: Rotation) -> np.ndarray:
    """``y x R^T y``; vanishes exactly on the pitch and antipodal sets."""
    return np.cross(Y_AXIS, R.matrix[1])


def grad_trace_form(R: Rotation, u) -> float:
    """Directional derivative written as ``1/2 tr((yy^T - R^T yy^T R^T) R J(u))``."""
    Rm = R.matrix
    inner = _YYT - Rm.T @ _YYT @ Rm.T
    return 0.5 * float(np.trace(inner @ Rm @ skew(u)))


def _require_critical(R: Rotation) -> None:
    g = float(np.linalg.norm(grad(R)))
    if g > CRITICAL_TOL:
        raise NotCriticalError(f"rotation is not critical (|grad| = {g:.3e})")


def hessian(R: Rotation) -> np.ndarray:
    """``J(y)^T J(R^T y)`` at a critical point of the potential."""
    _require_critical(R)
    return _JY.T @ skew(R.matrix[1])


def hessian_quadratic_form(R: Rotation, u) -> float:
    """``-tr(y y^T R J(u) J(u))`` at a critical point."""
    _require_critical(R)
    U = skew(u)
    return -float(np.trace(_YYT @ R.matrix @ U @ U))


class CriticalKind(enum.Enum):
    MINIMUM_P = "Minimum_P"
    MAXIMUM_Q = "Maximum_Q"
    NOT_CRITICAL = "NotCritical"


@dataclass(frozen=True)
class CriticalClassification:
    kind: CriticalKind
    hessian: np.ndarray | None = None
    lam: float | None = None


def classify_critical(R: Rotation, tol: float = CRITICAL_TOL) -> CriticalClassification:
    if np.linalg.norm(grad(R)) > tol:
        return CriticalClassification(CriticalKind.NOT_CRITICAL)
    lam = 1.0 if R.matrix[1, 1] > 0.0 else -1.0
    kind = CriticalKind.MINIMUM_P if lam > 0 else CriticalKind.MAXIMUM_Q
    return CriticalClassification(kind, hessian(R), lam)
