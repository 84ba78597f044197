"""Linearized stability of the pitch and antipodal equilibria, a small dense
eigenvalue solver, and the algebra of the LaSalle limit set."""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass

import numpy as np

from .control import AnchorGains, TemplateParams
from .dynamics import InertiaModel, inertia_stance
from .so3 import Y_AXIS, Rotation, rot_x, rot_y

CLASSIFY_TOL = 1e-9
DEFINITE_TOL = 1e-12
_EPS = np.finfo(float).eps

H_P = np.diag([1.0, 0.0, 1.0])
H_Q = np.diag([-1.0, 0.0, -1.0])


class EigenvalueError(ArithmeticError):
    """QR iteration did not converge within the iteration cap."""


def _hessenberg(A: np.ndarray) -> np.ndarray:
    """Householder reduction to upper Hessenberg form (similarity transform)."""
    H = np.array(A, dtype=float)
    n = H.shape[0]
    for k in range(n - 2):
        x = H[k + 1:, k].copy()
        nx = np.linalg.norm(x)
        if nx == 0.0:
            continue
        v = x
        v[0] += math.copysign(nx, x[0])
        v /= np.linalg.norm(v)
        H[k + 1:, k:] -= 2.0 * np.outer(v, v @ H[k + 1:, k:])
        H[:, k + 1:] -= 2.0 * np.outer(H[:, k + 1:] @ v, v)
        H[k + 2:, k] = 0.0
    return H


def _francis_qr(a: np.ndarray, max_iter: int) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues of an upper Hessenberg matrix by double-shift QR with deflation.

    Works in place on ``a``; returns real and imaginary parts.
    """
    n = a.shape[0]
    wr = np.zeros(n)
    wi = np.zeros(n)
    anorm = sum(abs(a[i, j]) for i in range(n) for j in range(max(i - 1, 0), n))
    nn = n - 1
    shift = 0.0
    total = 0
    while nn >= 0:
        its = 0
        while True:
            # deflation: find the last negligible subdiagonal entry
            l = nn
            while l >= 1:
                s = abs(a[l - 1, l - 1]) + abs(a[l, l])
                if s == 0.0:
                    s = anorm
                # relative test, backed by a normwise one for graded matrices
                if abs(a[l, l - 1]) + s == s or abs(a[l, l - 1]) <= _EPS * anorm:
                    a[l, l - 1] = 0.0
                    break
                l -= 1
            x = a[nn, nn]
            if l == nn:
                wr[nn] = x + shift
                nn -= 1
                break
            y = a[nn - 1, nn - 1]
            w = a[nn, nn - 1] * a[nn - 1, nn]
            if l == nn - 1:
                p = 0.5 * (y - x)
                q = p * p + w
                z = math.sqrt(abs(q))
                x += shift
                if q >= 0.0:
                    z = p + math.copysign(z, p)
                    wr[nn - 1] = wr[nn] = x + z
                    if z != 0.0:
                        wr[nn] = x - w / z
                else:
                    wr[nn - 1] = wr[nn] = x + p
                    wi[nn - 1] = -z
                    wi[nn] = z
                nn -= 2
                break

            if total >= max_iter:
                raise EigenvalueError(f"no convergence after {total} QR iterations")
            if its in (10, 20):
                # exceptional shift
                shift += x
                for i in range(nn + 1):
                    a[i, i] -= x
                s = abs(a[nn, nn - 1]) + abs(a[nn - 1, nn - 2])
                x = y = 0.75 * s
                w = -0.4375 * s * s
            its += 1
            total += 1

            # start of the bulge: two consecutive small subdiagonal entries
            m = nn - 2
            while m >= l:
                z = a[m, m]
                r = x - z
                s = y - z
                p = (r * s - w) / a[m + 1, m] + a[m, m + 1]
                q = a[m + 1, m + 1] - z - r - s
                r = a[m + 2, m + 1]
                s = abs(p) + abs(q) + abs(r)
                p /= s
                q /= s
                r /= s
                if m == l:
                    break
                u = abs(a[m, m - 1]) * (abs(q) + abs(r))
                v = abs(p) * (abs(a[m - 1, m - 1]) + abs(z) + abs(a[m + 1, m + 1]))
                if u + v == v:
                    break
                m -= 1
            for i in range(m + 2, nn + 1):
                a[i, i - 2] = 0.0
                if i != m + 2:
                    a[i, i - 3] = 0.0

            # chase the bulge with 3x3 Householder reflectors
            for k in range(m, nn):
                if k != m:
                    p = a[k, k - 1]
                    q = a[k + 1, k - 1]
                    r = a[k + 2, k - 1] if k != nn - 1 else 0.0
                    x = abs(p) + abs(q) + abs(r)
                    if x != 0.0:
                        p /= x
                        q /= x
                        r /= x
                s = math.copysign(math.sqrt(p * p + q * q + r * r), p)
                if s == 0.0:
                    continue
                if k == m:
                    if l != m:
                        a[k, k - 1] = -a[k, k - 1]
                else:
                    a[k, k - 1] = -s * x
                p += s
                x = p / s
                y = q / s
                z = r / s
                q /= p
                r /= p
                for j in range(k, nn + 1):
                    p = a[k, j] + q * a[k + 1, j]
                    if k != nn - 1:
                        p += r * a[k + 2, j]
                        a[k + 2, j] -= p * z
                    a[k + 1, j] -= p * y
                    a[k, j] -= p * x
                for i in range(l, min(nn, k + 3) + 1):
                    p = x * a[i, k] + y * a[i, k + 1]
                    if k != nn - 1:
                        p += z * a[i, k + 2]
                        a[i, k + 2] -= p * r
                    a[i, k + 1] -= p * q
                    a[i, k] -= p
    return wr, wi


def eigenvalues(A) -> np.ndarray:
    """All eigenvalues of a small real square matrix, sorted by (real, imag).

    Hessenberg reduction followed by shifted QR; at most ``100 n`` iterations.
    """
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("eigenvalues() needs a square matrix")
    n = A.shape[0]
    if n == 0:
        return np.zeros(0, dtype=complex)
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix has non-finite entries")
    amax = float(np.max(np.abs(A)))
    if amax == 0.0:
        return np.zeros(n, dtype=complex)
    # power-of-two scaling keeps the iteration clear of under/overflow exactly
    _, e = math.frexp(amax)
    wr, wi = _francis_qr(_hessenberg(np.ldexp(A, -e)), 100 * n)
    lam = np.ldexp(wr, e) + 1j * np.ldexp(wi, e)
    order = np.lexsort((lam.imag, lam.real))
    return lam[order]


class Definiteness(enum.Enum):
    POSITIVE_DEFINITE = "PositiveDefinite"
    POSITIVE_SEMIDEFINITE = "PositiveSemidefinite"
    NEGATIVE_DEFINITE = "NegativeDefinite"
    NEGATIVE_SEMIDEFINITE = "NegativeSemidefinite"
    INDEFINITE = "Indefinite"


def definiteness(S, tol: float = DEFINITE_TOL) -> Definiteness:
    """Sylvester-style classification from principal minors.

    Definiteness uses the leading minors; semidefiniteness needs every
    principal minor.
    """
    S = np.asarray(S, dtype=float)
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise ValueError("definiteness() needs a square matrix")
    asym = float(np.max(np.abs(S - S.T))) if S.size else 0.0
    if asym > 1e-12:
        raise ValueError(f"matrix is not symmetric (max asymmetry {asym:.3e})")
    n = S.shape[0]
    leading = [np.linalg.det(S[:k, :k]) for k in range(1, n + 1)]
    if all(d > tol for d in leading):
        return Definiteness.POSITIVE_DEFINITE
    if all((-1) ** k * d > tol for k, d in enumerate(leading, start=1)):
        return Definiteness.NEGATIVE_DEFINITE

    def all_minors(M):
        return all(np.linalg.det(M[np.ix_(idx, idx)]) >= -tol
                   for k in range(1, n + 1)
                   for idx in itertools.combinations(range(n), k))

    if all_minors(S):
        return Definiteness.POSITIVE_SEMIDEFINITE
    if all_minors(-S):
        return Definiteness.NEGATIVE_SEMIDEFINITE
    return Definiteness.INDEFINITE


class Stability(enum.Enum):
    ASYMPTOTICALLY_STABLE = "AsymptoticallyStable"
    SADDLE = "Saddle"
    INDETERMINATE = "Indeterminate"


@dataclass(frozen=True)
class LinearizedSystem:
    at: str
    A: np.ndarray
    eigenvalues: np.ndarray
    classification: Stability


def classify_spectrum(lam: np.ndarray, tol: float = CLASSIFY_TOL) -> Stability:
    re = np.real(lam)
    if np.all(re < -tol):
        return Stability.ASYMPTOTICALLY_STABLE
    if np.any(re > tol) and np.any(re < -tol):
        return Stability.SADDLE
    return Stability.INDETERMINATE


def equilibrium(at: str, template: TemplateParams) -> Rotation:
    if at == "P":
        return rot_y(template.pitch0)
    if at == "Q":
        return rot_x(math.pi)
    raise ValueError(f"equilibrium must be 'P' or 'Q', got {at!r}")


def linearize(at: str, inert: InertiaModel, gains: AnchorGains, template: TemplateParams,
              R0: Rotation | None = None) -> LinearizedSystem:
    """Linearization about ``p0`` (``at='P'``) or ``q0 = rot_x(pi)`` (``at='Q'``).

    ``A = [[0, I], [-M^-1 (H + K), -M^-1 (K_D + B)]]`` with
    ``K = diag(0, gamma, 0)`` and ``B = diag(0, beta, 0)``; both vanish when
    the template is disabled.
    """
    R0 = equilibrium(at, template) if R0 is None else R0
    M = inertia_stance(R0, inert)
    H = H_P if at == "P" else H_Q
    on = 1.0 if template.enabled else 0.0
    K = np.diag([0.0, on * template.gamma, 0.0])
    B = np.diag([0.0, on * template.beta, 0.0])
    KD = np.diag([gains.kappa1, 0.0, gains.kappa2])
    A = np.zeros((6, 6))
    A[:3, 3:] = np.eye(3)
    A[3:, :3] = -np.linalg.solve(M, H + K)
    A[3:, 3:] = -np.linalg.solve(M, KD + B)
    lam = eigenvalues(A)
    return LinearizedSystem(at, A, lam, classify_spectrum(lam))


def limit_set_residual(R: Rotation, alpha: float, inert: InertiaModel) -> np.ndarray:
    """``-(y x R^T y) - alpha^2 (y x M(R) y)``; zero for steady spins in the limit set."""
    M = inertia_stance(R, inert)
    return -np.cross(Y_AXIS, R.matrix[1]) - alpha * alpha * np.cross(Y_AXIS, M @ Y_AXIS)
