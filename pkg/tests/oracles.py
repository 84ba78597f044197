"""Independent reference computations used to freeze expected values.

Nothing here goes through the package's own rotation or potential code:
rotations are built with ``scipy.linalg.expm`` and distances by brute force.
"""

import math

import numpy as np
from scipy import integrate, linalg, optimize

Y = np.array([0.0, 1.0, 0.0])


def hat(a):
    return np.array([[0.0, -a[2], a[1]], [a[2], 0.0, -a[0]], [-a[1], a[0], 0.0]])


def expm_rot(axis, angle):
    return linalg.expm(angle * hat(np.asarray(axis, dtype=float)))


def geodesic(A, B):
    c = (np.trace(A.T @ B) - 1.0) / 2.0
    return math.acos(min(1.0, max(-1.0, c)))


def distance_to_pitch_set(R, grid=4001):
    """Minimize the geodesic distance from ``R`` to ``expm(s J(y))`` over ``s``.

    Returns ``(distance, argmin_s)``; coarse grid then bounded refinement.
    """
    ss = np.linspace(-math.pi, math.pi, grid)
    d = [geodesic(R, expm_rot(Y, s)) for s in ss]
    k = int(np.argmin(d))
    lo, hi = ss[max(k - 1, 0)], ss[min(k + 1, grid - 1)]
    res = optimize.minimize_scalar(lambda s: geodesic(R, expm_rot(Y, s)),
                                   bounds=(lo, hi), method="bounded",
                                   options={"xatol": 1e-12})
    return float(res.fun), float(res.x)


def haar_cap_fraction(a):
    """Haar measure of ``{R : angle(R^T y, y) <= a}`` by quadrature.

    In swing/twist coordinates the Haar density is proportional to
    ``sin(swing)``; normalizing over ``[0, pi]`` gives the cap fraction.
    """
    num, _ = integrate.quad(math.sin, 0.0, a)
    den, _ = integrate.quad(math.sin, 0.0, math.pi)
    return num / den


def potential_ref(R):
    return 1.0 - float(Y @ R @ Y)


def fd_grad_ref(R, step=1e-5):
    """Central differences of ``1 - y^T R y`` along ``R expm(-t J(e_i))``."""
    g = np.zeros(3)
    for i in range(3):
        e = np.zeros(3)
        e[i] = 1.0
        plus = potential_ref(R @ expm_rot(e, -step))
        minus = potential_ref(R @ expm_rot(e, step))
        g[i] = (plus - minus) / (2.0 * step)
    return g


def quadratic_roots(a, b, c):
    """Roots of ``a x^2 + b x + c`` as complex numbers."""
    disc = complex(b * b - 4.0 * a * c)
    r = np.sqrt(disc)
    return sorted([(-b + r) / (2 * a), (-b - r) / (2 * a)], key=lambda z: (z.real, z.imag))


def decoupled_spectrum(m_diag, k_diag, c_diag):
    """Eigenvalues of ``[[0, I], [-M^-1 K, -M^-1 C]]`` for diagonal M, K, C."""
    out = []
    for m, k, c in zip(m_diag, k_diag, c_diag):
        out += quadratic_roots(m, c, k)
    return sorted(out, key=lambda z: (z.real, z.imag))
