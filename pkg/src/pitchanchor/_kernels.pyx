# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled closed-loop integrator. Mirrors ``_kernels_py`` operation for operation."""

from libc.math cimport atan2, isfinite, remainder, sqrt, M_PI

import numpy as np

BACKEND = "cython"

PARAM_NAMES = (
    "i1", "i2", "i3", "mass", "kappa1", "kappa2", "kp_lat", "kd_lat",
    "template_on", "gamma", "beta", "pitch0",
)
N_STATE = 9
N_COLS = 15

cdef double TWO_PI = 2.0 * M_PI

ctypedef struct Params:
    double i1, i2, i3, mass, k1, k2, kp, kd, ton, gamma, beta, pitch0


cdef Params _unpack(params) except *:
    cdef Params p
    if len(params) != 12:
        raise ValueError("expected 12 parameters")
    p.i1 = params[0]; p.i2 = params[1]; p.i3 = params[2]; p.mass = params[3]
    p.k1 = params[4]; p.k2 = params[5]; p.kp = params[6]; p.kd = params[7]
    p.ton = params[8]; p.gamma = params[9]; p.beta = params[10]; p.pitch0 = params[11]
    return p


cdef inline void _rotation(const double* s, double* r) noexcept nogil:
    cdef double qw = s[0], qx = s[1], qy = s[2], qz = s[3]
    cdef double ww = qw * qw, xx = qx * qx, yy = qy * qy, zz = qz * qz
    cdef double n2 = ww + xx + yy + zz
    r[0] = (ww + xx - yy - zz) / n2
    r[1] = 2.0 * (qx * qy - qw * qz) / n2
    r[2] = 2.0 * (qx * qz + qw * qy) / n2
    r[3] = 2.0 * (qx * qy + qw * qz) / n2
    r[4] = (ww - xx + yy - zz) / n2
    r[5] = 2.0 * (qy * qz - qw * qx) / n2
    r[6] = 2.0 * (qx * qz - qw * qy) / n2
    r[7] = 2.0 * (qy * qz + qw * qx) / n2
    r[8] = (ww - xx - yy + zz) / n2


cdef inline double _template(const double* s, const Params* p) noexcept nogil:
    cdef double pitch, theta
    if p.ton != 0.0:
        pitch = remainder(2.0 * atan2(s[2], s[0]), TWO_PI)
        theta = remainder(p.pitch0 - pitch, TWO_PI)
        return -p.gamma * theta - p.beta * s[5]
    return 0.0


cdef void _eval(const double* s, const Params* p, double* d) noexcept nogil:
    cdef double r[9]
    cdef double qw = s[0], qx = s[1], qy = s[2], qz = s[3]
    cdef double wx = s[4], wy = s[5], wz = s[6], py = s[7], vy = s[8]
    cdef double b0, b1, b2, m0, m1, m2, tt, e0, e1, e2, c0, c1, c2
    _rotation(s, r)

    b0 = p.i1 * (r[0] * wx + r[1] * wy + r[2] * wz)
    b1 = p.i2 * (r[3] * wx + r[4] * wy + r[5] * wz)
    b2 = p.i3 * (r[6] * wx + r[7] * wy + r[8] * wz)
    m0 = r[0] * b0 + r[3] * b1 + r[6] * b2
    m1 = r[1] * b0 + r[4] * b1 + r[7] * b2
    m2 = r[2] * b0 + r[5] * b1 + r[8] * b2

    tt = _template(s, p)

    e0 = (-r[5] - p.k1 * wx) - (wy * m2 - wz * m1)
    e1 = tt - (wz * m0 - wx * m2)
    e2 = (r[3] - p.k2 * wz) - (wx * m1 - wy * m0)

    c0 = (r[0] * e0 + r[1] * e1 + r[2] * e2) / p.i1
    c1 = (r[3] * e0 + r[4] * e1 + r[5] * e2) / p.i2
    c2 = (r[6] * e0 + r[7] * e1 + r[8] * e2) / p.i3
    d[4] = r[0] * c0 + r[3] * c1 + r[6] * c2
    d[5] = r[1] * c0 + r[4] * c1 + r[7] * c2
    d[6] = r[2] * c0 + r[5] * c1 + r[8] * c2

    d[0] = -0.5 * (-(qx * wx + qy * wy + qz * wz))
    d[1] = -0.5 * (qw * wx + qy * wz - qz * wy)
    d[2] = -0.5 * (qw * wy - qx * wz + qz * wx)
    d[3] = -0.5 * (qw * wz + qx * wy - qy * wx)

    d[7] = vy
    d[8] = (-p.kp * py - p.kd * vy) / p.mass


cdef void _diagnostics(const double* s, const Params* p, double* out) noexcept nogil:
    cdef double r[9]
    cdef double qw = s[0], qx = s[1], qy = s[2], qz = s[3]
    cdef double wx = s[4], wy = s[5], wz = s[6]
    cdef double b0, b1, b2, phi, pitch, theta, tt
    cdef double ww = qw * qw, xx = qx * qx, yy = qy * qy, zz = qz * qz
    _rotation(s, r)
    b0 = r[0] * wx + r[1] * wy + r[2] * wz
    b1 = r[3] * wx + r[4] * wy + r[5] * wz
    b2 = r[6] * wx + r[7] * wy + r[8] * wz
    phi = 1.0 - r[4]
    out[0] = phi
    out[1] = phi + 0.5 * (p.i1 * b0 * b0 + p.i2 * b1 * b1 + p.i3 * b2 * b2)
    pitch = remainder(2.0 * atan2(qy, qw), TWO_PI)
    if p.ton != 0.0:
        theta = remainder(p.pitch0 - pitch, TWO_PI)
        tt = -p.gamma * theta - p.beta * wy
    else:
        tt = 0.0
    out[2] = -p.k1 * wx * wx - p.k2 * wz * wz + wy * tt
    out[3] = 2.0 * atan2(sqrt(xx + zz), sqrt(ww + yy))
    out[4] = pitch


cdef bint _rk4_step(double* s, const Params* p, double h) noexcept nogil:
    cdef double k1[9]
    cdef double k2[9]
    cdef double k3[9]
    cdef double k4[9]
    cdef double tmp[9]
    cdef double h2 = 0.5 * h
    cdef double h6 = h / 6.0
    cdef double n
    cdef int i
    _eval(s, p, k1)
    for i in range(9):
        tmp[i] = s[i] + h2 * k1[i]
    _eval(tmp, p, k2)
    for i in range(9):
        tmp[i] = s[i] + h2 * k2[i]
    _eval(tmp, p, k3)
    for i in range(9):
        tmp[i] = s[i] + h * k3[i]
    _eval(tmp, p, k4)
    for i in range(9):
        tmp[i] = s[i] + h6 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
    n = sqrt(tmp[0] * tmp[0] + tmp[1] * tmp[1] + tmp[2] * tmp[2] + tmp[3] * tmp[3])
    tmp[0] = tmp[0] / n
    tmp[1] = tmp[1] / n
    tmp[2] = tmp[2] / n
    tmp[3] = tmp[3] / n
    for i in range(9):
        if not isfinite(tmp[i]):
            return False
    for i in range(9):
        s[i] = tmp[i]
    return True


cdef void _load(state, double* s) except *:
    cdef int i
    if len(state) != 9:
        raise ValueError("expected a 9-entry state")
    for i in range(9):
        s[i] = state[i]


def field(state, params):
    cdef double s[9]
    cdef double d[9]
    cdef Params p = _unpack(params)
    _load(state, s)
    _eval(s, &p, d)
    return np.array([d[i] for i in range(9)])


def trajectory(state0, params, double h, long n_steps, double t0=0.0):
    cdef Params p = _unpack(params)
    cdef double s[9]
    cdef double diag[5]
    cdef long k, n_valid = n_steps + 1
    cdef int i
    _load(state0, s)
    out = np.zeros((n_steps + 1, 15))
    cdef double[:, ::1] o = out
    with nogil:
        for k in range(n_steps + 1):
            if k > 0:
                if not _rk4_step(s, &p, h):
                    n_valid = k
                    break
            o[k, 0] = t0 + k * h
            for i in range(9):
                o[k, 1 + i] = s[i]
            _diagnostics(s, &p, diag)
            for i in range(5):
                o[k, 10 + i] = diag[i]
    return out, n_valid


def probe(state0, params, double h, long n_steps, double tol_angle, double tol_omega):
    cdef Params p = _unpack(params)
    cdef double s[9]
    cdef double diag[5]
    cdef long k, last_p = -1, last_q = -1, n_valid = n_steps + 1
    cdef double lim_q = M_PI - tol_angle
    cdef double swing, tr, eta_prev = 0.0
    cdef double rise = -np.inf
    _load(state0, s)
    with nogil:
        for k in range(n_steps + 1):
            if k > 0:
                if not _rk4_step(s, &p, h):
                    n_valid = k
                    break
            swing = 2.0 * atan2(sqrt(s[1] * s[1] + s[3] * s[3]), sqrt(s[0] * s[0] + s[2] * s[2]))
            tr = sqrt(s[4] * s[4] + s[6] * s[6])
            if not (swing <= tol_angle and tr <= tol_omega):
                last_p = k
            if not (swing >= lim_q and tr <= tol_omega):
                last_q = k
            _diagnostics(s, &p, diag)
            if k > 0 and diag[1] - eta_prev > rise:
                rise = diag[1] - eta_prev
            eta_prev = diag[1]
    return last_p, last_q, n_valid, np.array([s[i] for i in range(9)]), rise
