"""Pure-Python closed-loop integrator (fallback for ``_kernels.pyx``).

Keep the arithmetic here in the same order as the Cython module: the two
backends are expected to agree to the last bit on the same platform.

State layout: ``[qw, qx, qy, qz, wx, wy, wz, p_y, v_y]``.
Parameter layout: see ``PARAM_NAMES``.
"""

from math import atan2, isfinite, pi, remainder, sqrt

import numpy as np

BACKEND = "python"

PARAM_NAMES = (
    "i1", "i2", "i3", "mass", "kappa1", "kappa2", "kp_lat", "kd_lat",
    "template_on", "gamma", "beta", "pitch0",
)
N_STATE = 9
N_COLS = 15
TWO_PI = 2.0 * pi


def _eval(s, p):
    """Return ``(derivative, template_torque_y)`` at state ``s``."""
    qw, qx, qy, qz, wx, wy, wz, py, vy = s
    i1, i2, i3, mass, k1, k2, kp, kd, ton, gamma, beta, pitch0 = p

    ww = qw * qw
    xx = qx * qx
    yy = qy * qy
    zz = qz * qz
    n2 = ww + xx + yy + zz
    r00 = (ww + xx - yy - zz) / n2
    r01 = 2.0 * (qx * qy - qw * qz) / n2
    r02 = 2.0 * (qx * qz + qw * qy) / n2
    r10 = 2.0 * (qx * qy + qw * qz) / n2
    r11 = (ww - xx + yy - zz) / n2
    r12 = 2.0 * (qy * qz - qw * qx) / n2
    r20 = 2.0 * (qx * qz - qw * qy) / n2
    r21 = 2.0 * (qy * qz + qw * qx) / n2
    r22 = (ww - xx - yy + zz) / n2

    # M w = R^T I_B R w
    b0 = i1 * (r00 * wx + r01 * wy + r02 * wz)
    b1 = i2 * (r10 * wx + r11 * wy + r12 * wz)
    b2 = i3 * (r20 * wx + r21 * wy + r22 * wz)
    m0 = r00 * b0 + r10 * b1 + r20 * b2
    m1 = r01 * b0 + r11 * b1 + r21 * b2
    m2 = r02 * b0 + r12 * b1 + r22 * b2

    if ton != 0.0:
        pitch = remainder(2.0 * atan2(qy, qw), TWO_PI)
        theta = remainder(pitch0 - pitch, TWO_PI)
        tt = -gamma * theta - beta * wy
    else:
        tt = 0.0

    # tau - w x M w, with -grad = (-r12, 0, r10)
    e0 = (-r12 - k1 * wx) - (wy * m2 - wz * m1)
    e1 = tt - (wz * m0 - wx * m2)
    e2 = (r10 - k2 * wz) - (wx * m1 - wy * m0)

    # wdot = R^T I_B^{-1} R e
    c0 = (r00 * e0 + r01 * e1 + r02 * e2) / i1
    c1 = (r10 * e0 + r11 * e1 + r12 * e2) / i2
    c2 = (r20 * e0 + r21 * e1 + r22 * e2) / i3
    dwx = r00 * c0 + r10 * c1 + r20 * c2
    dwy = r01 * c0 + r11 * c1 + r21 * c2
    dwz = r02 * c0 + r12 * c1 + r22 * c2

    # qdot = -1/2 q (x) (0, w)
    dqw = -0.5 * (-(qx * wx + qy * wy + qz * wz))
    dqx = -0.5 * (qw * wx + qy * wz - qz * wy)
    dqy = -0.5 * (qw * wy - qx * wz + qz * wx)
    dqz = -0.5 * (qw * wz + qx * wy - qy * wx)

    dvy = (-kp * py - kd * vy) / mass
    return (dqw, dqx, dqy, dqz, dwx, dwy, dwz, vy, dvy), tt


def _diagnostics(s, p):
    """``(phi, eta, eta_rate, swing, pitch)`` at a normalized state."""
    qw, qx, qy, qz, wx, wy, wz, py, vy = s
    i1, i2, i3, mass, k1, k2, kp, kd, ton, gamma, beta, pitch0 = p
    ww = qw * qw
    xx = qx * qx
    yy = qy * qy
    zz = qz * qz
    n2 = ww + xx + yy + zz
    r00 = (ww + xx - yy - zz) / n2
    r01 = 2.0 * (qx * qy - qw * qz) / n2
    r02 = 2.0 * (qx * qz + qw * qy) / n2
    r10 = 2.0 * (qx * qy + qw * qz) / n2
    r11 = (ww - xx + yy - zz) / n2
    r12 = 2.0 * (qy * qz - qw * qx) / n2
    r20 = 2.0 * (qx * qz - qw * qy) / n2
    r21 = 2.0 * (qy * qz + qw * qx) / n2
    r22 = (ww - xx - yy + zz) / n2
    b0 = r00 * wx + r01 * wy + r02 * wz
    b1 = r10 * wx + r11 * wy + r12 * wz
    b2 = r20 * wx + r21 * wy + r22 * wz
    phi = 1.0 - r11
    eta = phi + 0.5 * (i1 * b0 * b0 + i2 * b1 * b1 + i3 * b2 * b2)
    pitch = remainder(2.0 * atan2(qy, qw), TWO_PI)
    if ton != 0.0:
        theta = remainder(pitch0 - pitch, TWO_PI)
        tt = -gamma * theta - beta * wy
    else:
        tt = 0.0
    eta_rate = -k1 * wx * wx - k2 * wz * wz + wy * tt
    swing = 2.0 * atan2(sqrt(xx + zz), sqrt(ww + yy))
    return phi, eta, eta_rate, swing, pitch


def _rk4_step(s, p, h):
    h2 = 0.5 * h
    h6 = h / 6.0
    k1, _ = _eval(s, p)
    s2 = [s[i] + h2 * k1[i] for i in range(N_STATE)]
    k2, _ = _eval(s2, p)
    s3 = [s[i] + h2 * k2[i] for i in range(N_STATE)]
    k3, _ = _eval(s3, p)
    s4 = [s[i] + h * k3[i] for i in range(N_STATE)]
    k4, _ = _eval(s4, p)
    out = [s[i] + h6 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) for i in range(N_STATE)]
    n = sqrt(out[0] * out[0] + out[1] * out[1] + out[2] * out[2] + out[3] * out[3])
    out[0] = out[0] / n
    out[1] = out[1] / n
    out[2] = out[2] / n
    out[3] = out[3] / n
    return out


def _finite(s):
    for v in s:
        if not isfinite(v):
            return False
    return True


def field(state, params):
    """Closed-loop state derivative (9 entries)."""
    d, _ = _eval([float(v) for v in state], [float(v) for v in params])
    return np.array(d)


def trajectory(state0, params, h, n_steps, t0=0.0):
    """Integrate ``n_steps`` RK4 steps; return ``(rows, n_valid)``.

    ``rows`` has ``n_steps + 1`` rows of ``t, state..., phi, eta, eta_rate,
    swing, pitch``. ``n_valid < n_steps + 1`` means the state went non-finite.
    """
    p = [float(v) for v in params]
    s = [float(v) for v in state0]
    h = float(h)
    t0 = float(t0)
    n_steps = int(n_steps)
    out = np.zeros((n_steps + 1, N_COLS))
    for k in range(n_steps + 1):
        if k > 0:
            s = _rk4_step(s, p, h)
            if not _finite(s):
                return out, k
        row = out[k]
        row[0] = t0 + k * h
        row[1:10] = s
        row[10:15] = _diagnostics(s, p)
    return out, n_steps + 1


def probe(state0, params, h, n_steps, tol_angle, tol_omega):
    """Integrate without storing samples; track the convergence criteria.

    Returns ``(last_fail_p, last_fail_q, n_valid, final_state, max_eta_rise)``
    where ``last_fail_*`` is the last sample index violating the P (resp. Q)
    criterion, ``-1`` if none did.
    """
    p = [float(v) for v in params]
    s = [float(v) for v in state0]
    h = float(h)
    n_steps = int(n_steps)
    lim_q = pi - tol_angle
    last_p = -1
    last_q = -1
    rise = -np.inf
    eta_prev = 0.0
    n_valid = n_steps + 1
    for k in range(n_steps + 1):
        if k > 0:
            s_new = _rk4_step(s, p, h)
            if not _finite(s_new):
                n_valid = k
                break
            s = s_new
        qw, qx, qy, qz, wx, wy, wz = s[:7]
        swing = 2.0 * atan2(sqrt(qx * qx + qz * qz), sqrt(qw * qw + qy * qy))
        tr = sqrt(wx * wx + wz * wz)
        if not (swing <= tol_angle and tr <= tol_omega):
            last_p = k
        if not (swing >= lim_q and tr <= tol_omega):
            last_q = k
        eta = _diagnostics(s, p)[1]
        if k > 0 and eta - eta_prev > rise:
            rise = eta - eta_prev
        eta_prev = eta
    return last_p, last_q, n_valid, np.array(s), rise
