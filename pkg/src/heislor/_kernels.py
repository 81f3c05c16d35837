"""Compiled fixed-step RK4 cores.

These mirror the frame-coordinate dynamics defined in ``heislor.extremals``
(``covector_flow``); a unit test pins the two against each other.  State
layout for the extremal kernel: (x, y, z, h1, h2, h3, J).
"""

from __future__ import annotations

import numpy as np
from numba import njit

# Family codes shared with the oracle module.
P1_NORMAL = 0
P1_ABNORMAL = 1
P2_NORMAL = 2
P2_ABNORMAL = 3

# Schedule piece codes.
PIECE_CONSTANT = 0
PIECE_ARC = 1


@njit(cache=True, inline="always")
def _family_control(case, h1, h2, h3):
    if case == P1_NORMAL:
        return h1, h2, -h3
    elif case == P1_ABNORMAL:
        rho = np.sqrt(h1 * h1 + h2 * h2)
        return h1 / rho, h2 / rho, 1.0
    elif case == P2_NORMAL:
        return -h1, h2, h3
    else:
        return np.sqrt(h2 * h2 + h3 * h3), h2, h3


@njit(cache=True, inline="always")
def _family_jrate(case, u1, u2, u3):
    # Abnormal controls are lightlike by construction: rate exactly 0.
    if case == P1_NORMAL:
        rad = u3 * u3 - u1 * u1 - u2 * u2
    elif case == P2_NORMAL:
        rad = u1 * u1 - u2 * u2 - u3 * u3
    else:
        return 0.0
    return np.sqrt(rad) if rad > 0.0 else 0.0


@njit(cache=True, inline="always")
def _extremal_rhs(case, y, dy):
    u1, u2, u3 = _family_control(case, y[3], y[4], y[5])
    dy[0] = u1
    dy[1] = u2
    dy[2] = -0.5 * y[1] * u1 + 0.5 * y[0] * u2 + u3
    dy[3] = -y[5] * u2
    dy[4] = y[5] * u1
    dy[5] = 0.0
    dy[6] = _family_jrate(case, u1, u2, u3)


@njit(cache=True)
def rk4_extremal(case, h1_0, h2_0, h3_0, T, step, record_every):
    """Integrate the coupled (q, h, J) system from the origin.

    Returns (times, states) recorded every ``record_every`` steps plus the
    final point.  A short final step is taken when T is not a multiple of
    ``step``.
    """
    n_full = int(np.floor(T / step + 1e-9))
    rem = T - n_full * step
    if rem <= 1e-12 * max(1.0, T):
        rem = 0.0
    n_total = n_full + (1 if rem > 0.0 else 0)

    y = np.zeros(7)
    y[3], y[4], y[5] = h1_0, h2_0, h3_0
    k1 = np.empty(7)
    k2 = np.empty(7)
    k3 = np.empty(7)
    k4 = np.empty(7)
    yt = np.empty(7)

    n_rec = n_total // record_every + 2
    ts = np.empty(n_rec)
    ys = np.empty((n_rec, 7))
    ts[0] = 0.0
    ys[0, :] = y
    m = 1

    for i in range(n_total):
        h = step if i < n_full else rem
        _extremal_rhs(case, y, k1)
        for j in range(7):
            yt[j] = y[j] + 0.5 * h * k1[j]
        _extremal_rhs(case, yt, k2)
        for j in range(7):
            yt[j] = y[j] + 0.5 * h * k2[j]
        _extremal_rhs(case, yt, k3)
        for j in range(7):
            yt[j] = y[j] + h * k3[j]
        _extremal_rhs(case, yt, k4)
        for j in range(7):
            y[j] = y[j] + (h / 6.0) * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j])
        done = i + 1
        if (done <= n_full and done % record_every == 0) or done == n_total:
            ts[m] = done * step if done <= n_full else T
            ys[m, :] = y
            m += 1

    return ts[:m].copy(), ys[:m, :].copy()


@njit(cache=True, inline="always")
def _piece_control(kind, p0, p1, p2, t):
    if kind == PIECE_CONSTANT:
        return p0, p1, p2
    # arc: lightlike circular-arc control of speed p0, angular rate p1,
    # initial phase p2
    ang = p2 + p1 * t
    return p0 * np.cos(ang), p0 * np.sin(ang), p0


@njit(cache=True)
def rk4_schedule_piece(x0, y0, z0, J0, kind, p0, p1, p2, jrate, T, step, record_every):
    """Integrate the control system under one schedule piece.

    ``jrate`` is the (constant) Lorentzian length rate of the piece's
    control: pieces are either constant controls or lightlike arcs, so the
    rate never varies along a piece.  State layout: (x, y, z, J).
    """
    n_full = int(np.floor(T / step + 1e-9))
    rem = T - n_full * step
    if rem <= 1e-12 * max(1.0, T):
        rem = 0.0
    n_total = n_full + (1 if rem > 0.0 else 0)

    y = np.empty(4)
    y[0], y[1], y[2], y[3] = x0, y0, z0, J0

    n_rec = n_total // record_every + 2
    ts = np.empty(n_rec)
    ys = np.empty((n_rec, 4))
    ts[0] = 0.0
    ys[0, :] = y
    m = 1

    k = np.empty((4, 4))
    yt = np.empty(4)
    t = 0.0
    for i in range(n_total):
        h = step if i < n_full else rem
        t = i * step if i <= n_full else T - rem
        for stage in range(4):
            if stage == 0:
                ts_stage = t
                for j in range(4):
                    yt[j] = y[j]
            elif stage == 1 or stage == 2:
                ts_stage = t + 0.5 * h
                for j in range(4):
                    yt[j] = y[j] + 0.5 * h * k[stage - 1, j]
            else:
                ts_stage = t + h
                for j in range(4):
                    yt[j] = y[j] + h * k[2, j]
            u1, u2, u3 = _piece_control(kind, p0, p1, p2, ts_stage)
            k[stage, 0] = u1
            k[stage, 1] = u2
            k[stage, 2] = -0.5 * yt[1] * u1 + 0.5 * yt[0] * u2 + u3
            k[stage, 3] = jrate
        for j in range(4):
            y[j] = y[j] + (h / 6.0) * (k[0, j] + 2.0 * k[1, j] + 2.0 * k[2, j] + k[3, j])
        done = i + 1
        if (done <= n_full and done % record_every == 0) or done == n_total:
            ts[m] = done * step if done <= n_full else T
            ys[m, :] = y
            m += 1

    return ts[:m].copy(), ys[:m, :].copy()


@njit(cache=True)
def p2_normal_endpoint(w2, w3, t1):
    """Endpoint of the P2 normal extremal with h2_0 = w2, h3 = w3.

    The covector is completed to the unit level set by
    h1_0 = -sqrt(1 + w2^2 + w3^2).  Used by the shooting solver.
    """
    A = -np.sqrt(1.0 + w2 * w2 + w3 * w3)
    B = w2
    h3 = w3
    if h3 == 0.0:
        return -A * t1, B * t1, 0.0
    s = h3 * t1
    sh_half = np.sinh(0.5 * s)
    cm1 = 2.0 * sh_half * sh_half
    sinh_s = np.sinh(s)
    x = (B * cm1 - A * sinh_s) / h3
    y = (B * sinh_s - A * cm1) / h3
    if abs(s) < 0.05:
        s2 = s * s
        ssub = (s * s2 / 6.0) * (
            1.0 + (s2 / 20.0) * (1.0 + (s2 / 42.0) * (1.0 + s2 / 72.0))
        )
    else:
        ssub = sinh_s - s
    z = s + (A * A - B * B) * ssub / (2.0 * h3 * h3)
    return x, y, z
