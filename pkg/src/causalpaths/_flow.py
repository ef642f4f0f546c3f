"""Compiled geodesic flow with Jacobi data and closest-approach detection.

One kernel serves every caller: it marches a batch of rays from a common
start point, each with its own step size and step count, optionally storing
the samples, and records each local minimum of the distance to a target
point that comes within ``radius``.

Embedded surfaces (``torus=False``) are ellipsoids ``sum(x_i^2 inv2_i) = 1``;
``k0 < 0`` marks the sphere, whose curvature is the constant ``inv2[0]``.
Each RK4 step is followed by one Newton correction onto the surface, tangent
projection and renormalization of the velocity.  On the torus the flow is
evaluated exactly.
"""

import math

import numpy as np
from numba import njit


@njit(cache=True, inline="always")
def _acc(i0, i1, i2, k0, x0, x1, x2, v0, v1, v2):
    w0 = x0 * i0
    w1 = x1 * i1
    w2 = x2 * i2
    den = w0 * w0 + w1 * w1 + w2 * w2
    c = -(v0 * v0 * i0 + v1 * v1 * i1 + v2 * v2 * i2) / den
    if k0 < 0.0:
        K = i0
    else:
        K = k0 / (den * den)
    return c * w0, c * w1, c * w2, K


@njit(cache=True)
def _step(i0, i1, i2, k0, x0, x1, x2, v0, v1, v2, J, P, h):
    hh = 0.5 * h
    a0, a1, a2, K1 = _acc(i0, i1, i2, k0, x0, x1, x2, v0, v1, v2)
    b1 = -K1 * J
    u0, u1, u2 = v0 + hh * a0, v1 + hh * a1, v2 + hh * a2
    P2 = P + hh * b1
    c0, c1, c2, K2 = _acc(i0, i1, i2, k0, x0 + hh * v0, x1 + hh * v1, x2 + hh * v2, u0, u1, u2)
    b2 = -K2 * (J + hh * P)
    w0, w1, w2 = v0 + hh * c0, v1 + hh * c1, v2 + hh * c2
    P3 = P + hh * b2
    d0, d1, d2, K3 = _acc(i0, i1, i2, k0, x0 + hh * u0, x1 + hh * u1, x2 + hh * u2, w0, w1, w2)
    b3 = -K3 * (J + hh * P2)
    z0, z1, z2 = v0 + h * d0, v1 + h * d1, v2 + h * d2
    P4 = P + h * b3
    e0, e1, e2, K4 = _acc(i0, i1, i2, k0, x0 + h * w0, x1 + h * w1, x2 + h * w2, z0, z1, z2)
    b4 = -K4 * (J + h * P3)
    h6 = h / 6.0
    nx0 = x0 + h6 * (v0 + 2.0 * (u0 + w0) + z0)
    nx1 = x1 + h6 * (v1 + 2.0 * (u1 + w1) + z1)
    nx2 = x2 + h6 * (v2 + 2.0 * (u2 + w2) + z2)
    nv0 = v0 + h6 * (a0 + 2.0 * (c0 + d0) + e0)
    nv1 = v1 + h6 * (a1 + 2.0 * (c1 + d1) + e1)
    nv2 = v2 + h6 * (a2 + 2.0 * (c2 + d2) + e2)
    nJ = J + h6 * (P + 2.0 * (P2 + P3) + P4)
    nP = P + h6 * (b1 + 2.0 * (b2 + b3) + b4)
    # back onto the level set, then onto its tangent plane
    g0, g1, g2 = nx0 * i0, nx1 * i1, nx2 * i2
    f = nx0 * g0 + nx1 * g1 + nx2 * g2 - 1.0
    t = 0.5 * f / (g0 * g0 + g1 * g1 + g2 * g2)
    nx0 -= t * g0
    nx1 -= t * g1
    nx2 -= t * g2
    g0, g1, g2 = nx0 * i0, nx1 * i1, nx2 * i2
    gn = math.sqrt(g0 * g0 + g1 * g1 + g2 * g2)
    g0, g1, g2 = g0 / gn, g1 / gn, g2 / gn
    vn = nv0 * g0 + nv1 * g1 + nv2 * g2
    nv0 -= vn * g0
    nv1 -= vn * g1
    nv2 -= vn * g2
    sp = math.sqrt(nv0 * nv0 + nv1 * nv1 + nv2 * nv2)
    return nx0, nx1, nx2, nv0 / sp, nv1 / sp, nv2 / sp, nJ, nP


@njit(cache=True, inline="always")
def _hermite(t):
    t2 = t * t
    t3 = t2 * t
    return 2 * t3 - 3 * t2 + 1, t3 - 2 * t2 + t, -2 * t3 + 3 * t2, t3 - t2


@njit(cache=True, inline="always")
def _hermite_d(t):
    t2 = t * t
    return 6 * t2 - 6 * t, 3 * t2 - 4 * t + 1, -6 * t2 + 6 * t, 3 * t2 - 2 * t


@njit(cache=True)
def _closest(torus, inv2, d, h, R0, V0, R1, V1, q, J0, P0, J1, P1):
    """Bisection on the Hermite interpolant for the zero of <R, R'> inside one step."""
    lo, hi = 0.0, 1.0
    R = np.empty(d)
    W = np.empty(d)
    for _ in range(40):
        mid = 0.5 * (lo + hi)
        c0, c1, c2, c3 = _hermite(mid)
        e0, e1, e2, e3 = _hermite_d(mid)
        g = 0.0
        for i in range(d):
            R[i] = c0 * R0[i] + c1 * h * V0[i] + c2 * R1[i] + c3 * h * V1[i]
            W[i] = e0 * R0[i] + e1 * h * V0[i] + e2 * R1[i] + e3 * h * V1[i]
            g += R[i] * W[i]
        if g < 0.0:
            lo = mid
        else:
            hi = mid
    tau = 0.5 * (lo + hi)
    c0, c1, c2, c3 = _hermite(tau)
    e0, e1, e2, e3 = _hermite_d(tau)
    wn = 0.0
    dist = 0.0
    for i in range(d):
        R[i] = c0 * R0[i] + c1 * h * V0[i] + c2 * R1[i] + c3 * h * V1[i]
        W[i] = e0 * R0[i] + e1 * h * V0[i] + e2 * R1[i] + e3 * h * V1[i]
        wn += W[i] * W[i]
        dist += R[i] * R[i]
    wn = math.sqrt(wn)
    for i in range(d):
        W[i] /= wn
    # signed miss <q - x, n x t>
    if torus:
        miss = -(R[0] * -W[1] + R[1] * W[0])
    else:
        n0 = (q[0] + R[0]) * inv2[0]
        n1 = (q[1] + R[1]) * inv2[1]
        n2 = (q[2] + R[2]) * inv2[2]
        nn = math.sqrt(n0 * n0 + n1 * n1 + n2 * n2)
        n0, n1, n2 = n0 / nn, n1 / nn, n2 / nn
        N0 = n1 * W[2] - n2 * W[1]
        N1 = n2 * W[0] - n0 * W[2]
        N2 = n0 * W[1] - n1 * W[0]
        miss = -(R[0] * N0 + R[1] * N1 + R[2] * N2)
    Jt = c0 * J0 + c1 * h * P0 + c2 * J1 + c3 * h * P1
    return tau, miss, math.sqrt(dist), Jt


@njit(cache=True)
def march(torus, inv2, k0, L, p, q, V0, hs, nsteps, radius, find, store):
    """March rays ``V0[r]`` from ``p``; see the module docstring.

    Returns ``(events, trace)``: ``events`` is an ``(m, 5)`` array of
    ``(ray, s, miss, dist, J)``; ``trace`` is ``(n, max_steps + 1, 2 d + 2)``
    holding ``(x, v, J, J')`` when ``store`` is set (unused rows are zero).
    """
    n = V0.shape[0]
    d = p.shape[0]
    if store:
        trace = np.zeros((n, nsteps.max() + 1, 2 * d + 2))
    else:
        trace = np.zeros((0, 0, 0))
    events = np.zeros((16, 5))
    m = 0
    i0, i1, i2 = inv2[0], inv2[1], inv2[2]
    x = np.empty(d)
    v = np.empty(d)
    xn = np.empty(d)
    vn = np.empty(d)
    R0 = np.empty(d)
    R1 = np.empty(d)
    for r in range(n):
        h = hs[r]
        for i in range(d):
            x[i] = p[i]
            v[i] = V0[r, i]
        J, P = 0.0, 1.0
        if store:
            for i in range(d):
                trace[r, 0, i] = x[i]
                trace[r, 0, d + i] = v[i]
            trace[r, 0, 2 * d] = 0.0
            trace[r, 0, 2 * d + 1] = 1.0
        for k in range(nsteps[r]):
            if torus:
                for i in range(d):
                    xn[i] = x[i] + h * v[i]
                    vn[i] = v[i]
                nJ, nP = J + h * P, P
            else:
                a0, a1, a2, b0, b1, b2, nJ, nP = _step(i0, i1, i2, k0, x[0], x[1], x[2], v[0], v[1], v[2], J, P, h)
                xn[0], xn[1], xn[2] = a0, a1, a2
                vn[0], vn[1], vn[2] = b0, b1, b2
            if find:
                g0 = 0.0
                g1 = 0.0
                r0 = 0.0
                r1 = 0.0
                for i in range(d):
                    R0[i] = x[i] - q[i]
                    if torus:
                        R0[i] -= L * math.floor(R0[i] / L + 0.5)
                    R1[i] = R0[i] + xn[i] - x[i]
                    g0 += R0[i] * v[i]
                    g1 += R1[i] * vn[i]
                    r0 += R0[i] * R0[i]
                    r1 += R1[i] * R1[i]
                if g0 < 0.0 and g1 >= 0.0 and math.sqrt(min(r0, r1)) < radius + h:
                    tau, miss, dist, Jt = _closest(torus, inv2, d, h, R0, v, R1, vn, q, J, P, nJ, nP)
                    if dist < radius:
                        if m == events.shape[0]:
                            grown = np.zeros((2 * m, 5))
                            grown[:m] = events
                            events = grown
                        events[m, 0] = r
                        events[m, 1] = (k + tau) * h
                        events[m, 2] = miss
                        events[m, 3] = dist
                        events[m, 4] = Jt
                        m += 1
            for i in range(d):
                x[i] = xn[i]
                v[i] = vn[i]
            J, P = nJ, nP
            if store:
                for i in range(d):
                    trace[r, k + 1, i] = x[i]
                    trace[r, k + 1, d + i] = v[i]
                trace[r, k + 1, 2 * d] = J
                trace[r, k + 1, 2 * d + 1] = P
    return events[:m], trace
