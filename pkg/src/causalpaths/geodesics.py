"""Enumeration of geodesics between two points and their Morse indices.

Geodesics from ``p`` to ``q`` are found by shooting: a fan of ``n_angles``
unit-speed rays leaves ``p``, and along each ray we record every closest
approach to ``q`` together with the signed lateral miss (the component of
``q - gamma(s)`` along the in-surface normal ``n x gamma'``).  A geodesic
through ``q`` shows up as a sign change of the miss between neighbouring
rays; each such bracket is shrunk on the angle until the endpoint misses
``q`` by less than ``bvp_tol``.

The Morse index of a geodesic on a surface is the number of interior zeros
of the scalar Jacobi field ``J'' + K J = 0``, ``J(0) = 0``, ``J'(0) = 1``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import surfaces as sf
from .errors import DegeneracyWarning, DegenerateEndpointsError, DegenerateFamilyError, InputError

N_ANGLES = 2048
BVP_TOL = 1e-8
CONJ_TOL = 1e-5
DEDUP_LENGTH = 1e-4
DEDUP_ANGLE = 1e-3

# branch matching between neighbouring rays, in arclength
_PAIR_TOL = 0.05
_SECTIONS = 1
_MAX_PASSES = 80


@dataclass
class GeodesicRecord:
    """One geodesic from ``start`` to ``end``."""

    start: np.ndarray
    end: np.ndarray
    length: float
    initial_angle: float
    index: int
    trace: sf.GeodesicPath = field(repr=False)
    degenerate: bool = False
    miss: float = 0.0

    def row(self):
        """CSV row ``(length, index, initial_angle, degenerate_flag)``."""
        return [f"{self.length:.12f}", str(self.index), f"{self.initial_angle:.12f}", str(int(self.degenerate))]

    def to_dict(self):
        return {
            "length": self.length,
            "index": self.index,
            "initial_angle": self.initial_angle,
            "degenerate": self.degenerate,
            "miss": self.miss,
        }


@dataclass
class _Events:
    """Closest approaches to the target point found while marching a fan of rays."""

    ray: np.ndarray
    s: np.ndarray
    miss: np.ndarray
    dist: np.ndarray
    jacobi: np.ndarray

    def for_ray(self, i):
        sel = self.ray == i
        return self.s[sel], self.miss[sel], self.dist[sel], self.jacobi[sel]


def _hermite(t):
    t2, t3 = t * t, t * t * t
    return 2 * t3 - 3 * t2 + 1, t3 - 2 * t2 + t, -2 * t3 + 3 * t2, t3 - t2


def _march(surface, p, q, angles, s_end, step, radius):
    """Shoot rays from ``p`` and collect their closest approaches to ``q`` within ``radius``."""
    dirs = sf.direction(surface, p, np.atleast_1d(angles))
    ev, _, _, _ = sf.march(surface, p, dirs, s_end, step, target=q, radius=radius)
    return _Events(ev[:, 0].astype(int), ev[:, 1], ev[:, 2], ev[:, 3], ev[:, 4])


def _nearest_event(events, i, target):
    s, miss, dist, jac = events.for_ray(i)
    if not len(s):
        return None
    j = int(np.argmin(np.abs(s - target)))
    if abs(s[j] - target) > _PAIR_TOL:
        return None
    return float(s[j]), float(miss[j]), float(dist[j]), float(jac[j])


def _scan_step(surface, step):
    # the flat flow is exact, so samples only need to resolve closest approaches
    return step if surface.embedded else max(step, min(0.05, surface.L / 16))


def _refine_brackets(surface, p, q, brackets, step, tol, radius):
    """Shrink angle brackets ``(lo, hi, m_lo, m_hi, s)`` until the miss drops below ``tol``.

    Each pass bisects every bracket (one batched march for all midpoints) and
    keeps the half that still straddles a sign change.
    Returns ``(angle, length, dist)`` per converged bracket.
    """
    roots = []
    active = [list(b) + [None] for b in brackets]
    for _ in range(_MAX_PASSES):
        if not active:
            break
        fracs = np.arange(1, _SECTIONS + 1) / (_SECTIONS + 1)
        angles = np.concatenate([lo + (hi - lo) * fracs for lo, hi, *_ in active])
        s_end = max(b[4] for b in active) + _PAIR_TOL + 10 * step
        events = _march(surface, p, q, angles, s_end, step, radius)
        still = []
        for bi, (lo, hi, mlo, mhi, target, best) in enumerate(active):
            pts = [(lo, mlo, None)]
            for j in range(_SECTIONS):
                ev = _nearest_event(events, bi * _SECTIONS + j, target)
                if ev is not None:
                    pts.append((lo + (hi - lo) * fracs[j], ev[1], ev))
                    if best is None or ev[2] < best[2]:
                        best = (lo + (hi - lo) * fracs[j], ev[0], ev[2])
            pts.append((hi, mhi, None))
            if best is not None and best[2] <= tol:
                roots.append(best)
                continue
            nxt = None
            for (a0, m0, e0), (a1, m1, e1) in zip(pts, pts[1:]):
                if m0 * m1 <= 0:
                    evs = [e[0] for e in (e0, e1) if e is not None]
                    nxt = [a0, a1, m0, m1, float(np.mean(evs)) if evs else target, best]
                    break
            if nxt is None or nxt[1] - nxt[0] < 1e-15:
                continue
            still.append(nxt)
        active = still
    return roots


def _check_endpoints(surface, p, q):
    gap = float(np.linalg.norm(sf.displacement(surface, p, q)))
    if gap < 1e-9:
        raise DegenerateEndpointsError("p and q coincide; geodesic loops are not enumerated")
    if surface.kind == sf.SPHERE and float(np.linalg.norm(p + q)) < 1e-7 * surface.a:
        raise DegenerateFamilyError("p and q are antipodal on the sphere: the geodesics form a continuous family")


def find_geodesics(
    surface,
    p,
    q,
    L_max,
    *,
    n_angles=N_ANGLES,
    step=sf.DEFAULT_STEP,
    bvp_tol=BVP_TOL,
    conj_tol=CONJ_TOL,
):
    """All geodesics from ``p`` to ``q`` of length at most ``L_max``, sorted by length.

    Completeness is relative to the angular grid: two geodesics whose initial
    directions both fall between neighbouring grid rays can cancel each other's
    sign change and be missed.
    """
    if not (L_max > 0 and math.isfinite(L_max)):
        raise InputError(f"L_max must be positive and finite, got {L_max!r}")
    if n_angles < 8 or step <= 0 or bvp_tol <= 0 or conj_tol <= 0:
        raise InputError("n_angles must be >= 8 and step, bvp_tol, conj_tol positive")
    p = sf.as_point(surface, p)
    q = sf.as_point(surface, q)
    _check_endpoints(surface, p, q)

    dtheta = 2 * math.pi / n_angles
    angles = np.arange(n_angles) * dtheta
    scan = _scan_step(surface, step)
    s_end = L_max + _PAIR_TOL + 10 * scan
    # |J| <= s when K >= 0, so the miss moves by at most s * dtheta between rays
    radius = 2.0 * dtheta * s_end + 1e-3
    events = _march(surface, p, q, angles, s_end, scan, radius)

    brackets = []
    for i in range(n_angles):
        s_i, m_i, _, _ = events.for_ray(i)
        s_j, m_j, _, _ = events.for_ray((i + 1) % n_angles)
        if not len(s_i) or not len(s_j):
            continue
        for s, m in zip(s_i, m_i):
            k = int(np.argmin(np.abs(s_j - s)))
            if abs(s_j[k] - s) < _PAIR_TOL and m * m_j[k] <= 0:
                brackets.append((angles[i], angles[i] + dtheta, m, m_j[k], 0.5 * (s + s_j[k])))

    roots = _refine_brackets(surface, p, q, brackets, scan, 0.5 * bvp_tol, radius)
    roots = [r for r in roots if r[1] <= L_max]
    records = []
    for theta, length, dist in _dedup(sorted(roots, key=lambda r: (r[1], r[0] % (2 * math.pi)))):
        theta = float(theta % (2 * math.pi))
        trace = sf.integrate_geodesic(surface, p, sf.direction(surface, p, theta), length, step)
        rec = GeodesicRecord(p, q, float(length), theta, 0, trace, miss=float(dist))
        rec.index, rec.degenerate = jacobi_zeros(trace, conj_tol)
        records.append(rec)
    return records


def _angle_gap(a, b):
    d = abs(a - b) % (2 * math.pi)
    return min(d, 2 * math.pi - d)


def _dedup(roots):
    kept = []
    for r in roots:
        dup = next((k for k in kept if abs(k[1] - r[1]) < DEDUP_LENGTH and _angle_gap(k[0], r[0]) < DEDUP_ANGLE), None)
        if dup is None:
            kept.append(r)
        elif r[2] < dup[2]:
            kept[kept.index(dup)] = r
    return kept


def same_geodesic(a, b):
    """Dedup metric: lengths within 1e-4 and initial directions within 1e-3 rad."""
    return abs(a.length - b.length) < DEDUP_LENGTH and _angle_gap(a.initial_angle, b.initial_angle) < DEDUP_ANGLE


def jacobi_zeros(trace, conj_tol=CONJ_TOL):
    """Count interior zeros of the sampled Jacobi field; flag a zero near the endpoint.

    Returns ``(count, degenerate)``.  Each sign change between samples is
    refined by bisection on the cubic Hermite interpolant of ``(J, J')``.
    """
    s = trace.s
    J, Jp = trace.jacobi[:, 0], trace.jacobi[:, 1]
    length = float(s[-1])
    zeros = []
    for k in np.flatnonzero(J[1:-1] * J[2:] <= 0) + 1:
        h = s[k + 1] - s[k]
        lo, hi = 0.0, 1.0
        f_lo = J[k]
        if f_lo == 0.0:
            zeros.append(float(s[k]))
            continue
        for _ in range(50):
            mid = 0.5 * (lo + hi)
            c0, c1, c2, c3 = _hermite(mid)
            f = c0 * J[k] + c1 * h * Jp[k] + c2 * J[k + 1] + c3 * h * Jp[k + 1]
            if (f < 0) == (f_lo < 0):
                lo, f_lo = mid, f
            else:
                hi = mid
        zeros.append(float(s[k] + 0.5 * (lo + hi) * h))
    zeros = sorted(set(z for z in zeros if 0.0 < z < length))
    near_end = any(length - z < conj_tol for z in zeros)
    if abs(J[-1]) <= conj_tol * max(abs(Jp[-1]), 1e-300):
        near_end = True
    count = sum(1 for z in zeros if z < length)
    return count, near_end


def morse_index(surface, geo, conj_tol=CONJ_TOL):
    """Morse index of ``geo``: zeros of its Jacobi field in the open interval ``(0, length)``.

    A zero within ``conj_tol`` of the endpoint marks ``geo`` as degenerate and
    emits a :class:`DegeneracyWarning`.
    """
    trace = geo.trace
    if trace.jacobi is None:
        trace = sf.integrate_geodesic(surface, geo.start, sf.direction(surface, geo.start, geo.initial_angle), geo.length)
    count, degenerate = jacobi_zeros(trace, conj_tol)
    if degenerate:
        geo.degenerate = True
        warnings.warn(f"conjugate point within {conj_tol:g} of the endpoint of a geodesic of length {geo.length:.6f}", DegeneracyWarning, stacklevel=2)
    return count
