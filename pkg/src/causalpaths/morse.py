"""Connected components of path spaces via Morse theory on geodesics.

For the product spacetime ``R x S`` with metric ``-dt^2 + g``, timelike
(causal) paths from ``(0, p)`` to ``(T, q)`` correspond to curves in ``S``
of length ``< T`` (``<= T``), and that space is homotopy equivalent to a CW
complex with one ``k``-cell per geodesic of index ``k``.  Counting
components therefore needs the index-0 geodesics (0-cells) and, for every
index-1 geodesic, the two 0-cells its 1-cell is glued to.  We find those by
perturbing the index-1 geodesic along its unstable direction and running
Birkhoff curve shortening on both sides.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import surfaces as sf
from .errors import InputError, NonConvergenceError
from .geodesics import (
    BVP_TOL,
    CONJ_TOL,
    N_ANGLES,
    GeodesicRecord,
    find_geodesics,
    jacobi_zeros,
    same_geodesic,
)

TIMELIKE = "timelike"
CAUSAL = "causal"

#: lengths closer than this are treated as equal when comparing with T
LENGTH_TOL = 1e-6
COINCIDENT_TOL = 1e-4
N_BUMPS = 8
BUMP_AMPLITUDE = 1e-2
SWEEP_TOL = 1e-9
MAX_SWEEPS = 100_000

# polyline resolutions used by the coarse-to-fine descent
_LEVELS = (17, 33, 65)


# --------------------------------------------------------------------------
# polylines


def _lift(surface, pts):
    """Continuous representative of a polyline (unwrapped on the torus)."""
    pts = np.array(pts, dtype=float)
    if surface.embedded:
        return pts
    steps = sf.displacement(surface, pts[:-1], pts[1:])
    return np.vstack([pts[:1], pts[0] + np.cumsum(steps, axis=0)])


def _snap(surface, pts):
    return sf.project(surface, pts) if surface.embedded else pts


def polyline_length(pts):
    return float(np.linalg.norm(np.diff(pts, axis=0), axis=1).sum())


def _resample(surface, pts, n):
    """``n`` points spaced uniformly in chord length along ``pts``, snapped to the surface."""
    seg = np.linalg.norm(np.diff(pts, axis=0), axis=1)
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    s = np.linspace(0.0, cum[-1], n)
    out = np.stack([np.interp(s, cum, pts[:, i]) for i in range(pts.shape[1])], axis=1)
    out[0], out[-1] = pts[0], pts[-1]
    out[1:-1] = _snap(surface, out[1:-1])
    return out


def _sweep(surface, P, odd, even):
    for idx in (odd, even):
        P[idx] = _snap(surface, 0.5 * (P[idx - 1] + P[idx + 1]))
    return P


def _subdivide(surface, P):
    mids = _snap(surface, 0.5 * (P[:-1] + P[1:]))
    out = np.empty((2 * len(P) - 1, P.shape[1]))
    out[0::2], out[1::2] = P, mids
    return out


def _shorten(surface, P, tol, budget):
    """Midpoint sweeps on one polyline until the length decrease per sweep is below ``tol``."""
    idx = np.arange(1, len(P) - 1)
    odd, even = idx[idx % 2 == 1], idx[idx % 2 == 0]
    length = polyline_length(P)
    for sweep in range(1, budget + 1):
        P = _sweep(surface, P, odd, even)
        new = polyline_length(P)
        if length - new < tol:
            return P, sweep
        length = new
    raise NonConvergenceError(f"curve shortening did not converge within the sweep budget (length {length:.9f})")


# --------------------------------------------------------------------------
# descent


def _initial_angle(surface, P):
    """Initial direction of a fine polyline from a one-sided three-point stencil."""
    t = -3.0 * P[0] + 4.0 * P[1] - P[2]
    if surface.embedded:
        n = sf.normal(surface, P[0])
        t = t - np.dot(t, n) * n
    return sf.angle_of(surface, P[0], t / np.linalg.norm(t))


def _polish(surface, p, q, theta, length, step, bvp_tol, max_iter=40):
    """Newton iteration on the initial angle using ``d miss / d theta = -J``."""
    window = max(0.2, 0.05 * length)
    best = None
    for _ in range(max_iter):
        dirs = sf.direction(surface, p, np.atleast_1d(theta))
        ev, _, _, _ = sf.march(surface, p, dirs, length + window, step, target=q, radius=max(0.5, window))
        if not len(ev):
            break
        j = int(np.argmin(np.abs(ev[:, 1] - length)))
        s, miss, dist, J = ev[j, 1:]
        if abs(s - length) > window:
            break
        if best is None or dist < best[2]:
            best = (theta, s, dist)
        if dist <= bvp_tol:
            return theta % (2 * math.pi), float(s), float(dist)
        if abs(J) < 1e-8:
            break
        delta = float(np.clip(miss / J, -0.05, 0.05))
        theta, length = theta + delta, float(s)
    raise NonConvergenceError(
        f"could not refine a shortened curve (angle {theta:.6f}, length {length:.6f}) into a geodesic"
        + ("" if best is None else f"; best miss {best[2]:.3g}")
    )


def birkhoff_shorten(
    surface,
    polyline,
    census=None,
    *,
    tol=SWEEP_TOL,
    max_sweeps=MAX_SWEEPS,
    step=sf.DEFAULT_STEP,
    bvp_tol=BVP_TOL,
    conj_tol=CONJ_TOL,
):
    """Shorten a curve with fixed endpoints to a nearby local length minimizer.

    Each sweep replaces every odd interior vertex, then every even one, by the
    surface point closest to the midpoint of its neighbours.  Sweeps run
    until the length decrease per sweep drops below ``tol``, first on a coarse
    resampling of ``polyline`` and then after each of two subdivisions.  The
    limit curve is refined into an exact geodesic by shooting from its
    initial direction.

    Returns the matching record of ``census`` (a list of records) when there
    is one under the dedup metric, otherwise a fresh record.
    """
    pts = np.array(polyline, dtype=float)
    if pts.ndim != 2 or len(pts) < 3 or pts.shape[1] != surface.dim:
        raise InputError("polyline needs at least 3 points of the surface's dimension")
    p = sf.as_point(surface, pts[0])
    q = sf.as_point(surface, pts[-1])
    for x in pts[1:-1]:
        sf.as_point(surface, x, tol=1e-6)
    P = _resample(surface, _lift(surface, pts), _LEVELS[0])

    used = 0
    for level, n in enumerate(_LEVELS):
        if level:
            P = _subdivide(surface, P)
            assert len(P) == n
        P, sweeps = _shorten(surface, P, tol, max_sweeps - used)
        used += sweeps

    theta, length, dist = _polish(surface, p, q, _initial_angle(surface, P), polyline_length(P), step, bvp_tol)
    trace = sf.integrate_geodesic(surface, p, sf.direction(surface, p, theta), length, step)
    index, degenerate = jacobi_zeros(trace, conj_tol)
    fresh = GeodesicRecord(p, q, length, theta, index, trace, degenerate, dist)
    if census:
        matches = [r for r in census if same_geodesic(r, fresh)]
        if matches:
            return min(matches, key=lambda r: (abs(r.length - fresh.length), abs(r.initial_angle - fresh.initial_angle)))
    return fresh


def _bump_profiles(s, length, n_bumps, width):
    """Smooth bumps vanishing at both ends, centred at ``(k + 1/2) / n_bumps`` of the length."""
    centres = (np.arange(n_bumps) + 0.5) / n_bumps * length
    return np.sin(np.pi * s / length)[None, :] * np.exp(-(((s[None, :] - centres[:, None]) / width) ** 2))


# bump widths as fractions of the length; narrow bumps only see the b'^2 term
# of the second variation, so the wide fallback catches broad negative modes
_WIDTHS = (1 / 3, 1.0)


def _fine_points(geo, n=257):
    pick = np.unique(np.linspace(0, len(geo.trace) - 1, n).round().astype(int))
    tr = geo.trace
    return tr.s[pick], tr.lifted[pick], tr.velocities[pick]


def negative_direction(surface, geo, n_bumps=N_BUMPS, amplitude=BUMP_AMPLITUDE):
    """Bump-shaped normal displacement along which ``geo`` gets shortest.

    Tries every bump profile at ``amplitude`` and returns ``(profile, s,
    length change)`` for the one with the largest decrease, evaluated on the
    fine resampled trace.
    """
    s, P, V = _fine_points(geo)
    N = sf.left_normal(surface, P, V)
    base = polyline_length(P)
    best = None
    for frac in _WIDTHS:
        for prof in _bump_profiles(s, geo.length, n_bumps, frac * geo.length):
            Q = P + amplitude * prof[:, None] * N
            Q[1:-1] = _snap(surface, Q[1:-1])
            dl = polyline_length(Q) - base
            if best is None or dl < best[2]:
                best = (prof, s, dl)
        if best[2] < 0:
            break
    return best


def descend(surface, geo, sign, records=None, n_bumps=N_BUMPS, amplitude=BUMP_AMPLITUDE, **kw):
    """Birkhoff descent from ``geo`` pushed by ``sign * amplitude`` along its negative direction."""
    prof, s, _ = negative_direction(surface, geo, n_bumps, amplitude)
    _, P, V = _fine_points(geo)
    Q = P + sign * amplitude * prof[:, None] * sf.left_normal(surface, P, V)
    Q[1:-1] = _snap(surface, Q[1:-1])
    if not surface.embedded:
        Q = sf.project(surface, Q)
    return birkhoff_shorten(surface, Q, records, **kw)


# --------------------------------------------------------------------------
# census


@dataclass
class Event:
    """A cell attached to the path-space CW model at length ``length``."""

    length: float
    kind: str  # birth | merge | loop | higher
    geodesic: str
    components: tuple = ()
    limits: tuple = ()
    flags: list = field(default_factory=list)

    def to_dict(self):
        return {
            "l": self.length,
            "kind": self.kind,
            "geodesic": self.geodesic,
            "components": list(self.components),
            "limits": list(self.limits),
            "flags": list(self.flags),
        }


@dataclass
class MergeEvent:
    """An index-1 geodesic whose cell joins two distinct components."""

    length: float
    class_a: str
    class_b: str
    witness: GeodesicRecord


class _UnionFind:
    def __init__(self):
        self.parent = {}

    def add(self, x):
        self.parent.setdefault(x, x)

    def find(self, x):
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        # keep the earlier-born component as representative
        lo, hi = sorted((ra, rb), key=_id_key)
        self.parent[hi] = lo
        return lo

    def roots(self):
        return {self.find(x) for x in self.parent}


def _id_key(gid):
    return int(gid[1:])


@dataclass
class ClassCensus:
    """Piecewise-constant homotopy-class counts ``T -> (timelike, causal)``."""

    surface: sf.Surface
    p: np.ndarray
    q: np.ndarray
    T_max: float
    records: dict
    events: list
    settings: dict = field(default_factory=dict)
    components: dict = field(default_factory=dict)

    def count(self, T, flavor=TIMELIKE):
        if flavor not in (TIMELIKE, CAUSAL):
            raise InputError(f"flavor must be {TIMELIKE!r} or {CAUSAL!r}, got {flavor!r}")
        if not (T >= 0) or T > self.T_max + LENGTH_TOL:
            raise InputError(f"T = {T!r} is outside the census range [0, {self.T_max}]")
        if flavor == TIMELIKE:
            active = [e for e in self.events if e.length < T - LENGTH_TOL]
        else:
            active = [e for e in self.events if e.length <= T + LENGTH_TOL]
        uf = _UnionFind()
        for e in active:
            if e.kind == "birth":
                uf.add(e.geodesic)
            elif e.kind == "merge":
                uf.union(*e.components)
        return len(uf.roots())

    def event_lengths(self):
        """Distinct event lengths (clustered within ``LENGTH_TOL``)."""
        out = []
        for e in self.events:
            if not out or e.length - out[-1] > LENGTH_TOL:
                out.append(e.length)
        return out

    def intervals(self):
        """Count table: open intervals between event lengths, and the event lengths themselves."""
        rows = []
        cuts = [x for x in self.event_lengths() if x <= self.T_max]
        edges = [0.0] + cuts + [self.T_max]
        for i, (lo, hi) in enumerate(zip(edges, edges[1:])):
            if hi > lo:
                mid = 0.5 * (lo + hi)
                rows.append({"T_lo": lo, "T_hi": hi, "closed": False,
                             "timelike": self.count(mid, TIMELIKE), "causal": self.count(mid, CAUSAL)})
            if i < len(cuts):
                rows.append({"T_lo": hi, "T_hi": hi, "closed": True,
                             "timelike": self.count(hi, TIMELIKE), "causal": self.count(hi, CAUSAL)})
        return rows

    def merges(self):
        return [
            MergeEvent(e.length, e.components[0], e.components[1], self.records[e.geodesic])
            for e in self.events
            if e.kind == "merge"
        ]

    def to_dict(self):
        return {
            "surface": self.surface.to_dict(),
            "p": self.p.tolist(),
            "q": self.q.tolist(),
            "T_max": self.T_max,
            "geodesics": {gid: rec.to_dict() for gid, rec in self.records.items()},
            "events": [e.to_dict() for e in self.events],
            "counts": self.intervals(),
            "components": dict(self.components),
        }


def class_count(census, T, flavor=TIMELIKE):
    """Number of timelike (cells with length ``< T``) or causal (``<= T``) classes."""
    return census.count(T, flavor)


def non_hausdorff_certificate(census):
    """The merge events of ``census``; any entry shows the timelike class space is not Hausdorff."""
    return census.merges()


def default_workers():
    try:
        return max(1, int(os.environ.get("TOOL_THREADS", "")))
    except ValueError:
        return os.cpu_count() or 1


def build_census(
    surface,
    p,
    q,
    T_max,
    *,
    n_angles=N_ANGLES,
    step=sf.DEFAULT_STEP,
    bvp_tol=BVP_TOL,
    conj_tol=CONJ_TOL,
    n_bumps=N_BUMPS,
    bump_amplitude=BUMP_AMPLITUDE,
    workers=None,
):
    """Census of path-space components between ``p`` and ``q`` for ``0 <= T <= T_max``."""
    if not (T_max > 0 and math.isfinite(T_max)):
        raise InputError(f"T_max must be positive and finite, got {T_max!r}")
    found = find_geodesics(surface, p, q, T_max, n_angles=n_angles, step=step, bvp_tol=bvp_tol, conj_tol=conj_tol)
    records = {f"g{i}": rec for i, rec in enumerate(found)}
    saddles = [gid for gid, rec in records.items() if rec.index == 1]
    kw = dict(n_bumps=n_bumps, amplitude=bump_amplitude, step=step, bvp_tol=bvp_tol, conj_tol=conj_tol)

    def run(job):
        gid, sign = job
        try:
            return descend(surface, records[gid], sign, found, **kw)
        except NonConvergenceError as exc:
            exc.geodesic = records[gid]
            raise

    jobs = [(gid, sign) for gid in saddles for sign in (1.0, -1.0)]
    workers = workers or default_workers()
    if workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            limits = list(pool.map(run, jobs))
    else:
        limits = [run(job) for job in jobs]

    ids = {id(rec): gid for gid, rec in records.items()}
    extra = []
    limit_ids = {}
    for (gid, sign), lim in zip(jobs, limits):
        lid = ids.get(id(lim))
        if lid is None:
            lid = f"g{len(records) + len(extra)}"
            ids[id(lim)] = lid
            extra.append((lid, lim))
        limit_ids.setdefault(gid, []).append(lid)
    records.update(extra)

    events = []
    for gid, rec in records.items():
        flags = ["degenerate-endpoint"] if rec.degenerate else []
        if any(gid == e[0] for e in extra):
            flags.append("found-by-descent")
        if rec.index == 0:
            events.append(Event(rec.length, "birth", gid, (gid,), flags=flags))
        elif rec.index == 1:
            events.append(Event(rec.length, "loop", gid, limits=tuple(limit_ids.get(gid, ())), flags=flags))
        else:
            events.append(Event(rec.length, "higher", gid, flags=flags))
    order = {"birth": 0, "loop": 1, "higher": 2}
    events.sort(key=lambda e: (e.length, order[e.kind], _id_key(e.geodesic)))

    uf = _UnionFind()
    for e in events:
        if e.kind == "birth":
            uf.add(e.geodesic)
        elif e.limits:
            if any(records[lid].index != 0 or records[lid].length >= e.length for lid in e.limits):
                e.flags.append("unresolved-limit")
                continue
            ra, rb = (uf.find(lid) for lid in e.limits)
            if ra != rb:
                e.kind = "merge"
                e.components = (ra, rb)
                uf.union(ra, rb)
            else:
                e.components = (ra,)
    for a, b in zip(events, events[1:]):
        if b.length - a.length < COINCIDENT_TOL:
            for e in (a, b):
                if "possibly-coincident" not in e.flags:
                    e.flags.append("possibly-coincident")

    settings = dict(n_angles=n_angles, step=step, bvp_tol=bvp_tol, conj_tol=conj_tol,
                    n_bumps=n_bumps, bump_amplitude=bump_amplitude)
    comps = {gid: uf.find(gid) for gid in uf.parent}
    return ClassCensus(surface, found[0].start if found else sf.as_point(surface, p),
                       sf.as_point(surface, q), float(T_max), records, events, settings, comps)
