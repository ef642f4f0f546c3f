import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from causalpaths import morse
from causalpaths import surfaces as sf
from causalpaths.errors import InputError, NonConvergenceError
from causalpaths.geodesics import find_geodesics
from causalpaths.morse import CAUSAL, TIMELIKE, birkhoff_shorten, class_count, non_hausdorff_certificate

P, Q = np.array([1.0, 0.0, 0.0]), np.array([0.0, 1.0, 0.0])
PI = math.pi


def _perturbed(surface, geo, eps, axis=None, n=65):
    tr = geo.trace
    pick = np.linspace(0, len(tr) - 1, n).round().astype(int)
    pts = tr.points[pick].copy()
    bump = eps * np.sin(np.pi * tr.s[pick] / geo.length)
    if axis is None:
        pts = pts + bump[:, None] * sf.left_normal(surface, pts, tr.velocities[pick])
    else:
        pts = pts + bump[:, None] * np.asarray(axis, float)
    return sf.project(surface, pts)


# --------------------------------------------------------------------------
# Birkhoff shortening


def test_birkhoff_sphere_arc(sphere):
    (arc,) = [r for r in find_geodesics(sphere, P, Q, 2.0)]
    rec = birkhoff_shorten(sphere, _perturbed(sphere, arc, 0.05))
    assert abs(rec.length - PI / 2) < 1e-5
    assert rec.index == 0
    # matched against a supplied census
    assert birkhoff_shorten(sphere, _perturbed(sphere, arc, -0.05), [arc]) is arc


def test_birkhoff_ellipsoid_l2_meridian(ellipsoid_census):
    recs = list(ellipsoid_census.records.values())
    l2 = next(r for r in recs if abs(r.length - 1.5 * PI) < 1e-6)
    pert = _perturbed(ellipsoid_census.surface, l2, 1e-2, axis=[0, 0, 1])
    rec = birkhoff_shorten(ellipsoid_census.surface, pert, recs)
    assert rec is l2
    assert rec.index == 0


def test_birkhoff_ell3_two_sided(ellipsoid_census):
    surface = ellipsoid_census.surface
    recs = list(ellipsoid_census.records.values())
    saddle = next(r for r in recs if r.index == 1)
    limits = sorted(morse.descend(surface, saddle, sign, recs).length for sign in (1.0, -1.0))
    assert limits == [pytest.approx(PI / 2, abs=1e-6), pytest.approx(1.5 * PI, abs=1e-6)]
    _, _, dl = morse.negative_direction(surface, saddle)
    assert dl < 0


def test_birkhoff_torus(torus):
    pts = np.array([[0.0, 0.0], [1.0, 0.4], [2.0, -0.3], [3.0, 0.0]])
    rec = birkhoff_shorten(torus, pts)
    assert abs(rec.length - 3.0) < 1e-8 and rec.index == 0


def test_birkhoff_errors(sphere):
    with pytest.raises(InputError):
        birkhoff_shorten(sphere, [P, Q])
    with pytest.raises(InputError):
        birkhoff_shorten(sphere, [P, [0.9, 0.5, 0.0], Q])
    arc = find_geodesics(sphere, P, Q, 2.0)[0]
    with pytest.raises(NonConvergenceError):
        birkhoff_shorten(sphere, _perturbed(sphere, arc, 0.3), max_sweeps=3)


def test_polyline_length():
    pts = np.array([[0, 0], [3, 4], [3, 5]], float)
    assert morse.polyline_length(pts) == 6.0


# --------------------------------------------------------------------------
# census


def test_ellipsoid_events(ellipsoid_census, ell3):
    kinds = [e.kind for e in ellipsoid_census.events]
    assert kinds[:3] == ["birth", "birth", "merge"]
    assert set(kinds[3:]) <= {"loop"}
    assert ellipsoid_census.events[0].length == pytest.approx(PI / 2, abs=1e-6)
    assert ellipsoid_census.events[1].length == pytest.approx(1.5 * PI, abs=1e-6)
    assert 1.55 * PI <= ell3 <= 1.65 * PI
    lengths = [e.length for e in ellipsoid_census.events]
    assert lengths == sorted(lengths)


def test_ellipsoid_merge_joins_births(ellipsoid_census):
    (m,) = non_hausdorff_certificate(ellipsoid_census)
    births = [e.geodesic for e in ellipsoid_census.events if e.kind == "birth"]
    assert {m.class_a, m.class_b} == set(births)
    assert m.witness.index == 1
    # the mirror copy of the saddle is a loop: both components are already joined
    loop = [e for e in ellipsoid_census.events if e.kind == "loop"]
    assert len(loop) == 1 and "possibly-coincident" in loop[0].flags


@pytest.mark.parametrize("T, tl, ca", [
    (1.0, 0, 0), (PI, 1, 1), (1.5 * PI, 1, 2), (4.9, 2, 2), (5.5, 1, 1), (PI / 2, 0, 1),
])
def test_class_count_examples(ellipsoid_census, T, tl, ca):
    assert class_count(ellipsoid_census, T, TIMELIKE) == tl
    assert class_count(ellipsoid_census, T, CAUSAL) == ca


def test_count_at_ell3(ellipsoid_census, ell3):
    assert class_count(ellipsoid_census, ell3, TIMELIKE) == 2
    assert class_count(ellipsoid_census, ell3, CAUSAL) == 1


def test_class_count_errors(ellipsoid_census):
    with pytest.raises(InputError):
        class_count(ellipsoid_census, 6.5)
    with pytest.raises(InputError):
        class_count(ellipsoid_census, -0.1)
    with pytest.raises(InputError):
        class_count(ellipsoid_census, 1.0, "spacelike")


def test_sphere_census(sphere_census):
    kinds = [(e.kind, round(e.length, 6)) for e in sphere_census.events]
    assert kinds == [("birth", round(PI / 2, 6)), ("loop", round(1.5 * PI, 6))]
    assert non_hausdorff_certificate(sphere_census) == []
    assert all(class_count(sphere_census, T, f) == (T > PI / 2) or (f == CAUSAL and T == PI / 2)
               for T in (1.0, 3.0, 4.8) for f in (TIMELIKE, CAUSAL))


def test_torus_census(torus_census):
    assert {e.kind for e in torus_census.events} == {"birth"}
    assert non_hausdorff_certificate(torus_census) == []
    assert len(torus_census.events) == len(oracles.torus_lengths([0, 0], [PI, 0], 8.0))


def _probe_points(census):
    pts = {0.0, census.T_max}
    for x in census.event_lengths():
        pts |= {x, max(x - 1e-3, 0), min(x + 1e-3, census.T_max)}
    return sorted(pts)


@pytest.mark.parametrize("name", ["ellipsoid_census", "sphere_census", "torus_census"])
def test_dominance_and_continuity(name, request):
    c = request.getfixturevalue(name)
    events = c.event_lengths()
    merges = [m.length for m in c.merges()]
    for T in _probe_points(c):
        tl, ca = class_count(c, T, TIMELIKE), class_count(c, T, CAUSAL)
        assert min(ca, tl) >= 0
        # at a merge length the causal side has already merged (ell_3: 2 vs 1)
        if any(abs(T - x) < 1e-6 for x in merges):
            assert ca < tl
        else:
            assert ca >= tl
        if all(abs(T - x) > 1e-6 for x in events):
            assert ca == tl
    eps = 1e-4
    for x in events:
        if x - eps > 0:
            assert class_count(c, x, TIMELIKE) == class_count(c, x - eps, TIMELIKE)
        if x + eps <= c.T_max:
            assert class_count(c, x, CAUSAL) == class_count(c, x + eps, CAUSAL)


def test_non_epi_mono_witness(ellipsoid_census, ell3):
    assert class_count(ellipsoid_census, 0.5 * (1.5 * PI + ell3)) == 2
    assert class_count(ellipsoid_census, ell3 + 0.1) == 1


def test_intervals_table(ellipsoid_census):
    rows = ellipsoid_census.intervals()
    assert rows[0]["T_lo"] == 0.0 and rows[-1]["T_hi"] == ellipsoid_census.T_max
    for a, b in zip(rows, rows[1:]):
        assert a["T_hi"] == b["T_lo"]
    assert [(r["timelike"], r["causal"]) for r in rows if not r["closed"]][:4] == [(0, 0), (1, 1), (2, 2), (1, 1)]


def test_census_serializes(ellipsoid_census):
    d = ellipsoid_census.to_dict()
    assert {"events", "counts"} <= set(d)
    assert all({"l", "kind", "geodesic", "components"} <= set(e) for e in d["events"])


def test_census_rejects_bad_T(sphere):
    with pytest.raises(InputError):
        morse.build_census(sphere, P, Q, 0.0)


def test_census_worker_count_is_irrelevant(sphere):
    a = morse.build_census(sphere, P, Q, 5.0, n_angles=512, workers=1)
    b = morse.build_census(sphere, P, Q, 5.0, n_angles=512, workers=4)
    assert a.to_dict() == b.to_dict()


@settings(max_examples=6, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), T=st.floats(0.5, 12.0))
def test_torus_count_oracle(seed, T, torus):
    rng = np.random.default_rng(seed)
    p, q = rng.uniform(0, 2 * PI, 2), rng.uniform(0, 2 * PI, 2)
    if any(abs(x - T) < 1e-5 for x in oracles.torus_lengths(p, q, T + 1)):
        return
    c = morse.build_census(torus, p, q, T, n_angles=512)
    assert class_count(c, T, TIMELIKE) == oracles.torus_count(p, q, T)
    assert all(r.index == 0 for r in c.records.values())
