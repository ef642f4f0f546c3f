import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from causalpaths import surfaces as sf
from causalpaths.errors import ConstraintViolation, InputError
from causalpaths.surfaces import Surface


def test_metric_examples(torus, sphere, ellipsoid):
    assert np.array_equal(sf.metric_at(torus, [1.0, 2.0]), np.eye(2))
    assert np.allclose(sf.metric_at(sphere, [1.0, 0.0, 0.0]), np.eye(2), atol=1e-15)
    assert np.allclose(sf.metric_at(ellipsoid, [1.0, 0.0, 0.0]), np.diag([1.0, 4.0]), atol=1e-15)


def test_curvature_examples(torus, sphere, ellipsoid):
    assert sf.gaussian_curvature(sphere, [0.0, 0.0, 1.0]) == 1.0
    assert sf.gaussian_curvature(Surface.sphere(2.0), [0.0, 2.0, 0.0]) == 0.25
    assert sf.gaussian_curvature(torus, [0.5, 6.0]) == 0.0
    assert sf.gaussian_curvature(ellipsoid, [1.0, 0.0, 0.0]) == pytest.approx(0.25, abs=1e-15)
    # poles of (1,1,2): x^2/a^4 + ... = 1/4, so K = 4
    assert sf.gaussian_curvature(ellipsoid, [0.0, 0.0, 2.0]) == pytest.approx(4.0)


def test_off_surface_rejected(sphere, ellipsoid):
    with pytest.raises(ConstraintViolation):
        sf.metric_at(sphere, [1.0, 0.1, 0.0])
    with pytest.raises(ConstraintViolation):
        sf.gaussian_curvature(ellipsoid, [0.0, 0.0, 1.0])
    with pytest.raises(ConstraintViolation):
        sf.as_point(ellipsoid, [1.0, 0.0])


@pytest.mark.parametrize("kw", [dict(a=0), dict(b=-1), dict(c=float("nan"))])
def test_bad_parameters(kw):
    with pytest.raises(InputError):
        Surface.ellipsoid(**{**dict(a=1, b=1, c=2), **kw})
    with pytest.raises(InputError):
        Surface.flat_torus(0)


def test_from_dict_roundtrip():
    for s in (Surface.ellipsoid(1, 2, 3), Surface.sphere(2), Surface.flat_torus(3)):
        assert Surface.from_dict(s.to_dict()) == s
    with pytest.raises(InputError):
        Surface.from_dict({"kind": "klein_bottle"})


def test_torus_points_canonical(torus):
    u = sf.as_point(torus, [7.0, -1.0])
    assert np.all((0 <= u) & (u < 2 * math.pi))


def test_integrate_examples(sphere, torus, ellipsoid):
    tr = sf.integrate_geodesic(sphere, [1, 0, 0], [0, 1, 0], 2 * math.pi)
    assert np.linalg.norm(tr.end - [1, 0, 0]) < 1e-6
    assert len(tr) == math.ceil(2 * math.pi / 1e-3) + 1

    tr = sf.integrate_geodesic(torus, [0, 0], [1, 0], math.pi)
    assert tr.end[0] == math.pi and tr.end[1] == 0.0

    tr = sf.integrate_geodesic(ellipsoid, [1, 0, 0], [0, 1, 0], math.pi / 2)
    assert np.linalg.norm(tr.end - [0, 1, 0]) < 1e-6
    fine = sf.integrate_geodesic(ellipsoid, [1, 0, 0], [0, 1, 0], math.pi / 2, step=2.5e-4)
    assert np.linalg.norm(tr.end - fine.end) < 1e-9


def test_integrate_validation(sphere):
    with pytest.raises(InputError):
        sf.integrate_geodesic(sphere, [1, 0, 0], [0, 2, 0], 1.0)
    with pytest.raises(ConstraintViolation):
        sf.integrate_geodesic(sphere, [1, 0, 0], [1, 0, 0], 1.0)
    with pytest.raises(InputError):
        sf.integrate_geodesic(sphere, [1, 0, 0], [0, 1, 0], -1.0)
    with pytest.raises(InputError):
        sf.integrate_geodesic(sphere, [1, 0, 0], [0, 1, 0], 1.0, step=0)


def test_zero_length(sphere):
    tr = sf.integrate_geodesic(sphere, [1, 0, 0], [0, 1, 0], 0.0)
    assert len(tr) == 1 and np.array_equal(tr.start, [1, 0, 0])


def test_deterministic(ellipsoid):
    a = sf.integrate_geodesic(ellipsoid, [1, 0, 0], sf.direction(ellipsoid, [1, 0, 0], 1.0), 5.0)
    b = sf.integrate_geodesic(ellipsoid, [1, 0, 0], sf.direction(ellipsoid, [1, 0, 0], 1.0), 5.0)
    assert a.points.tobytes() == b.points.tobytes()


SURFACES = [Surface.ellipsoid(1, 1, 2), Surface.ellipsoid(1, 1.5, 2.5), Surface.sphere(1.3)]


def _random_start(surface, rng):
    theta, phi = rng.uniform(-math.pi, math.pi), rng.uniform(-1.4, 1.4)
    u = sf.project(surface, sf.chart_point(surface, theta, phi))
    return u, sf.direction(surface, u, rng.uniform(0, 2 * math.pi))


def _g_norm(surface, u, v):
    # ambient Euclidean norm is the induced metric
    return np.linalg.norm(v, axis=-1)


@settings(max_examples=12, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), which=st.integers(0, len(SURFACES) - 1), length=st.floats(0.5, 20.0))
def test_flow_invariants(seed, which, length):
    surface = SURFACES[which]
    rng = np.random.default_rng(seed)
    u, v = _random_start(surface, rng)
    tr = sf.integrate_geodesic(surface, u, v, length)
    assert len(tr) == math.ceil(length / 1e-3 - 1e-12) + 1
    assert np.max(np.abs(_g_norm(surface, tr.points, tr.velocities) - 1)) < 1e-6
    assert np.max(sf.constraint_residual(surface, tr.points)) < 1e-8
    # tangency of the velocity
    n = sf.normal(surface, tr.points)
    assert np.max(np.abs(np.sum(n * tr.velocities, axis=1))) < 1e-8
    back = sf.integrate_geodesic(surface, tr.end, -tr.velocities[-1], length)
    assert np.linalg.norm(back.end - u) < 1e-5


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), length=st.floats(0.1, 20.0))
def test_torus_flow_is_straight(seed, length, torus):
    rng = np.random.default_rng(seed)
    u = rng.uniform(0, 2 * math.pi, 2)
    ang = rng.uniform(0, 2 * math.pi)
    v = np.array([math.cos(ang), math.sin(ang)])
    tr = sf.integrate_geodesic(torus, u, v, length)
    assert np.allclose(tr.lifted[-1], u + length * v, atol=1e-12)
    assert np.all((tr.points >= 0) & (tr.points < 2 * math.pi))
    back = sf.integrate_geodesic(torus, tr.end, -v, length)
    assert np.linalg.norm(sf.displacement(torus, back.end, u)) < 1e-9


def test_jacobi_field_on_sphere(sphere):
    # J = sin s on the unit sphere
    tr = sf.integrate_geodesic(sphere, [1, 0, 0], [0, 0.6, 0.8], 7.0)
    assert np.max(np.abs(tr.jacobi[:, 0] - np.sin(tr.s))) < 1e-8
    assert np.max(np.abs(tr.jacobi[:, 1] - np.cos(tr.s))) < 1e-8


@pytest.mark.parametrize("surface", [Surface.ellipsoid(1, 1, 2), Surface.ellipsoid(1, 1.5, 2.5), Surface.sphere(2)])
def test_curvature_consistency(surface):
    """Brioschi curvature of finite-differenced metric_at agrees with the closed form."""
    rng = np.random.default_rng(11)

    def metric(theta, phi):
        return sf.metric_at(surface, sf.project(surface, sf.chart_point(surface, theta, phi)))

    worst = 0.0
    for _ in range(100):
        theta, phi = rng.uniform(-math.pi, math.pi), rng.uniform(-1.25, 1.25)
        u = sf.project(surface, sf.chart_point(surface, theta, phi))
        k_fd = oracles.fd_curvature(metric, theta, phi)
        worst = max(worst, abs(k_fd - sf.gaussian_curvature(surface, u)))
    assert worst < 1e-4


def test_metric_near_pole_switches_chart(ellipsoid):
    u = np.array([0.0, 0.0, 2.0])
    assert sf.metric_chart(ellipsoid, u) == "x"
    g = sf.metric_at(ellipsoid, u)
    assert np.allclose(g, g.T) and np.all(np.linalg.eigvalsh(g) > 0)
    # frame-invariant: det(g) relates to the area element, positive at the pole
    assert np.linalg.det(g) > 0


@settings(max_examples=50, deadline=None)
@given(theta=st.floats(-math.pi, math.pi), phi=st.floats(-math.pi / 2, math.pi / 2))
def test_metric_spd(theta, phi):
    surface = Surface.ellipsoid(1, 1.5, 2.5)
    u = sf.project(surface, sf.chart_point(surface, theta, phi))
    g = sf.metric_at(surface, u)
    assert np.allclose(g, g.T)
    assert np.all(np.linalg.eigvalsh(g) > 0)


def test_chart_roundtrip(ellipsoid):
    for polar in ("z", "x"):
        u = sf.chart_point(ellipsoid, 0.3, -0.7, polar)
        assert np.allclose(sf.chart_coords(ellipsoid, u, polar), (0.3, -0.7))
        assert sf.constraint_residual(ellipsoid, u) < 1e-12
