"""Closed Riemannian surfaces and their geodesic flow.

Ellipsoids and spheres are handled as level sets ``sum(x_i**2 / a_i**2) = 1``
in R^3; all points and velocities are stored as ambient triples and pulled
back onto the surface after every operation.  The flat torus is the quotient
``R^2 / (L Z)^2``; its points are pairs canonicalized to ``[0, L)``.

Most functions accept either a single point of shape ``(d,)`` or a batch of
shape ``(n, d)`` and return matching shapes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _flow
from .errors import ConstraintViolation, InputError

ELLIPSOID = "ellipsoid"
SPHERE = "sphere"
FLAT_TORUS = "flat_torus"
KINDS = (ELLIPSOID, SPHERE, FLAT_TORUS)

#: residual accepted for points handed in by callers
POINT_TOL = 1e-9
DEFAULT_STEP = 1e-3


@dataclass(frozen=True)
class Surface:
    """A closed surface: ``ellipsoid(a, b, c)``, ``sphere(r)`` or ``flat_torus(L)``.

    Build instances with the classmethods; the raw fields are shared between
    kinds (a sphere of radius r stores ``a = b = c = r``).
    """

    kind: str
    a: float = 1.0
    b: float = 1.0
    c: float = 1.0
    L: float = 2 * math.pi

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InputError(f"unknown surface kind {self.kind!r}; expected one of {KINDS}")
        values = (self.L,) if self.kind == FLAT_TORUS else (self.a, self.b, self.c)
        for v in values:
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise InputError(f"surface parameters must be positive finite numbers, got {v!r}")

    @classmethod
    def ellipsoid(cls, a=1.0, b=1.0, c=2.0):
        return cls(ELLIPSOID, float(a), float(b), float(c))

    @classmethod
    def sphere(cls, r=1.0):
        return cls(SPHERE, float(r), float(r), float(r))

    @classmethod
    def flat_torus(cls, L=2 * math.pi):
        return cls(FLAT_TORUS, L=float(L))

    @classmethod
    def from_dict(cls, spec):
        """Build a surface from its JSON form, e.g. ``{"kind": "sphere", "r": 1}``."""
        try:
            kind = spec["kind"]
            if kind == ELLIPSOID:
                return cls.ellipsoid(spec.get("a", 1.0), spec.get("b", 1.0), spec.get("c", 2.0))
            if kind == SPHERE:
                return cls.sphere(spec.get("r", 1.0))
            if kind == FLAT_TORUS:
                return cls.flat_torus(spec.get("L", 2 * math.pi))
        except (TypeError, KeyError) as exc:
            raise InputError(f"invalid surface spec {spec!r}") from exc
        raise InputError(f"unknown surface kind {kind!r}; expected one of {KINDS}")

    def to_dict(self):
        if self.kind == FLAT_TORUS:
            return {"kind": self.kind, "L": self.L}
        if self.kind == SPHERE:
            return {"kind": self.kind, "r": self.a}
        return {"kind": self.kind, "a": self.a, "b": self.b, "c": self.c}

    @property
    def embedded(self):
        return self.kind != FLAT_TORUS

    @property
    def dim(self):
        """Dimension of the coordinate vectors (3 ambient, or 2 on the torus)."""
        return 3 if self.embedded else 2

    @property
    def axes(self):
        return np.array([self.a, self.b, self.c])


@dataclass
class GeodesicPath:
    """Samples of a unit-speed geodesic at uniformly spaced arclengths ``s``.

    ``jacobi`` holds ``(J, J')`` of the normal Jacobi field with ``J(0) = 0``,
    ``J'(0) = 1``.  On the torus ``points`` are canonical and ``lifted`` is the
    continuous lift to R^2; elsewhere the two coincide.
    """

    s: np.ndarray
    points: np.ndarray
    velocities: np.ndarray
    jacobi: np.ndarray
    lifted: np.ndarray = field(repr=False, default=None)

    def __post_init__(self):
        if self.lifted is None:
            self.lifted = self.points

    @property
    def length(self):
        return float(self.s[-1])

    @property
    def start(self):
        return self.points[0]

    @property
    def end(self):
        return self.points[-1]

    def __len__(self):
        return len(self.s)


# --------------------------------------------------------------------------
# points and tangent spaces


def _inv_axes2(surface):
    return 1.0 / surface.axes**2


def constraint_residual(surface, x):
    """``|F(x) - 1|`` for embedded surfaces; zero for any finite torus point."""
    x = np.asarray(x, dtype=float)
    if not surface.embedded:
        return np.zeros(x.shape[:-1])
    return np.abs((x * x) @ _inv_axes2(surface) - 1.0)


def project(surface, y, iterations=8):
    """Closest point on the surface (canonical representative on the torus).

    For ellipsoids this solves for the Lagrange multiplier ``t`` in
    ``x_i = a_i^2 y_i / (a_i^2 + t)`` by Newton's method, which converges in a
    handful of iterations for points near the surface.
    """
    y = np.asarray(y, dtype=float)
    if not surface.embedded:
        return np.mod(y, surface.L)
    if surface.kind == SPHERE:
        return surface.a * y / np.linalg.norm(y, axis=-1, keepdims=True)
    a2 = surface.axes**2
    t = np.zeros(y.shape[:-1] + (1,))
    for _ in range(iterations):
        d = a2 + t
        w = (y * surface.axes / d) ** 2
        f = w.sum(axis=-1, keepdims=True) - 1.0
        fp = -2.0 * (w / d).sum(axis=-1, keepdims=True)
        t = t - f / fp
    return a2 * y / (a2 + t)


def as_point(surface, coords, tol=POINT_TOL):
    """Validate ``coords`` as a surface point and return it canonicalized."""
    x = np.array(coords, dtype=float)
    if x.shape[-1] != surface.dim or not np.all(np.isfinite(x)):
        raise ConstraintViolation(f"expected {surface.dim} finite coordinates for a {surface.kind} point, got {coords!r}")
    res = constraint_residual(surface, x)
    if np.any(res > tol):
        raise ConstraintViolation(
            f"point {coords!r} is off the {surface.kind} (residual {float(np.max(res)):.3g} > {tol:g})"
        )
    return project(surface, x)


def normal(surface, x):
    """Outward unit normal of an embedded surface in ambient coordinates."""
    g = np.asarray(x, dtype=float) * _inv_axes2(surface)
    return g / np.linalg.norm(g, axis=-1, keepdims=True)


def tangent_frame(surface, u):
    """Right-handed orthonormal tangent frame ``(e1, e2)`` at ``u``.

    On embedded surfaces ``e1`` points east (along ``z x n``) and ``e2``
    north; at the poles ``e1`` falls back to ``y x n``.  On the torus the
    frame is the coordinate frame.  Initial angles of geodesics are measured
    from ``e1`` towards ``e2``.
    """
    if not surface.embedded:
        return np.array([1.0, 0.0]), np.array([0.0, 1.0])
    n = normal(surface, u)
    e1 = np.cross([0.0, 0.0, 1.0], n)
    if np.linalg.norm(e1) < 1e-8:
        e1 = np.cross([0.0, 1.0, 0.0], n)
    e1 /= np.linalg.norm(e1)
    return e1, np.cross(n, e1)


def direction(surface, u, angle):
    """Unit tangent vector(s) at ``u`` making ``angle`` with ``e1``."""
    e1, e2 = tangent_frame(surface, u)
    angle = np.asarray(angle, dtype=float)
    return np.cos(angle)[..., None] * e1 + np.sin(angle)[..., None] * e2


def angle_of(surface, u, v):
    """Angle in ``[0, 2*pi)`` of the tangent vector ``v`` in the frame at ``u``."""
    e1, e2 = tangent_frame(surface, u)
    return float(np.mod(math.atan2(np.dot(v, e2), np.dot(v, e1)), 2 * math.pi))


def left_normal(surface, x, t):
    """In-surface unit normal ``n x t`` to the unit tangent(s) ``t`` at ``x``."""
    t = np.asarray(t, dtype=float)
    if not surface.embedded:
        return np.stack([-t[..., 1], t[..., 0]], axis=-1)
    return np.cross(normal(surface, x), t)


def displacement(surface, x, y):
    """Ambient vector ``y - x``; on the torus the shortest periodic representative."""
    d = np.asarray(y, dtype=float) - np.asarray(x, dtype=float)
    if not surface.embedded:
        d = d - surface.L * np.round(d / surface.L)
    return d


def tangent_check(surface, u, v, tol=1e-8):
    """Return ``v`` projected to the tangent plane, raising if it was far off it."""
    v = np.array(v, dtype=float)
    if v.shape != (surface.dim,):
        raise InputError(f"tangent vector must have {surface.dim} components, got {v.shape}")
    if surface.embedded:
        n = normal(surface, u)
        off = float(np.dot(v, n))
        if abs(off) > tol * max(1.0, float(np.linalg.norm(v))):
            raise ConstraintViolation(f"vector {v.tolist()} is not tangent at {np.asarray(u).tolist()} (normal part {off:.3g})")
        v = v - off * n
    return v


# --------------------------------------------------------------------------
# metric and curvature


def chart_point(surface, theta, phi, polar="z"):
    """Point with parametric longitude ``theta`` and latitude ``phi``.

    ``polar="z"`` gives ``(a cos phi cos theta, b cos phi sin theta, c sin phi)``;
    ``polar="x"`` is the same chart with the polar axis moved to x, used near
    the z-poles where the first chart degenerates.
    """
    a, b, c = surface.axes
    cp, sp, ct, st = np.cos(phi), np.sin(phi), np.cos(theta), np.sin(theta)
    if polar == "z":
        return np.stack([a * cp * ct, b * cp * st, c * sp], axis=-1)
    return np.stack([a * sp, b * cp * ct, c * cp * st], axis=-1)


def chart_coords(surface, u, polar="z"):
    """Inverse of :func:`chart_point` for a point on the surface."""
    x, y, z = np.asarray(u, dtype=float) / surface.axes
    if polar == "z":
        return math.atan2(y, x), math.asin(max(-1.0, min(1.0, z)))
    return math.atan2(z, y), math.asin(max(-1.0, min(1.0, x)))


def _chart_derivatives(surface, theta, phi, polar):
    a, b, c = surface.axes
    cp, sp, ct, st = math.cos(phi), math.sin(phi), math.cos(theta), math.sin(theta)
    if polar == "z":
        r_t = np.array([-a * cp * st, b * cp * ct, 0.0])
        r_p = np.array([-a * sp * ct, -b * sp * st, c * cp])
    else:
        r_t = np.array([0.0, -b * cp * st, c * cp * ct])
        r_p = np.array([a * cp, -b * sp * ct, -c * sp * st])
    return r_t, r_p


def metric_chart(surface, u):
    """Name of the frame :func:`metric_at` uses at ``u``: ``"z"``, ``"x"`` or ``"flat"``."""
    if not surface.embedded:
        return "flat"
    _, phi = chart_coords(surface, u, "z")
    return "z" if math.cos(phi) > 1e-6 else "x"


def metric_at(surface, u):
    """First fundamental form at ``u`` in the frame of parameter derivatives.

    Embedded surfaces use the frame ``(d/dtheta, d/dphi)`` of
    :func:`chart_point` with polar axis z, switching to polar axis x within
    1e-6 (in ``cos phi``) of the z-poles.  The torus uses its coordinate frame,
    so the result is the identity.
    """
    u = as_point(surface, u)
    if not surface.embedded:
        return np.eye(2)
    polar = metric_chart(surface, u)
    theta, phi = chart_coords(surface, u, polar)
    r_t, r_p = _chart_derivatives(surface, theta, phi, polar)
    frame = np.stack([r_t, r_p])
    return frame @ frame.T


def gaussian_curvature(surface, u):
    """Gaussian curvature; closed form ``(abc)^-2 (x^2/a^4 + y^2/b^4 + z^2/c^4)^-2``."""
    u = as_point(surface, u)
    if surface.kind == FLAT_TORUS:
        k = np.zeros(u.shape[:-1])
    elif surface.kind == SPHERE:
        k = np.full(u.shape[:-1], 1.0 / surface.a**2)
    else:
        k = _curvature_embedded(surface, u)
    return float(k) if k.ndim == 0 else k


def _curvature_embedded(surface, x):
    w2 = ((x * _inv_axes2(surface)) ** 2).sum(axis=-1)
    return 1.0 / (np.prod(surface.axes) ** 2 * w2**2)


# --------------------------------------------------------------------------
# geodesic flow


def _flow_args(surface):
    if not surface.embedded:
        return True, np.zeros(3), 0.0, surface.L
    k0 = -1.0 if surface.kind == SPHERE else 1.0 / float(np.prod(surface.axes)) ** 2
    return False, 1.0 / surface.axes**2, k0, 0.0


def march(surface, p, directions, lengths, step=DEFAULT_STEP, target=None, radius=0.0, store=False):
    """Integrate a batch of geodesics from ``p`` with arclength ``lengths``.

    Every ray ``r`` takes ``ceil(lengths[r] / step)`` uniform steps.  With a
    ``target`` point, closest approaches to it within ``radius`` are returned
    as rows ``(ray, s, signed miss, distance, J)``; the signed miss is the
    component of ``target - gamma(s)`` along ``n x gamma'(s)``.  With
    ``store`` the samples ``(x, v, J, J')`` are returned too.
    """
    directions = np.ascontiguousarray(np.atleast_2d(directions), dtype=float)
    lengths = np.broadcast_to(np.asarray(lengths, dtype=float), (len(directions),))
    nsteps = np.maximum(np.ceil(lengths / step - 1e-12), 1).astype(np.int64)
    hs = lengths / nsteps
    torus, inv2, k0, L = _flow_args(surface)
    find = target is not None
    q = np.ascontiguousarray(target if find else p, dtype=float)
    events, trace = _flow.march(
        torus, inv2, k0, L, np.ascontiguousarray(p, dtype=float), q, directions, hs, nsteps, float(radius), find, store
    )
    return events, trace, nsteps, hs


def integrate_geodesic(surface, u0, v0, length, step=DEFAULT_STEP):
    """Integrate the unit-speed geodesic from ``u0`` with initial velocity ``v0``.

    Returns ``ceil(length / step) + 1`` samples spaced uniformly in arclength
    (the actual spacing is ``length / ceil(length / step)``).
    """
    if not (length >= 0 and math.isfinite(length)):
        raise InputError(f"length must be a finite non-negative number, got {length!r}")
    if not step > 0:
        raise InputError(f"step must be positive, got {step!r}")
    u0 = as_point(surface, u0)
    v0 = tangent_check(surface, u0, v0)
    speed = float(np.linalg.norm(v0))
    if abs(speed - 1.0) > 1e-8:
        raise InputError(f"initial velocity must be unit length, got norm {speed:.12g}")
    v0 = v0 / speed

    n = int(math.ceil(length / step - 1e-12)) if length > 0 else 0
    h = length / n if n else 0.0
    s = np.arange(n + 1) * h
    s[-1] = length
    if not surface.embedded:
        lifted = u0 + s[:, None] * v0
        jac = np.stack([s, np.ones_like(s)], axis=1)
        return GeodesicPath(s, np.mod(lifted, surface.L), np.tile(v0, (n + 1, 1)), jac, lifted=lifted)

    _, trace, _, _ = march(surface, u0, v0, length, step, store=True)
    trace = trace[0, : n + 1]
    return GeodesicPath(s, trace[:, :3].copy(), trace[:, 3:6].copy(), trace[:, 6:8].copy())
