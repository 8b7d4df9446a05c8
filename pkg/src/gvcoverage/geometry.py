"""Planar geometric kernel for cells bounded by line, circular and hyperbolic arcs.

Cells start as convex polygons and are refined by clipping against half-planes,
disk interiors and hyperbolic half-regions (the convex side of one hyperbola
branch).  Every clip keeps the exact curved boundary pieces, tagged with the
entity that produced them, so downstream code can integrate over specific
parts of a cell boundary.

Conventions:
  - loops are closed and traversed counter-clockwise (interior on the left),
  - the outward unit normal at a boundary point is the traversal tangent
    rotated by -90 degrees,
  - signed areas use Green's theorem, A = 1/2 * closed-integral(x dy - y dx).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Sequence, Union

import numpy as np
from scipy.optimize import brentq, minimize_scalar
from scipy.special import roots_legendre

__all__ = [
    "GeometryError",
    "Vec2",
    "Circle",
    "ConvexRegion",
    "HyperbolaBranch",
    "LineSeg",
    "CircArc",
    "HypArc",
    "RegionBoundary",
    "SensingBoundary",
    "HyperbolaEdge",
    "BoundarySegment",
    "HalfPlane",
    "DiskInterior",
    "HyperbolicSide",
    "CellRegion",
    "hyperbola_point",
    "clip_halfplane",
    "clip_disk",
    "clip_halfregion_hyperbolic",
    "region_area",
    "line_integral",
    "arc_flux",
    "arc_length",
    "adaptive_vec_quad",
    "point_in_loops",
]


class GeometryError(ValueError):
    """Invalid geometric input or a construction that failed to close."""


# Endpoint snapping when stitching clipped boundary pieces back into loops.
SNAP_TOL = 1e-7
# |signed distance| below this counts as lying on a clipping curve; keeps
# re-clipping by the same constraint from shredding arcs that sit on it.
ON_CURVE_TOL = 1e-9
# Boundary pieces shorter than this are dropped before stitching.
MIN_PIECE_LEN = 1e-9

_SCAN_US = np.linspace(0.0, 1.0, 97)
_GL_NODES, _GL_WEIGHTS = roots_legendre(16)
_MAX_QUAD_DEPTH = 14


# ---------------------------------------------------------------------------
# basic values


@dataclass(frozen=True)
class Vec2:
    """Immutable 2D point / vector with finite coordinates."""

    x: float
    y: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "x", float(self.x))
        object.__setattr__(self, "y", float(self.y))
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise GeometryError(f"non-finite coordinates ({self.x}, {self.y})")

    def __add__(self, other: "Vec2") -> "Vec2":
        return Vec2(self.x + other.x, self.y + other.y)

    def __sub__(self, other: "Vec2") -> "Vec2":
        return Vec2(self.x - other.x, self.y - other.y)

    def __mul__(self, k: float) -> "Vec2":
        return Vec2(self.x * k, self.y * k)

    __rmul__ = __mul__

    def __neg__(self) -> "Vec2":
        return Vec2(-self.x, -self.y)

    def dot(self, other: "Vec2") -> float:
        return self.x * other.x + self.y * other.y

    def cross(self, other: "Vec2") -> float:
        return self.x * other.y - self.y * other.x

    def norm(self) -> float:
        return math.hypot(self.x, self.y)

    def dist(self, other: "Vec2") -> float:
        return math.hypot(self.x - other.x, self.y - other.y)

    def unit(self) -> "Vec2":
        n = self.norm()
        if n == 0.0:
            raise GeometryError("cannot normalise the zero vector")
        return Vec2(self.x / n, self.y / n)

    def rot90(self) -> "Vec2":
        """Rotate by +90 degrees (counter-clockwise)."""
        return Vec2(-self.y, self.x)

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y])

    @staticmethod
    def from_array(a: Sequence[float]) -> "Vec2":
        return Vec2(float(a[0]), float(a[1]))


@dataclass(frozen=True)
class Circle:
    center: Vec2
    radius: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "radius", float(self.radius))
        if not math.isfinite(self.radius) or self.radius < 0.0:
            raise GeometryError(f"invalid circle radius {self.radius}")


@dataclass(frozen=True)
class ConvexRegion:
    """Strictly convex polygon with counter-clockwise vertices."""

    vertices: tuple[Vec2, ...]

    def __post_init__(self) -> None:
        vs = tuple(self.vertices)
        object.__setattr__(self, "vertices", vs)
        if len(vs) < 3:
            raise GeometryError("a convex region needs at least 3 vertices")
        n = len(vs)
        for k in range(n):
            a, b, c = vs[k], vs[(k + 1) % n], vs[(k + 2) % n]
            if (b - a).cross(c - b) <= 1e-12:
                raise GeometryError(
                    "vertices must be strictly convex in counter-clockwise order"
                )

    @property
    def area(self) -> float:
        vs = self.vertices
        return 0.5 * sum(vs[k].cross(vs[(k + 1) % len(vs)]) for k in range(len(vs)))

    def edges(self) -> list[tuple[Vec2, Vec2]]:
        vs = self.vertices
        return [(vs[k], vs[(k + 1) % len(vs)]) for k in range(len(vs))]

    def bbox(self) -> tuple[float, float, float, float]:
        xs = [v.x for v in self.vertices]
        ys = [v.y for v in self.vertices]
        return min(xs), min(ys), max(xs), max(ys)

    @property
    def diameter(self) -> float:
        x0, y0, x1, y1 = self.bbox()
        return math.hypot(x1 - x0, y1 - y0)

    def contains(self, p: Vec2, tol: float = 1e-9) -> bool:
        return all((b - a).cross(p - a) >= -tol for a, b in self.edges())

    def contains_many(self, pts: np.ndarray, tol: float = 1e-9) -> np.ndarray:
        ok = np.ones(len(pts), dtype=bool)
        for a, b in self.edges():
            ex, ey = b.x - a.x, b.y - a.y
            ok &= ex * (pts[:, 1] - a.y) - ey * (pts[:, 0] - a.x) >= -tol
        return ok

    def distance_to_boundary(self, p: Vec2) -> float:
        """Distance from an interior point to the nearest edge line."""
        best = math.inf
        for a, b in self.edges():
            e = (b - a).unit()
            best = min(best, e.cross(p - a))
        return best


@dataclass(frozen=True)
class HyperbolaBranch:
    """One branch of a hyperbola, the locus where the distance to ``focus_far``
    exceeds the distance to ``focus_near`` by exactly twice ``semi_transverse``.

    Parametrised as center + a*cosh(t)*u + b*sinh(t)*v where u points from the
    center toward the near focus and v = rot90(u).  The vertex sits at t = 0.
    ``semi_transverse`` may be zero, in which case the branch degenerates to
    the perpendicular bisector of the foci.
    """

    focus_near: Vec2
    focus_far: Vec2
    semi_transverse: float
    center: Vec2 = field(init=False, compare=False, repr=False)
    axis_u: Vec2 = field(init=False, compare=False, repr=False)
    axis_v: Vec2 = field(init=False, compare=False, repr=False)
    half_focal: float = field(init=False, compare=False, repr=False)
    semi_conjugate: float = field(init=False, compare=False, repr=False)

    def __post_init__(self) -> None:
        a = float(self.semi_transverse)
        object.__setattr__(self, "semi_transverse", a)
        if not math.isfinite(a) or a < 0.0:
            raise GeometryError(f"invalid semi-transverse axis {a}")
        gap = self.focus_near.dist(self.focus_far)
        if gap <= 2.0 * a:
            raise GeometryError(
                f"focal gap {gap:.6g} must exceed twice the semi-transverse axis {a:.6g}"
            )
        c = 0.5 * gap
        object.__setattr__(self, "center", Vec2(
            0.5 * (self.focus_near.x + self.focus_far.x),
            0.5 * (self.focus_near.y + self.focus_far.y)))
        u = (self.focus_near - self.center).unit()
        object.__setattr__(self, "axis_u", u)
        object.__setattr__(self, "axis_v", u.rot90())
        object.__setattr__(self, "half_focal", c)
        object.__setattr__(self, "semi_conjugate", math.sqrt(c * c - a * a))

    @property
    def eccentricity(self) -> float:
        if self.semi_transverse == 0.0:
            return math.inf
        return self.half_focal / self.semi_transverse

    def point(self, t: float) -> Vec2:
        a, b = self.semi_transverse, self.semi_conjugate
        ca, sb = a * math.cosh(t), b * math.sinh(t)
        return Vec2(
            self.center.x + ca * self.axis_u.x + sb * self.axis_v.x,
            self.center.y + ca * self.axis_u.y + sb * self.axis_v.y,
        )

    def point_many(self, ts: np.ndarray) -> np.ndarray:
        a, b = self.semi_transverse, self.semi_conjugate
        ca = a * np.cosh(ts)
        sb = b * np.sinh(ts)
        out = np.empty((len(ts), 2))
        out[:, 0] = self.center.x + ca * self.axis_u.x + sb * self.axis_v.x
        out[:, 1] = self.center.y + ca * self.axis_u.y + sb * self.axis_v.y
        return out

    def tangent(self, t: float) -> Vec2:
        a, b = self.semi_transverse, self.semi_conjugate
        sa, cb = a * math.sinh(t), b * math.cosh(t)
        return Vec2(
            sa * self.axis_u.x + cb * self.axis_v.x,
            sa * self.axis_u.y + cb * self.axis_v.y,
        )

    def tangent_many(self, ts: np.ndarray) -> np.ndarray:
        a, b = self.semi_transverse, self.semi_conjugate
        sa = a * np.sinh(ts)
        cb = b * np.cosh(ts)
        out = np.empty((len(ts), 2))
        out[:, 0] = sa * self.axis_u.x + cb * self.axis_v.x
        out[:, 1] = sa * self.axis_u.y + cb * self.axis_v.y
        return out

    def param_of(self, p: Vec2) -> float:
        eta = self.axis_v.dot(p - self.center)
        return math.asinh(eta / self.semi_conjugate)

    def focal_residual(self, p: Vec2) -> float:
        """Signed defect of the two-focus distance equation at ``p``."""
        return p.dist(self.focus_far) - p.dist(self.focus_near) - 2.0 * self.semi_transverse

    def param_limit(self, radius: float) -> float:
        """Parameter T such that |t| > T implies the point lies farther than
        ``radius`` from the branch center."""
        a, b = self.semi_transverse, self.semi_conjugate
        t_b = math.asinh(radius / b)
        if a > 0.0 and radius > a:
            t_a = math.acosh(radius / a)
            return min(t_a, t_b) + 0.75
        if a > 0.0 and radius <= a:
            return 0.75
        return t_b + 0.75


def hyperbola_point(branch: HyperbolaBranch, t: float) -> Vec2:
    """Evaluate the branch parametrisation at parameter ``t``."""
    return branch.point(t)


# ---------------------------------------------------------------------------
# boundary segments


@dataclass(frozen=True)
class LineSeg:
    start: Vec2
    end: Vec2

    def point(self, u: float) -> Vec2:
        return Vec2(
            self.start.x + u * (self.end.x - self.start.x),
            self.start.y + u * (self.end.y - self.start.y),
        )

    def point_many(self, us: np.ndarray) -> np.ndarray:
        out = np.empty((len(us), 2))
        out[:, 0] = self.start.x + us * (self.end.x - self.start.x)
        out[:, 1] = self.start.y + us * (self.end.y - self.start.y)
        return out

    def velocity(self, u: float) -> Vec2:
        return self.end - self.start

    def velocity_many(self, us: np.ndarray) -> np.ndarray:
        out = np.empty((len(us), 2))
        out[:, 0] = self.end.x - self.start.x
        out[:, 1] = self.end.y - self.start.y
        return out

    def subsegment(self, ua: float, ub: float) -> "LineSeg":
        return LineSeg(self.point(ua), self.point(ub))

    @property
    def start_point(self) -> Vec2:
        return self.start

    @property
    def end_point(self) -> Vec2:
        return self.end

    def length(self) -> float:
        return self.start.dist(self.end)

    def area_contribution(self) -> float:
        return 0.5 * self.start.cross(self.end)


@dataclass(frozen=True)
class CircArc:
    """Circular arc traversed from ``theta0`` to ``theta1`` (either direction)."""

    circle: Circle
    theta0: float
    theta1: float

    def _theta(self, u: float) -> float:
        return self.theta0 + u * (self.theta1 - self.theta0)

    def point(self, u: float) -> Vec2:
        th = self._theta(u)
        c, r = self.circle.center, self.circle.radius
        return Vec2(c.x + r * math.cos(th), c.y + r * math.sin(th))

    def point_many(self, us: np.ndarray) -> np.ndarray:
        th = self.theta0 + us * (self.theta1 - self.theta0)
        c, r = self.circle.center, self.circle.radius
        out = np.empty((len(us), 2))
        out[:, 0] = c.x + r * np.cos(th)
        out[:, 1] = c.y + r * np.sin(th)
        return out

    def velocity(self, u: float) -> Vec2:
        th = self._theta(u)
        k = self.circle.radius * (self.theta1 - self.theta0)
        return Vec2(-k * math.sin(th), k * math.cos(th))

    def velocity_many(self, us: np.ndarray) -> np.ndarray:
        th = self.theta0 + us * (self.theta1 - self.theta0)
        k = self.circle.radius * (self.theta1 - self.theta0)
        out = np.empty((len(us), 2))
        out[:, 0] = -k * np.sin(th)
        out[:, 1] = k * np.cos(th)
        return out

    def subsegment(self, ua: float, ub: float) -> "CircArc":
        return CircArc(self.circle, self._theta(ua), self._theta(ub))

    @property
    def start_point(self) -> Vec2:
        return self.point(0.0)

    @property
    def end_point(self) -> Vec2:
        return self.point(1.0)

    def length(self) -> float:
        return self.circle.radius * abs(self.theta1 - self.theta0)

    def area_contribution(self) -> float:
        c, r = self.circle.center, self.circle.radius
        th0, th1 = self.theta0, self.theta1
        return 0.5 * (
            r * r * (th1 - th0)
            + r * c.x * (math.sin(th1) - math.sin(th0))
            - r * c.y * (math.cos(th1) - math.cos(th0))
        )


@dataclass(frozen=True)
class HypArc:
    """Hyperbolic arc traversed from parameter ``t0`` to ``t1`` (either direction)."""

    branch: HyperbolaBranch
    t0: float
    t1: float

    def _t(self, u: float) -> float:
        return self.t0 + u * (self.t1 - self.t0)

    def param_many(self, us: np.ndarray) -> np.ndarray:
        return self.t0 + us * (self.t1 - self.t0)

    def point(self, u: float) -> Vec2:
        return self.branch.point(self._t(u))

    def point_many(self, us: np.ndarray) -> np.ndarray:
        return self.branch.point_many(self.param_many(us))

    def velocity(self, u: float) -> Vec2:
        return self.branch.tangent(self._t(u)) * (self.t1 - self.t0)

    def velocity_many(self, us: np.ndarray) -> np.ndarray:
        return self.branch.tangent_many(self.param_many(us)) * (self.t1 - self.t0)

    def subsegment(self, ua: float, ub: float) -> "HypArc":
        return HypArc(self.branch, self._t(ua), self._t(ub))

    @property
    def start_point(self) -> Vec2:
        return self.point(0.0)

    @property
    def end_point(self) -> Vec2:
        return self.point(1.0)

    def length(self) -> float:
        return _quad_speed(self)

    def area_contribution(self) -> float:
        def g(us: np.ndarray) -> np.ndarray:
            p = self.point_many(us)
            v = self.velocity_many(us)
            out = np.empty_like(p)
            out[:, 0] = p[:, 0] * v[:, 1] - p[:, 1] * v[:, 0]
            out[:, 1] = 0.0
            return out

        return 0.5 * adaptive_vec_quad(g, tol=1e-11)[0]


Curve = Union[LineSeg, CircArc, HypArc]


# source tags: which entity produced a boundary piece


@dataclass(frozen=True)
class RegionBoundary:
    """Piece of the workspace polygon boundary."""


@dataclass(frozen=True)
class SensingBoundary:
    """Piece of an agent's guaranteed sensing circle."""

    agent: int = -1


@dataclass(frozen=True)
class HyperbolaEdge:
    """Piece of the dominance boundary separating ``agent`` from ``neighbor``."""

    agent: int = -1
    neighbor: int = -1


BoundarySource = Union[RegionBoundary, SensingBoundary, HyperbolaEdge]

REGION_BOUNDARY = RegionBoundary()


@dataclass(frozen=True)
class BoundarySegment:
    """A directed boundary piece plus the tag of the entity that created it."""

    curve: Curve
    source: BoundarySource

    def point(self, u: float) -> Vec2:
        return self.curve.point(u)

    def point_many(self, us: np.ndarray) -> np.ndarray:
        return self.curve.point_many(us)

    def velocity(self, u: float) -> Vec2:
        return self.curve.velocity(u)

    def velocity_many(self, us: np.ndarray) -> np.ndarray:
        return self.curve.velocity_many(us)

    def subsegment(self, ua: float, ub: float) -> "BoundarySegment":
        return BoundarySegment(self.curve.subsegment(ua, ub), self.source)

    @property
    def start_point(self) -> Vec2:
        return self.curve.start_point

    @property
    def end_point(self) -> Vec2:
        return self.curve.end_point

    def length(self) -> float:
        return self.curve.length()

    def rough_length(self) -> float:
        """Cheap length estimate used only to discard negligible pieces."""
        a = self.curve.point(0.0)
        m = self.curve.point(0.5)
        b = self.curve.point(1.0)
        return a.dist(m) + m.dist(b)

    def outward_normal(self, u: float) -> Vec2:
        """Unit normal pointing out of the region for counter-clockwise loops."""
        v = self.curve.velocity(u)
        return Vec2(v.y, -v.x).unit()


# ---------------------------------------------------------------------------
# clipping constraints


@dataclass(frozen=True)
class HalfPlane:
    """Keeps the side where ``normal . (x - anchor) <= 0``."""

    anchor: Vec2
    normal: Vec2

    periodic = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "normal", self.normal.unit())

    def inside_value(self, p: Vec2) -> float:
        return self.normal.dot(self.anchor - p)

    def inside_values(self, pts: np.ndarray) -> np.ndarray:
        n = self.normal
        return n.x * (self.anchor.x - pts[:, 0]) + n.y * (self.anchor.y - pts[:, 1])

    def _dir(self) -> Vec2:
        return self.normal.rot90()

    def boundary_param(self, p: Vec2) -> float:
        return self._dir().dot(p - self.anchor)

    def boundary_point(self, tau: float) -> Vec2:
        d = self._dir()
        return Vec2(self.anchor.x + tau * d.x, self.anchor.y + tau * d.y)

    def param_interval(self, bbox: tuple[float, float, float, float]) -> tuple[float, float]:
        d = self._dir()
        x0, y0, x1, y1 = bbox
        taus = [
            d.dot(Vec2(x, y) - self.anchor)
            for x in (x0, x1)
            for y in (y0, y1)
        ]
        margin = 0.1 * (max(taus) - min(taus)) + 0.1
        return min(taus) - margin, max(taus) + margin

    def boundary_curve(self, ta: float, tb: float) -> Curve:
        # kept side lies on the left when moving along +dir
        return LineSeg(self.boundary_point(ta), self.boundary_point(tb))

    def enclosed_loop(self, cell: "CellRegion") -> Curve | None:
        return None


@dataclass(frozen=True)
class DiskInterior:
    """Keeps the closed disk bounded by ``circle``."""

    circle: Circle

    periodic = True

    def inside_value(self, p: Vec2) -> float:
        return self.circle.radius - p.dist(self.circle.center)

    def inside_values(self, pts: np.ndarray) -> np.ndarray:
        c = self.circle.center
        return self.circle.radius - np.hypot(pts[:, 0] - c.x, pts[:, 1] - c.y)

    def boundary_param(self, p: Vec2) -> float:
        c = self.circle.center
        return math.atan2(p.y - c.y, p.x - c.x)

    def boundary_point(self, tau: float) -> Vec2:
        c, r = self.circle.center, self.circle.radius
        return Vec2(c.x + r * math.cos(tau), c.y + r * math.sin(tau))

    def param_interval(self, bbox: tuple[float, float, float, float]) -> tuple[float, float]:
        return -math.pi, math.pi

    def boundary_curve(self, ta: float, tb: float) -> Curve:
        # counter-clockwise traversal keeps the disk on the left
        return CircArc(self.circle, ta, tb)

    def enclosed_loop(self, cell: "CellRegion") -> Curve | None:
        if not cell.contains(self.circle.center):
            return None
        # crossing-free does not yet mean enclosed: the circle may escape
        # through cell corners it passes through exactly
        for tau in np.linspace(-math.pi, math.pi, 17):
            if not cell.contains(self.boundary_point(float(tau)), tol=ON_CURVE_TOL):
                return None
        return CircArc(self.circle, -math.pi, math.pi)


@dataclass(frozen=True)
class HyperbolicSide:
    """Keeps the convex region around the branch's near focus, i.e. points whose
    distance to the far focus exceeds the distance to the near focus by at least
    twice the semi-transverse axis."""

    branch: HyperbolaBranch

    periodic = False

    def inside_value(self, p: Vec2) -> float:
        return self.branch.focal_residual(p)

    def inside_values(self, pts: np.ndarray) -> np.ndarray:
        b = self.branch
        dfar = np.hypot(pts[:, 0] - b.focus_far.x, pts[:, 1] - b.focus_far.y)
        dnear = np.hypot(pts[:, 0] - b.focus_near.x, pts[:, 1] - b.focus_near.y)
        return dfar - dnear - 2.0 * b.semi_transverse

    def boundary_param(self, p: Vec2) -> float:
        return self.branch.param_of(p)

    def boundary_point(self, tau: float) -> Vec2:
        return self.branch.point(tau)

    def param_interval(self, bbox: tuple[float, float, float, float]) -> tuple[float, float]:
        x0, y0, x1, y1 = bbox
        m = self.branch.center
        radius = max(
            math.hypot(x - m.x, y - m.y) for x in (x0, x1) for y in (y0, y1)
        )
        tmax = self.branch.param_limit(max(radius, 0.1))
        return -tmax, tmax

    def boundary_curve(self, ta: float, tb: float) -> Curve:
        # decreasing parameter keeps the near-focus side on the left
        return HypArc(self.branch, tb, ta)

    def enclosed_loop(self, cell: "CellRegion") -> Curve | None:
        return None


Constraint = Union[HalfPlane, DiskInterior, HyperbolicSide]


# ---------------------------------------------------------------------------
# cell regions


@dataclass(frozen=True)
class CellRegion:
    """Region bounded by closed counter-clockwise loops of tagged segments.

    ``constraints`` carries the clipping history as inequalities; membership
    tests evaluate them directly instead of ray-casting against the loops.
    """

    loops: tuple[tuple[BoundarySegment, ...], ...]
    constraints: tuple[Constraint, ...] = ()

    @staticmethod
    def empty() -> "CellRegion":
        return CellRegion((), ())

    @staticmethod
    def from_region(region: ConvexRegion) -> "CellRegion":
        segs = []
        cons = []
        for a, b in region.edges():
            segs.append(BoundarySegment(LineSeg(a, b), REGION_BOUNDARY))
            outward = (b - a).unit().rot90() * -1.0
            cons.append(HalfPlane(a, outward))
        return CellRegion((tuple(segs),), tuple(cons))

    @property
    def is_empty(self) -> bool:
        return not self.loops

    def segments(self) -> Iterator[BoundarySegment]:
        for loop in self.loops:
            yield from loop

    def contains(self, p: Vec2, tol: float = 1e-12) -> bool:
        if not self.loops:
            return False
        return all(c.inside_value(p) >= -tol for c in self.constraints)

    def contains_many(self, pts: np.ndarray, tol: float = 1e-12) -> np.ndarray:
        if not self.loops:
            return np.zeros(len(pts), dtype=bool)
        ok = np.ones(len(pts), dtype=bool)
        for c in self.constraints:
            ok &= c.inside_values(pts) >= -tol
        return ok

    @property
    def area(self) -> float:
        return region_area(self)

    def bbox(self) -> tuple[float, float, float, float]:
        if not self.loops:
            raise GeometryError("empty region has no bounding box")
        pts = np.vstack([seg.point_many(_SCAN_US) for seg in self.segments()])
        return (
            float(pts[:, 0].min()),
            float(pts[:, 1].min()),
            float(pts[:, 0].max()),
            float(pts[:, 1].max()),
        )

    def segments_from(self, source: BoundarySource) -> list[BoundarySegment]:
        return [seg for seg in self.segments() if seg.source == source]


# ---------------------------------------------------------------------------
# quadrature


def _gl_panel(g_many: Callable[[np.ndarray], np.ndarray], a: float, b: float) -> np.ndarray:
    us = 0.5 * (a + b) + 0.5 * (b - a) * _GL_NODES
    vals = g_many(us)
    return 0.5 * (b - a) * (_GL_WEIGHTS @ vals)


def _adaptive(g_many, a, b, tol, whole, depth):
    m = 0.5 * (a + b)
    left = _gl_panel(g_many, a, m)
    right = _gl_panel(g_many, m, b)
    if depth >= _MAX_QUAD_DEPTH or float(np.max(np.abs(left + right - whole))) < tol:
        return left + right
    half = 0.5 * tol
    return _adaptive(g_many, a, m, half, left, depth + 1) + _adaptive(
        g_many, m, b, half, right, depth + 1
    )


def adaptive_vec_quad(
    g_many: Callable[[np.ndarray], np.ndarray], tol: float = 1e-8
) -> np.ndarray:
    """Integrate a vectorised R -> R^2 function over [0, 1].

    Fixed-order Gauss-Legendre panels, bisected until successive refinements
    differ by less than ``tol`` in each component.
    """
    whole = _gl_panel(g_many, 0.0, 1.0)
    return _adaptive(g_many, 0.0, 1.0, tol, whole, 0)


def _rot_minus90_rows(v: np.ndarray) -> np.ndarray:
    out = np.empty_like(v)
    out[:, 0] = v[:, 1]
    out[:, 1] = -v[:, 0]
    return out


def arc_flux(
    seg: BoundarySegment | Curve,
    weight_many: Callable[[np.ndarray], np.ndarray],
    tol: float = 1e-8,
) -> np.ndarray:
    """Integral of ``weight * outward-normal`` along a segment, as an array.

    The segment must be oriented as part of a counter-clockwise loop; the
    normal direction and arc-length element both come from the traversal
    velocity, so no separate normalisation is needed.
    """
    curve = seg.curve if isinstance(seg, BoundarySegment) else seg

    def g(us: np.ndarray) -> np.ndarray:
        pts = curve.point_many(us)
        n_ds = _rot_minus90_rows(curve.velocity_many(us))
        return weight_many(pts)[:, None] * n_ds

    return adaptive_vec_quad(g, tol=tol)


def line_integral(
    seg: BoundarySegment | Curve, f: Callable[[Vec2], float], tol: float = 1e-8
) -> Vec2:
    """Integral of the scalar field ``f`` times the outward normal over ``seg``."""

    def weights(pts: np.ndarray) -> np.ndarray:
        return np.array([f(Vec2(px, py)) for px, py in pts])

    return Vec2.from_array(arc_flux(seg, weights, tol=tol))


def _quad_speed(curve: Curve) -> float:
    def g(us: np.ndarray) -> np.ndarray:
        v = curve.velocity_many(us)
        out = np.empty_like(v)
        out[:, 0] = np.hypot(v[:, 0], v[:, 1])
        out[:, 1] = 0.0
        return out

    return float(adaptive_vec_quad(g, tol=1e-10)[0])


def arc_length(seg: BoundarySegment | Curve) -> float:
    curve = seg.curve if isinstance(seg, BoundarySegment) else seg
    return curve.length()


def region_area(cell: CellRegion) -> float:
    """Signed area of all loops via Green's theorem.

    Line and circular pieces use closed forms; hyperbolic pieces are
    integrated with adaptive Gauss-Legendre quadrature.
    """
    total = 0.0
    for loop in cell.loops:
        for seg in loop:
            total += seg.curve.area_contribution()
    return total


def _loop_area(loop: Sequence[BoundarySegment]) -> float:
    return sum(seg.curve.area_contribution() for seg in loop)


# ---------------------------------------------------------------------------
# clipping


def _tangent_window_roots(
    f: Callable[[float], float], sv: np.ndarray
) -> list[float]:
    """Root pairs hiding between scan samples near a shallow extremum.

    A constraint boundary that barely pokes through a segment leaves a sign
    window narrower than the scan spacing; every sample then sits on one side
    and the plain sign-change pass sees nothing.  Any interior local extremum
    of the sampled values whose parabolic apex lands near or across zero is
    chased with a bounded scalar optimisation, and a confirmed window yields
    its two bracketing roots.
    """
    out: list[float] = []
    for k in range(1, len(sv) - 1):
        a, vk, b = sv[k - 1], sv[k], sv[k + 1]
        if a == 0.0 or b == 0.0 or vk == 0.0:
            continue
        if vk <= 0.0 and a < vk and b <= vk:
            direction = 1.0
        elif vk >= 0.0 and a > vk and b >= vk:
            direction = -1.0
        else:
            continue
        curv = a - 2.0 * vk + b
        if curv == 0.0:
            continue
        apex = vk - (b - a) ** 2 / (8.0 * curv)
        if direction * apex < -abs(curv):
            continue
        res = minimize_scalar(
            lambda u: -direction * f(u),
            bounds=(_SCAN_US[k - 1], _SCAN_US[k + 1]),
            method="bounded",
            options={"xatol": 1e-13},
        )
        u_star = float(res.x)
        if direction * f(u_star) <= 10.0 * ON_CURVE_TOL:
            continue  # grazing contact, not a crossing
        out.append(brentq(f, _SCAN_US[k - 1], u_star, xtol=1e-13, rtol=8.9e-16))
        out.append(brentq(f, u_star, _SCAN_US[k + 1], xtol=1e-13, rtol=8.9e-16))
    return out


def _segment_crossings(
    seg: BoundarySegment, constraint: Constraint
) -> tuple[list[float], list[Vec2]]:
    """Parameters in (0, 1) where the constraint boundary crosses ``seg``,
    plus all crossing points including those at the segment endpoints."""
    sv = constraint.inside_values(seg.point_many(_SCAN_US))
    sv = np.where(np.abs(sv) < ON_CURVE_TOL, 0.0, sv)
    signs = np.sign(sv)
    nz = np.nonzero(signs)[0]
    roots: list[float] = []
    f = lambda u: constraint.inside_value(seg.point(u))
    for k in range(len(nz) - 1):
        i, j = nz[k], nz[k + 1]
        if signs[i] * signs[j] < 0:
            roots.append(brentq(f, _SCAN_US[i], _SCAN_US[j], xtol=1e-13, rtol=8.9e-16))
    roots.extend(_tangent_window_roots(f, sv))
    roots.sort()
    split_us = [r for r in roots if 1e-9 < r < 1.0 - 1e-9]
    points = [seg.point(r) for r in roots]
    return split_us, points


def _dedupe_crossings(
    taus: list[float], constraint: Constraint
) -> list[float]:
    taus = sorted(taus)
    out: list[float] = []
    for t in taus:
        if out and constraint.boundary_point(out[-1]).dist(
            constraint.boundary_point(t)
        ) < 1e-9:
            continue
        out.append(t)
    # periodic parameters: first and last may coincide across the seam
    if constraint.periodic and len(out) > 1:
        if constraint.boundary_point(out[0]).dist(
            constraint.boundary_point(out[-1])
        ) < 1e-9:
            out.pop()
    return out


def _stitch(pieces: list[BoundarySegment]) -> tuple[tuple[BoundarySegment, ...], ...]:
    todo = [p for p in pieces if p.rough_length() > MIN_PIECE_LEN]
    loops: list[tuple[BoundarySegment, ...]] = []
    while todo:
        chain = [todo.pop(0)]
        first = chain[0].start_point
        end = chain[0].end_point
        while end.dist(first) > SNAP_TOL:
            best_k = -1
            best_d = SNAP_TOL
            for k, cand in enumerate(todo):
                d = cand.start_point.dist(end)
                if d < best_d:
                    best_k, best_d = k, d
            if best_k < 0:
                raise GeometryError(
                    f"failed to close a clipped boundary loop (gap {end.dist(first):.3e})"
                )
            nxt = todo.pop(best_k)
            chain.append(nxt)
            end = nxt.end_point
        loops.append(tuple(chain))
    kept = []
    for loop in loops:
        a = _loop_area(loop)
        if a < -1e-9:
            raise GeometryError(f"clip produced a clockwise loop (area {a:.3e})")
        if a > 1e-12:
            kept.append(loop)
    return tuple(kept)


_PROBE_FRACS = (0.5, 0.25, 0.75, 0.125, 0.875, 0.0625, 0.9375)


def _decisive_value(value_at: Callable[[float], float]) -> float:
    """Sign representative for a crossing-free piece.

    The midpoint alone can land exactly on a tangent contact; walk a short
    probe ladder and trust the first clearly-signed sample.  A piece whose
    probes all sit on the curve runs along it and counts as inside.
    """
    last = 0.0
    for frac in _PROBE_FRACS:
        last = value_at(frac)
        if abs(last) > ON_CURVE_TOL:
            return last
    return last


def _clip(cell: CellRegion, constraint: Constraint, source: BoundarySource) -> CellRegion:
    if cell.is_empty:
        return CellRegion((), cell.constraints + (constraint,))
    new_constraints = cell.constraints + (constraint,)

    pieces: list[BoundarySegment] = []
    crossing_points: list[Vec2] = []
    saw_outside = False
    kept_strict = False
    for seg in cell.segments():
        split_us, pts = _segment_crossings(seg, constraint)
        crossing_points.extend(pts)
        bounds = [0.0, *split_us, 1.0]
        for ua, ub in zip(bounds, bounds[1:]):
            if ub - ua <= 1e-12:
                continue
            piece = seg.subsegment(ua, ub)
            v = _decisive_value(lambda u, _p=piece: constraint.inside_value(_p.point(u)))
            if v >= -ON_CURVE_TOL:
                pieces.append(piece)
                if v > ON_CURVE_TOL:
                    kept_strict = True
            else:
                saw_outside = True

    if not crossing_points:
        if pieces and not saw_outside:
            return CellRegion(cell.loops, new_constraints)
        closed = constraint.enclosed_loop(cell)
        if closed is not None:
            loop = (BoundarySegment(closed, source),)
            return CellRegion((loop,), new_constraints)
        if kept_strict:
            # strictly interior pieces next to dropped ones with no crossing
            # found: the constraint passes exactly through cell vertices
            raise GeometryError(
                "constraint boundary passes exactly through cell vertices; "
                "perturb the configuration"
            )
        return CellRegion((), new_constraints)

    taus = _dedupe_crossings(
        [constraint.boundary_param(p) for p in crossing_points], constraint
    )
    intervals: list[tuple[float, float]] = []
    if constraint.periodic:
        two_pi = 2.0 * math.pi
        for k, ta in enumerate(taus):
            tb = taus[(k + 1) % len(taus)]
            if k == len(taus) - 1:
                tb += two_pi
            intervals.append((ta, tb))
    else:
        lo, hi = constraint.param_interval(_inflated_bbox(cell))
        inner = [t for t in taus if lo < t < hi]
        rail = [lo, *inner, hi]
        intervals = list(zip(rail, rail[1:]))

    for ta, tb in intervals:
        if tb - ta <= 1e-12:
            continue

        def cell_value(frac: float, _ta: float = ta, _tb: float = tb) -> float:
            p = constraint.boundary_point(_ta + frac * (_tb - _ta))
            if not cell.constraints:
                return 1.0
            return min(c.inside_value(p) for c in cell.constraints)

        if _decisive_value(cell_value) >= -ON_CURVE_TOL:
            pieces.append(BoundarySegment(constraint.boundary_curve(ta, tb), source))

    return CellRegion(_stitch(pieces), new_constraints)


def _inflated_bbox(cell: CellRegion) -> tuple[float, float, float, float]:
    x0, y0, x1, y1 = cell.bbox()
    mx = 0.1 * (x1 - x0) + 0.05
    my = 0.1 * (y1 - y0) + 0.05
    return x0 - mx, y0 - my, x1 + mx, y1 + my


def clip_halfplane(
    cell: CellRegion,
    point: Vec2,
    normal: Vec2,
    source: BoundarySource | None = None,
) -> CellRegion:
    """Clip to the half-plane ``normal . (x - point) <= 0``."""
    tag = REGION_BOUNDARY if source is None else source
    return _clip(cell, HalfPlane(point, normal), tag)


def clip_disk(
    cell: CellRegion, disk: Circle, source: BoundarySource | None = None
) -> CellRegion:
    """Clip to the closed disk; a degenerate radius yields an empty region."""
    if disk.radius <= 0.0:
        return CellRegion((), cell.constraints + (DiskInterior(disk),))
    tag = SensingBoundary() if source is None else source
    return _clip(cell, DiskInterior(disk), tag)


def clip_halfregion_hyperbolic(
    cell: CellRegion,
    branch: HyperbolaBranch,
    source: BoundarySource | None = None,
) -> CellRegion:
    """Clip to the convex side of ``branch``, the region around its near focus."""
    tag = HyperbolaEdge() if source is None else source
    return _clip(cell, HyperbolicSide(branch), tag)


# ---------------------------------------------------------------------------
# loop-based point queries (independent of the constraint list)


def point_in_loops(cell: CellRegion, p: Vec2) -> bool:
    """Even-odd ray cast against the segment loops.

    Slower than ``CellRegion.contains`` and used to cross-check that the
    stitched loops agree with the clipping inequalities.
    """
    crossings = 0
    for seg in cell.segments():
        ys = seg.point_many(_SCAN_US)[:, 1] - p.y
        ys = np.where(np.abs(ys) < 1e-13, 0.0, ys)
        signs = np.sign(ys)
        nz = np.nonzero(signs)[0]
        f = lambda u: seg.point(u).y - p.y
        for k in range(len(nz) - 1):
            i, j = nz[k], nz[k + 1]
            if signs[i] * signs[j] < 0:
                root = brentq(f, _SCAN_US[i], _SCAN_US[j], xtol=1e-13, rtol=8.9e-16)
                # half-open (0, 1] so a crossing at a shared loop vertex is
                # counted by exactly one of the two adjacent segments
                if 1e-12 < root and seg.point(root).x > p.x:
                    crossings += 1
    return crossings % 2 == 1
