"""Geometry primitives: curves, boundary integrals, and the clipping engine.

Derived expectations come from closed forms (disk caps, polygon areas) or
from the dominance-inequality grid oracle in conftest; none reuse the code
under test.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gvcoverage.geometry import (
    CellRegion,
    CircArc,
    Circle,
    ConvexRegion,
    GeometryError,
    HyperbolaBranch,
    LineSeg,
    Vec2,
    arc_length,
    clip_disk,
    clip_halfplane,
    clip_halfregion_hyperbolic,
    line_integral,
    point_in_loops,
    region_area,
)
from gvcoverage.partition import AgentState, gv_cell

UNIT_SQUARE = ConvexRegion((Vec2(0, 0), Vec2(1, 0), Vec2(1, 1), Vec2(0, 1)))


# ---------------------------------------------------------------------------
# primitives


def test_vec2_algebra():
    a = Vec2(3, 4)
    assert a.norm() == 5.0
    assert a.dot(Vec2(1, 2)) == 11.0
    assert a.cross(Vec2(1, 2)) == 2.0
    assert a.rot90() == Vec2(-4, 3)
    assert (a - Vec2(3, 4)).norm() == 0.0
    assert a.unit().norm() == pytest.approx(1.0)


def test_vec2_rejects_non_finite():
    with pytest.raises(GeometryError):
        Vec2(math.nan, 0.0)
    with pytest.raises(GeometryError):
        Vec2(0.0, math.inf)


def test_region_validation():
    with pytest.raises(GeometryError):
        ConvexRegion((Vec2(0, 0), Vec2(1, 0)))
    # clockwise ordering
    with pytest.raises(GeometryError):
        ConvexRegion((Vec2(0, 0), Vec2(0, 1), Vec2(1, 1), Vec2(1, 0)))
    # reflex vertex
    with pytest.raises(GeometryError):
        ConvexRegion((Vec2(0, 0), Vec2(2, 0), Vec2(1, 0.1), Vec2(1, 2)))


def test_region_area_and_containment():
    assert UNIT_SQUARE.area == pytest.approx(1.0)
    assert UNIT_SQUARE.contains(Vec2(0.5, 0.5))
    assert UNIT_SQUARE.contains(Vec2(0.0, 0.5))  # boundary counts
    assert not UNIT_SQUARE.contains(Vec2(-0.01, 0.5))
    pts = np.array([[0.5, 0.5], [1.5, 0.5], [0.0, 0.0]])
    assert UNIT_SQUARE.contains_many(pts).tolist() == [True, False, True]
    assert UNIT_SQUARE.distance_to_boundary(Vec2(0.5, 0.5)) == pytest.approx(0.5)


# ---------------------------------------------------------------------------
# hyperbola branch


def _branch() -> HyperbolaBranch:
    return HyperbolaBranch(
        focus_near=Vec2(0, 0), focus_far=Vec2(1, 0), semi_transverse=0.3
    )


def test_branch_frame_and_vertex():
    br = _branch()
    assert br.center == Vec2(0.5, 0.0)
    assert br.half_focal == pytest.approx(0.5)
    assert br.semi_conjugate == pytest.approx(0.4)
    assert br.eccentricity == pytest.approx(0.5 / 0.3)
    v = br.point(0.0)
    # vertex sits between the foci, offset toward the near focus
    assert v.x == pytest.approx(0.2)
    assert v.y == pytest.approx(0.0)
    assert v.dist(br.focus_far) - v.dist(br.focus_near) == pytest.approx(0.6)


def test_branch_degenerate_is_bisector():
    br = HyperbolaBranch(Vec2(0, 0), Vec2(1, 0), 0.0)
    assert br.eccentricity == math.inf
    for t in (-1.0, 0.0, 2.0):
        p = br.point(t)
        assert p.x == pytest.approx(0.5)
        assert p.dist(br.focus_near) == pytest.approx(p.dist(br.focus_far))


def test_branch_rejects_wide_transverse():
    with pytest.raises(GeometryError):
        HyperbolaBranch(Vec2(0, 0), Vec2(1, 0), 0.5)
    with pytest.raises(GeometryError):
        HyperbolaBranch(Vec2(0, 0), Vec2(1, 0), 0.6)


@settings(max_examples=60, deadline=None)
@given(
    t=st.floats(-4.0, 4.0),
    ax=st.floats(-2.0, 2.0),
    ay=st.floats(-2.0, 2.0),
    gap=st.floats(0.2, 3.0),
    frac=st.floats(0.0, 0.9),
)
def test_branch_points_satisfy_focal_equation(t, ax, ay, gap, frac):
    near = Vec2(ax, ay)
    far = Vec2(ax + gap, ay - 0.3 * gap)
    a = 0.5 * frac * near.dist(far)
    br = HyperbolaBranch(near, far, a)
    p = br.point(t)
    assert abs(br.focal_residual(p)) < 1e-9 * max(1.0, p.norm())
    assert br.param_of(p) == pytest.approx(t, abs=1e-9)


def test_param_limit_bounds_branch_points():
    br = _branch()
    radius = 2.0
    limit = br.param_limit(radius)
    for t in (limit + 0.01, -limit - 0.01, limit + 3.0):
        assert br.point(t).dist(br.center) > radius


# ---------------------------------------------------------------------------
# curve segments and boundary integrals


def test_line_seg_basics():
    seg = LineSeg(Vec2(0, 0), Vec2(2, 0))
    assert seg.point(0.5) == Vec2(1, 0)
    assert seg.length() == pytest.approx(2.0)
    sub = seg.subsegment(0.25, 0.75)
    assert sub.start_point == Vec2(0.5, 0)
    assert sub.end_point == Vec2(1.5, 0)


def test_circ_arc_basics():
    arc = CircArc(Circle(Vec2(0, 0), 2.0), 0.0, math.pi)
    assert arc.point(0.0) == Vec2(2, 0)
    assert arc.point(1.0).x == pytest.approx(-2.0)
    assert arc.length() == pytest.approx(2.0 * math.pi)
    # full CCW circle closes the loop by itself
    full = CircArc(Circle(Vec2(0.3, 0.7), 0.5), 0.0, 2 * math.pi)
    assert full.area_contribution() == pytest.approx(math.pi * 0.25)


def test_line_integral_right_half_circle():
    # unit-weight flux through the right half of the unit circle is (2, 0):
    # the integral of the outward normal over x >= 0
    arc = CircArc(Circle(Vec2(0, 0), 1.0), -math.pi / 2, math.pi / 2)
    v = line_integral(arc, lambda p: 1.0)
    assert v.x == pytest.approx(2.0, abs=1e-9)
    assert v.y == pytest.approx(0.0, abs=1e-9)


def test_line_integral_downward_segment():
    # traversed downward as part of a CCW loop, the outward normal is -x
    seg = LineSeg(Vec2(0, 1), Vec2(0, 0))
    v = line_integral(seg, lambda p: 1.0)
    assert v.x == pytest.approx(-1.0, abs=1e-12)
    assert v.y == pytest.approx(0.0, abs=1e-12)


def test_line_integral_weighted_segment():
    # f(x, y) = y on the upward right edge of the unit square: integral of
    # y dy from 0 to 1 times outward normal (1, 0)
    seg = LineSeg(Vec2(1, 0), Vec2(1, 1))
    v = line_integral(seg, lambda p: p.y)
    assert v.x == pytest.approx(0.5, abs=1e-9)
    assert v.y == pytest.approx(0.0, abs=1e-12)


def test_closed_loop_flux_vanishes():
    full = CircArc(Circle(Vec2(0.3, 0.7), 0.5), 0.0, 2 * math.pi)
    v = line_integral(full, lambda p: 1.0)
    assert abs(v.x) < 1e-9 and abs(v.y) < 1e-9


def test_region_area_of_polygon_cell():
    cell = CellRegion.from_region(UNIT_SQUARE)
    assert region_area(cell) == pytest.approx(1.0, abs=1e-12)
    tri = ConvexRegion((Vec2(0, 0), Vec2(3, 0), Vec2(0, 4)))
    assert region_area(CellRegion.from_region(tri)) == pytest.approx(6.0, abs=1e-12)


def test_arc_length_tags():
    cell = CellRegion.from_region(UNIT_SQUARE)
    assert sum(arc_length(s) for s in cell.segments()) == pytest.approx(4.0)


# ---------------------------------------------------------------------------
# clipping: frozen cases


def test_clip_halfplane_splits_square():
    cell = CellRegion.from_region(UNIT_SQUARE)
    # keep x <= 0.3
    left = clip_halfplane(cell, Vec2(0.3, 0.0), Vec2(1.0, 0.0))
    assert left.area == pytest.approx(0.3, abs=1e-12)
    assert left.contains(Vec2(0.1, 0.5))
    assert not left.contains(Vec2(0.5, 0.5))


def test_clip_halfplane_empty_and_full():
    cell = CellRegion.from_region(UNIT_SQUARE)
    gone = clip_halfplane(cell, Vec2(-1.0, 0.0), Vec2(1.0, 0.0))
    assert gone.is_empty
    assert gone.area == 0.0
    kept = clip_halfplane(cell, Vec2(5.0, 0.0), Vec2(1.0, 0.0))
    assert kept.area == pytest.approx(1.0, abs=1e-12)


def test_clip_disk_quarter():
    # disk centred on a corner of a larger square: a clean quarter disk
    big = ConvexRegion((Vec2(0, 0), Vec2(2, 0), Vec2(2, 2), Vec2(0, 2)))
    q = clip_disk(CellRegion.from_region(big), Circle(Vec2(0, 0), 1.0))
    assert q.area == pytest.approx(math.pi / 4, abs=1e-10)
    assert q.contains(Vec2(0.5, 0.5))
    assert not q.contains(Vec2(0.9, 0.9))


def test_clip_disk_idempotent():
    big = ConvexRegion((Vec2(0, 0), Vec2(2, 0), Vec2(2, 2), Vec2(0, 2)))
    disk = Circle(Vec2(0, 0), 1.0)
    once = clip_disk(CellRegion.from_region(big), disk)
    twice = clip_disk(once, disk)
    assert twice.area == pytest.approx(once.area, abs=1e-12)


def test_clip_interior_disk_keeps_circle_only():
    cell = CellRegion.from_region(UNIT_SQUARE)
    small = clip_disk(cell, Circle(Vec2(0.5, 0.5), 0.2))
    assert small.area == pytest.approx(math.pi * 0.04, abs=1e-12)
    assert len(small.loops) == 1
    assert len(small.loops[0]) == 1  # one closed circular arc


def test_clip_zero_radius_disk_is_empty():
    cell = CellRegion.from_region(UNIT_SQUARE)
    assert clip_disk(cell, Circle(Vec2(0.5, 0.5), 0.0)).is_empty


def test_hyperbolic_clip_matches_grid_oracle():
    # two agents on the unit square; dominance region of the left one.
    # frozen from an 8000^2 midpoint grid of the defining inequality:
    # ||x - (0.7, 0.5)|| - ||x - (0.3, 0.5)|| >= 0.1  ->  area 0.4145386
    a = AgentState(0, Vec2(0.3, 0.5), 0.05, 0.3)
    b = AgentState(1, Vec2(0.7, 0.5), 0.05, 0.3)
    cell = gv_cell(0, [a, b], UNIT_SQUARE)
    assert cell.area == pytest.approx(0.4145386, abs=5e-6)


def test_hyperbolic_clip_bisector_split():
    # zero uncertainty: the dominance boundary is the perpendicular bisector
    a = AgentState(0, Vec2(0.25, 0.5), 0.0, 0.3)
    b = AgentState(1, Vec2(0.75, 0.5), 0.0, 0.3)
    cell = gv_cell(0, [a, b], UNIT_SQUARE)
    assert cell.area == pytest.approx(0.5, abs=1e-9)


def test_near_tangent_disk_poke_is_detected():
    # sensing disk pokes 1e-5 past a straight edge between scan samples; the
    # missing sliver matches the closed-form circular-cap area
    big = ConvexRegion((Vec2(0, 0), Vec2(4, 0), Vec2(4, 3), Vec2(0, 3)))
    cell = clip_halfplane(CellRegion.from_region(big), Vec2(0, 2), Vec2(0, 1))
    r, w = 0.9, 1e-5
    poked = clip_disk(cell, Circle(Vec2(2.013, 2.0 + w - r), r))
    cap = r * r * math.acos((r - w) / r) - (r - w) * math.sqrt(2 * r * w - w * w)
    assert cap == pytest.approx(5.656844164489763e-08, rel=1e-12)
    assert poked.area == pytest.approx(math.pi * r * r - cap, abs=1e-12)


def test_exact_tangency_keeps_disk_whole():
    # grazing contact must not split the circle into arcs
    big = ConvexRegion((Vec2(0, 0), Vec2(4, 0), Vec2(4, 3), Vec2(0, 3)))
    cell = clip_halfplane(CellRegion.from_region(big), Vec2(0, 2), Vec2(0, 1))
    r = 0.9
    tangent = clip_disk(cell, Circle(Vec2(2.013, 2.0 - r), r))
    assert tangent.area == pytest.approx(math.pi * r * r, abs=1e-12)
    assert sum(1 for _ in tangent.segments()) == 1


def test_vertex_exact_contact_raises():
    # circle through two cell corners, centred on a third: the crossings sit
    # exactly on vertices and the clip result is not representable
    cell = CellRegion.from_region(UNIT_SQUARE)
    with pytest.raises(GeometryError, match="through cell vertices"):
        clip_disk(cell, Circle(Vec2(0, 0), 1.0))


def test_constraint_along_edge_gives_empty():
    # halfplane boundary lying exactly on the left edge: measure-zero overlap
    cell = CellRegion.from_region(UNIT_SQUARE)
    sliver = clip_halfplane(cell, Vec2(0.0, 0.4), Vec2(1.0, 0.0))
    assert sliver.is_empty


def test_clipping_is_order_insensitive():
    cell = CellRegion.from_region(UNIT_SQUARE)
    disk = Circle(Vec2(0.4, 0.4), 0.35)
    p, n = Vec2(0.5, 0.0), Vec2(1.0, 0.0)
    ab = clip_halfplane(clip_disk(cell, disk), p, n)
    ba = clip_disk(clip_halfplane(cell, p, n), disk)
    assert ab.area == pytest.approx(ba.area, abs=1e-10)


def test_loops_agree_with_constraints():
    # ray casting against the stitched loops must reproduce the inequality
    # membership away from the boundary
    a = AgentState(0, Vec2(0.32, 0.41), 0.05, 0.3)
    b = AgentState(1, Vec2(0.71, 0.62), 0.05, 0.3)
    cell = gv_cell(0, [a, b], UNIT_SQUARE)
    cell = clip_disk(cell, Circle(a.center, 0.25))
    rng = np.random.default_rng(7)
    pts = rng.uniform(0.0, 1.0, size=(2000, 2))
    agree = 0
    for px, py in pts:
        p = Vec2(px, py)
        if point_in_loops(cell, p) == cell.contains(p):
            agree += 1
    assert agree >= 1998  # only near-boundary points may disagree


# ---------------------------------------------------------------------------
# clipping: properties


@settings(max_examples=40, deadline=None)
@given(
    cx=st.floats(0.05, 0.95),
    cy=st.floats(0.05, 0.95),
    r=st.floats(0.05, 0.8),
)
def test_disk_clip_area_bounds(cx, cy, r):
    cell = CellRegion.from_region(UNIT_SQUARE)
    clipped = clip_disk(cell, Circle(Vec2(cx, cy), r))
    area = clipped.area
    assert -1e-12 <= area <= min(1.0, math.pi * r * r) + 1e-9


@settings(max_examples=40, deadline=None)
@given(
    px=st.floats(-0.5, 1.5),
    nx=st.floats(-1.0, 1.0),
    ny=st.floats(-1.0, 1.0),
)
def test_halfplane_clip_monotone_and_idempotent(px, nx, ny):
    if math.hypot(nx, ny) < 1e-3:
        nx = 1.0
    cell = CellRegion.from_region(UNIT_SQUARE)
    p, n = Vec2(px, 0.4), Vec2(nx, ny)
    once = clip_halfplane(cell, p, n)
    assert once.area <= cell.area + 1e-9
    twice = clip_halfplane(once, p, n)
    assert twice.area == pytest.approx(once.area, abs=1e-9)


@settings(max_examples=30, deadline=None)
@given(
    bx=st.floats(0.55, 0.9),
    by=st.floats(0.1, 0.9),
    ru=st.floats(0.01, 0.12),
)
def test_hyperbolic_clip_stays_inside_dominance_set(bx, by, ru):
    a = AgentState(0, Vec2(0.3, 0.5), ru, 0.5)
    b = AgentState(1, Vec2(bx, by), ru, 0.5)
    if a.center.dist(b.center) <= 2 * ru + 1e-3:
        return
    cell = gv_cell(0, [a, b], UNIT_SQUARE)
    rng = np.random.default_rng(3)
    pts = rng.uniform(0.0, 1.0, size=(400, 2))
    inside = cell.contains_many(pts, tol=1e-9)
    da = np.hypot(pts[:, 0] - a.center.x, pts[:, 1] - a.center.y)
    db = np.hypot(pts[:, 0] - b.center.x, pts[:, 1] - b.center.y)
    satisfied = db - da >= 2 * ru - 1e-7
    assert not np.any(inside & ~satisfied)
