"""Shared fixtures and independent oracles.

The oracles here deliberately avoid the package's clipping and quadrature
paths: cell areas come from dense point grids, classical Voronoi areas from
shapely, and gradients from finite differences, so agreement is meaningful.
"""

from __future__ import annotations

import math

import numpy as np
import pytest

from gvcoverage.geometry import ConvexRegion, Vec2
from gvcoverage.partition import AgentState

UNIT_SQUARE = ((0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0))
UNIT_PENTAGON = ((0.1, 0.0), (0.95, 0.08), (1.0, 0.7), (0.5, 1.0), (0.0, 0.55))
UNIT_QUAD = ((0.0, 0.05), (0.9, 0.0), (1.0, 0.85), (0.15, 1.0))
WIDE_HEX = ((0.0, 0.2), (0.45, 0.0), (0.95, 0.1), (1.0, 0.75), (0.5, 1.0), (0.05, 0.8))

REGION_VERTEX_SETS = (UNIT_SQUARE, UNIT_PENTAGON, UNIT_QUAD, WIDE_HEX)


def make_region(vertices) -> ConvexRegion:
    return ConvexRegion(tuple(Vec2(x, y) for x, y in vertices))


def random_instance(
    seed: int,
    n_low: int = 2,
    n_high: int = 8,
    r_u: float = 0.05,
    r_s: float = 0.3,
    clearance: float = 0.01,
) -> tuple[list[AgentState], ConvexRegion]:
    """Agents with pairwise-disjoint uncertainty disks in a unit-scale region."""
    rng = np.random.default_rng(seed)
    region = make_region(REGION_VERTEX_SETS[seed % len(REGION_VERTEX_SETS)])
    n = int(rng.integers(n_low, n_high + 1))
    x0, y0, x1, y1 = region.bbox()
    centers: list[Vec2] = []
    while len(centers) < n:
        p = Vec2(float(rng.uniform(x0, x1)), float(rng.uniform(y0, y1)))
        if not region.contains(p):
            continue
        if all(p.dist(q) > 2.0 * r_u + clearance for q in centers):
            centers.append(p)
    agents = [AgentState(k, c, r_u, r_s) for k, c in enumerate(centers)]
    return agents, region


def grid_gv_areas(
    agents, region: ConvexRegion, resolution: int = 2000
) -> tuple[dict[int, float], float]:
    """Cell areas from a midpoint-sampled point grid over the region bbox.

    A sample belongs to agent i when dist_i + r_u_i <= dist_j - r_u_j for
    every other agent j.  Returns per-agent areas and the area of region
    samples owned by nobody.
    """
    x0, y0, x1, y1 = region.bbox()
    xs = x0 + (x1 - x0) * (np.arange(resolution) + 0.5) / resolution
    ys = y0 + (y1 - y0) * (np.arange(resolution) + 0.5) / resolution
    pixel = ((x1 - x0) / resolution) * ((y1 - y0) / resolution)
    ids = [a.id for a in agents]
    cx = np.array([a.center.x for a in agents])
    cy = np.array([a.center.y for a in agents])
    ru = np.array([a.r_u for a in agents])
    counts = np.zeros(len(agents), dtype=np.int64)
    neutral = 0
    rows_per_chunk = max(1, 400_000 // resolution)
    for start in range(0, resolution, rows_per_chunk):
        band = ys[start : start + rows_per_chunk]
        gx, gy = np.meshgrid(xs, band)
        pts = np.column_stack([gx.ravel(), gy.ravel()])
        pts = pts[region.contains_many(pts)]
        if not len(pts):
            continue
        d = np.hypot(pts[:, 0, None] - cx[None, :], pts[:, 1, None] - cy[None, :])
        guar = d + ru[None, :]
        worst = d - ru[None, :]
        owned_any = np.zeros(len(pts), dtype=bool)
        for k in range(len(agents)):
            others = np.ones(len(agents), dtype=bool)
            others[k] = False
            mine = (guar[:, k : k + 1] <= worst[:, others]).all(axis=1)
            counts[k] += int(mine.sum())
            owned_any |= mine
        neutral += int((~owned_any).sum())
    areas = {ids[k]: counts[k] * pixel for k in range(len(agents))}
    return areas, neutral * pixel


def classical_voronoi_areas(agents, region: ConvexRegion) -> dict[int, float]:
    """Voronoi cell areas inside the region, via shapely."""
    from shapely.geometry import MultiPoint, Point, Polygon
    from shapely.ops import voronoi_diagram

    poly = Polygon([(v.x, v.y) for v in region.vertices])
    pts = MultiPoint([(a.center.x, a.center.y) for a in agents])
    if len(agents) == 1:
        return {agents[0].id: poly.area}
    cells = voronoi_diagram(pts, envelope=poly.buffer(10.0))
    out: dict[int, float] = {}
    for cell in cells.geoms:
        for a in agents:
            if cell.intersects(Point(a.center.x, a.center.y).buffer(1e-9)):
                out[a.id] = cell.intersection(poly).area
                break
    assert len(out) == len(agents)
    return out


@pytest.fixture(scope="session")
def scenarios_dir():
    from pathlib import Path

    here = Path(__file__).resolve().parent.parent / "scenarios"
    assert here.is_dir()
    return here
