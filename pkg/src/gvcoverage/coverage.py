"""Sensed cells and the coverage objective.

An agent only gets credit for the part of its guaranteed cell that every
possible true position can sense: its cell intersected with the disk of
radius ``r_s - r_u`` around the reported center.  The objective is the
importance mass of those sensed cells summed over the network.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence, Union

import numpy as np

from .geometry import (
    CellRegion,
    Circle,
    ConvexRegion,
    SensingBoundary,
    Vec2,
    clip_disk,
    region_area,
)
from .partition import AgentState, GvDiagram, gv_diagram

__all__ = [
    "CoverageError",
    "UniformDensity",
    "CallableDensity",
    "GridDensity",
    "Density",
    "density_at",
    "density_many",
    "guaranteed_sensing_disk",
    "sensed_cell",
    "sensed_cells",
    "CoverageReport",
    "objective",
    "sampled_objective",
]


class CoverageError(ValueError):
    """Invalid sensing model or density input."""


@dataclass(frozen=True)
class UniformDensity:
    """Constant importance density."""

    value: float = 1.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "value", float(self.value))
        if not math.isfinite(self.value) or self.value < 0.0:
            raise CoverageError(f"density value must be finite and >= 0, got {self.value}")


@dataclass(frozen=True)
class CallableDensity:
    """Pointwise importance density; ``fn_many`` optionally vectorises it."""

    fn: Callable[[Vec2], float]
    fn_many: Callable[[np.ndarray], np.ndarray] | None = None


@dataclass(frozen=True)
class GridDensity:
    """Row-major sample grid with bilinear interpolation, clamped at the edges.

    ``values[r][c]`` samples the density at the center of grid cell (r, c);
    row 0 sits at the bottom of the bounding box.
    """

    x0: float
    y0: float
    x1: float
    y1: float
    values: tuple[tuple[float, ...], ...]
    source_path: str = ""

    def __post_init__(self) -> None:
        if self.x1 <= self.x0 or self.y1 <= self.y0:
            raise CoverageError("grid density bounding box is degenerate")
        rows = len(self.values)
        if rows < 1 or len(self.values[0]) < 1:
            raise CoverageError("grid density needs at least one sample")
        if any(len(r) != len(self.values[0]) for r in self.values):
            raise CoverageError("grid density rows have unequal lengths")
        if any(not math.isfinite(v) or v < 0.0 for r in self.values for v in r):
            raise CoverageError("grid density values must be finite and >= 0")

    def _array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=float)

    def values_many(self, pts: np.ndarray) -> np.ndarray:
        grid = self._array()
        rows, cols = grid.shape
        dx = (self.x1 - self.x0) / cols
        dy = (self.y1 - self.y0) / rows
        # fractional index of the surrounding sample centers
        fx = np.clip((pts[:, 0] - self.x0) / dx - 0.5, 0.0, cols - 1.0)
        fy = np.clip((pts[:, 1] - self.y0) / dy - 0.5, 0.0, rows - 1.0)
        i0 = np.clip(np.floor(fx).astype(int), 0, cols - 1)
        j0 = np.clip(np.floor(fy).astype(int), 0, rows - 1)
        i1 = np.minimum(i0 + 1, cols - 1)
        j1 = np.minimum(j0 + 1, rows - 1)
        wx = fx - i0
        wy = fy - j0
        return (
            grid[j0, i0] * (1 - wx) * (1 - wy)
            + grid[j0, i1] * wx * (1 - wy)
            + grid[j1, i0] * (1 - wx) * wy
            + grid[j1, i1] * wx * wy
        )

    def value_at(self, p: Vec2) -> float:
        return float(self.values_many(np.array([[p.x, p.y]]))[0])


Density = Union[UniformDensity, CallableDensity, GridDensity]


def density_at(phi: Density, p: Vec2) -> float:
    if isinstance(phi, UniformDensity):
        return phi.value
    if isinstance(phi, GridDensity):
        return phi.value_at(p)
    return float(phi.fn(p))


def density_many(phi: Density, pts: np.ndarray) -> np.ndarray:
    if isinstance(phi, UniformDensity):
        return np.full(len(pts), phi.value)
    if isinstance(phi, GridDensity):
        return phi.values_many(pts)
    if phi.fn_many is not None:
        return np.asarray(phi.fn_many(pts), dtype=float)
    return np.array([phi.fn(Vec2(px, py)) for px, py in pts])


def guaranteed_sensing_disk(agent: AgentState) -> Circle:
    """Disk every possible true position can sense: radius ``r_s - r_u``."""
    if agent.r_s <= agent.r_u:
        raise CoverageError(
            f"agent {agent.id}: sensing radius {agent.r_s} does not exceed "
            f"uncertainty radius {agent.r_u}"
        )
    return Circle(agent.center, agent.r_s - agent.r_u)


def sensed_cell(
    agent_id: int, diagram: GvDiagram, agents: Sequence[AgentState]
) -> CellRegion:
    """The agent's cell restricted to its guaranteed sensing disk."""
    table = {a.id: a for a in agents}
    disk = guaranteed_sensing_disk(table[agent_id])
    return clip_disk(
        diagram.cells[agent_id], disk, source=SensingBoundary(agent_id)
    )


def sensed_cells(
    diagram: GvDiagram, agents: Sequence[AgentState]
) -> dict[int, CellRegion]:
    return {a.id: sensed_cell(a.id, diagram, agents) for a in agents}


@dataclass(frozen=True)
class CoverageReport:
    per_agent_h: dict[int, float]
    total_h: float
    coverage_fraction: float


def _cell_mass(cell: CellRegion, phi: Density) -> float:
    """Importance mass inside a cell.

    Uniform densities use the exact boundary-integral area.  Other densities
    are integrated on a cell-bounding-box grid masked by the cell membership
    inequalities, doubling the resolution until the estimate settles.
    """
    if cell.is_empty:
        return 0.0
    if isinstance(phi, UniformDensity):
        return phi.value * region_area(cell)
    x0, y0, x1, y1 = cell.bbox()
    prev = None
    res = 64
    while True:
        xs = x0 + (np.arange(res) + 0.5) * (x1 - x0) / res
        ys = y0 + (np.arange(res) + 0.5) * (y1 - y0) / res
        X, Y = np.meshgrid(xs, ys)
        pts = np.stack([X.ravel(), Y.ravel()], axis=1)
        inside = cell.contains_many(pts)
        px_area = (x1 - x0) * (y1 - y0) / (res * res)
        est = float(np.sum(density_many(phi, pts[inside])) * px_area)
        if prev is not None and (
            abs(est - prev) <= 1e-3 * max(abs(est), 1e-12) or res >= 1024
        ):
            return est
        prev = est
        res *= 2


def _region_mass(region: ConvexRegion, phi: Density, res: int = 512) -> float:
    if isinstance(phi, UniformDensity):
        return phi.value * region.area
    x0, y0, x1, y1 = region.bbox()
    xs = x0 + (np.arange(res) + 0.5) * (x1 - x0) / res
    ys = y0 + (np.arange(res) + 0.5) * (y1 - y0) / res
    X, Y = np.meshgrid(xs, ys)
    pts = np.stack([X.ravel(), Y.ravel()], axis=1)
    inside = region.contains_many(pts)
    px_area = (x1 - x0) * (y1 - y0) / (res * res)
    return float(np.sum(density_many(phi, pts[inside])) * px_area)


def _max_total_mass(
    agents: Sequence[AgentState], region: ConvexRegion, phi: Density
) -> float:
    """Normaliser for the coverage fraction.

    For uniform densities: the total guaranteed sensing footprint capped at
    the workspace area.  Otherwise: the workspace importance mass.
    """
    if isinstance(phi, UniformDensity):
        footprint = sum(
            math.pi * (a.r_s - a.r_u) ** 2 for a in agents
        )
        return phi.value * min(footprint, region.area)
    return _region_mass(region, phi)


def objective(
    agents: Sequence[AgentState],
    region: ConvexRegion,
    phi: Density,
    diagram: GvDiagram | None = None,
) -> CoverageReport:
    """Total sensed importance mass and the fraction of the achievable maximum."""
    if not agents:
        return CoverageReport({}, 0.0, 0.0)
    if diagram is None:
        diagram = gv_diagram(agents, region)
    per_agent = {
        a.id: _cell_mass(sensed_cell(a.id, diagram, agents), phi) for a in agents
    }
    total = sum(per_agent.values())
    denom = _max_total_mass(agents, region, phi)
    fraction = min(max(total / denom, 0.0), 1.0) if denom > 0.0 else 0.0
    return CoverageReport(per_agent, total, fraction)


def sampled_objective(
    agents: Sequence[AgentState],
    region: ConvexRegion,
    phi: Density,
    resolution: int = 400,
) -> float:
    """Grid estimate of the objective straight from the defining inequalities.

    Deliberately ignores the constructed cell geometry: each sample point is
    assigned by testing the guaranteed-dominance and sensing conditions
    directly, which makes this usable as an independent check.
    """
    if not agents:
        return 0.0
    x0, y0, x1, y1 = region.bbox()
    xs = x0 + (np.arange(resolution) + 0.5) * (x1 - x0) / resolution
    ys = y0 + (np.arange(resolution) + 0.5) * (y1 - y0) / resolution
    X, Y = np.meshgrid(xs, ys)
    pts = np.stack([X.ravel(), Y.ravel()], axis=1)
    pts = pts[region.contains_many(pts)]
    px_area = (x1 - x0) * (y1 - y0) / (resolution * resolution)
    dists = np.stack(
        [np.hypot(pts[:, 0] - a.center.x, pts[:, 1] - a.center.y) for a in agents]
    )
    total = 0.0
    for k, a in enumerate(agents):
        owned = dists[k] <= a.r_s - a.r_u
        for l, b in enumerate(agents):
            if l == k:
                continue
            owned &= dists[k] + a.r_u <= dists[l] - b.r_u
        if np.any(owned):
            total += float(np.sum(density_many(phi, pts[owned])) * px_area)
    return total
