"""Guaranteed dominance partition of a convex workspace among uncertain agents.

Each agent's true position is only known to lie in a disk around its reported
center.  A point of the workspace belongs to an agent's cell when it is closer
to that agent than to any other *for every possible placement inside the
uncertainty disks*.  Pairwise this is a hyperbolic half-region; a cell is the
intersection of the workspace with the half-regions against all other agents.
Points claimed by nobody form the neutral zone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Mapping, Sequence, Union

import numpy as np

from .geometry import (
    CellRegion,
    ConvexRegion,
    GeometryError,
    HyperbolaBranch,
    HyperbolaEdge,
    Vec2,
    arc_length,
    clip_halfregion_hyperbolic,
    region_area,
)

__all__ = [
    "PartitionError",
    "AgentState",
    "DegeneratePair",
    "GvDiagram",
    "pairwise_h_region",
    "candidate_neighbors",
    "gv_cell",
    "gv_diagram",
]

# a shared boundary shorter than this does not make two agents neighbors
MIN_NEIGHBOR_ARC = 1e-8

_COINCIDENT_TOL = 1e-12


class PartitionError(ValueError):
    """Invalid agent configuration."""


@dataclass(frozen=True)
class AgentState:
    """Reported agent state: disk of possible positions plus sensing range.

    ``r_u`` bounds the positioning error, ``r_s`` is the sensing radius, and
    ``mobile`` marks whether the agent still responds to motion commands.
    """

    id: int
    center: Vec2
    r_u: float
    r_s: float
    mobile: bool = True

    def __post_init__(self) -> None:
        object.__setattr__(self, "r_u", float(self.r_u))
        object.__setattr__(self, "r_s", float(self.r_s))
        if not (0.0 <= self.r_u < self.r_s):
            raise PartitionError(
                f"agent {self.id}: need 0 <= r_u < r_s, got r_u={self.r_u}, r_s={self.r_s}"
            )


class DegeneratePair(Enum):
    """Pairwise regimes with no proper separating branch."""

    EMPTY = "empty"  # uncertainty disks overlap: neither agent dominates anywhere
    RAY = "ray"  # disks tangent: the dominance set collapses to a ray

PairRegime = Union[HyperbolaBranch, DegeneratePair]


def pairwise_h_region(i: AgentState, j: AgentState) -> PairRegime:
    """Separating regime for agent ``i`` against ``j``.

    Returns the hyperbola branch bounding the set of points guaranteed closer
    to ``i``'s disk than to ``j``'s, or a degenerate marker when the disks
    touch or overlap.
    """
    d = i.center.dist(j.center)
    if d < _COINCIDENT_TOL:
        raise PartitionError(f"agents {i.id} and {j.id} have coincident centers")
    gap = i.r_u + j.r_u
    if abs(d - gap) <= 1e-12:
        return DegeneratePair.RAY
    if d < gap:
        return DegeneratePair.EMPTY
    return HyperbolaBranch(
        focus_near=i.center, focus_far=j.center, semi_transverse=0.5 * gap
    )


def _by_id(agents: Sequence[AgentState]) -> dict[int, AgentState]:
    table: dict[int, AgentState] = {}
    for a in agents:
        if a.id in table:
            raise PartitionError(f"duplicate agent id {a.id}")
        table[a.id] = a
    return table


def candidate_neighbors(
    agents: Sequence[AgentState],
    region: ConvexRegion | None = None,
    strategy: str = "all_pairs",
) -> dict[int, frozenset[int]]:
    """Candidate neighbor sets per agent.

    ``all_pairs`` is exact.  ``delaunay`` uses the triangulation of the
    centers as a superset of the pairs that can share a cell boundary, and
    falls back to all pairs on degenerate inputs.
    """
    table = _by_id(agents)
    ids = list(table)
    for k, a in enumerate(agents):
        for b in agents[k + 1 :]:
            if a.center.dist(b.center) < _COINCIDENT_TOL:
                raise PartitionError(
                    f"agents {a.id} and {b.id} have coincident centers"
                )
    if strategy == "all_pairs" or (strategy == "delaunay" and len(ids) <= 3):
        return {i: frozenset(j for j in ids if j != i) for i in ids}
    if strategy != "delaunay":
        raise PartitionError(f"unknown candidate strategy {strategy!r}")

    from scipy.spatial import Delaunay, QhullError

    pts = np.array([[table[i].center.x, table[i].center.y] for i in ids])
    try:
        tri = Delaunay(pts)
    except QhullError:
        return {i: frozenset(j for j in ids if j != i) for i in ids}
    out: dict[int, set[int]] = {i: set() for i in ids}
    for simplex in tri.simplices:
        for a in simplex:
            for b in simplex:
                if a != b:
                    out[ids[a]].add(ids[b])
    return {i: frozenset(v) for i, v in out.items()}


def gv_cell(
    agent_id: int,
    agents: Sequence[AgentState],
    region: ConvexRegion,
    candidates: Iterable[int] | None = None,
) -> CellRegion:
    """Guaranteed cell of one agent: the workspace clipped by the hyperbolic
    half-region against each candidate, in ascending id order.

    Any overlapping or tangent disk pair involving the agent empties the cell.
    """
    table = _by_id(agents)
    if agent_id not in table:
        raise PartitionError(f"unknown agent id {agent_id}")
    me = table[agent_id]
    if candidates is None:
        others = sorted(j for j in table if j != agent_id)
    else:
        others = sorted(set(candidates) - {agent_id})
    cell = CellRegion.from_region(region)
    for j in others:
        regime = pairwise_h_region(me, table[j])
        if isinstance(regime, DegeneratePair):
            return CellRegion.empty()
        cell = clip_halfregion_hyperbolic(
            cell, regime, source=HyperbolaEdge(agent_id, j)
        )
        if cell.is_empty:
            break
    return cell


@dataclass(frozen=True)
class GvDiagram:
    """All guaranteed cells plus derived adjacency and the unclaimed area."""

    region: ConvexRegion
    cells: dict[int, CellRegion]
    gd_neighbors: dict[int, frozenset[int]]
    neutral_area: float


def gv_diagram(
    agents: Sequence[AgentState],
    region: ConvexRegion,
    strategy: str = "all_pairs",
) -> GvDiagram:
    """Build every agent's cell and extract guaranteed neighbors.

    Two agents are neighbors when a piece of their separating branch of
    non-negligible length survives on either cell boundary.  The neutral area
    is whatever the cells do not claim.
    """
    if not agents:
        return GvDiagram(region, {}, {}, region.area)
    cands = candidate_neighbors(agents, region, strategy=strategy)
    cells = {
        a.id: gv_cell(a.id, agents, region, candidates=cands[a.id]) for a in agents
    }
    shared: dict[tuple[int, int], float] = {}
    for i, cell in cells.items():
        for seg in cell.segments():
            src = seg.source
            if isinstance(src, HyperbolaEdge) and src.agent == i:
                key = (i, src.neighbor)
                shared[key] = shared.get(key, 0.0) + arc_length(seg)
    neighbors = {
        a.id: frozenset(
            j for (i, j), total in shared.items() if i == a.id and total > MIN_NEIGHBOR_ARC
        )
        for a in agents
    }
    claimed = sum(region_area(c) for c in cells.values())
    return GvDiagram(region, cells, neighbors, region.area - claimed)
