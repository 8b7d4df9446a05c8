"""Gradient-based motion commands from boundary integrals over sensed cells.

Moving one agent deforms its own sensed cell through its sensing circle and
through every hyperbolic dominance boundary it shares, and deforms each
neighbor's sensed cell through the mirrored boundary.  The objective gradient
therefore splits into arcs: the sensing-circle arc contributes the plain
outward-normal flux, while hyperbolic arcs weight the normal by the transpose
Jacobian of the boundary point with respect to the agent's center.  Workspace
edges are fixed and contribute nothing.

The full law sums every term and follows the exact gradient; the reduced law
keeps only the sensing-circle term, which is cheaper and empirically still
climbs the objective.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .geometry import (
    BoundarySegment,
    CellRegion,
    ConvexRegion,
    GeometryError,
    HypArc,
    HyperbolaBranch,
    HyperbolaEdge,
    RegionBoundary,
    SensingBoundary,
    Vec2,
    adaptive_vec_quad,
    arc_flux,
)
from .partition import AgentState, GvDiagram, gv_diagram
from .coverage import Density, density_many, objective, sensed_cells

__all__ = [
    "ArcJacobian",
    "BoundaryDecomposition",
    "ControlVector",
    "boundary_decomposition",
    "hyperbolic_jacobian",
    "control_full",
    "control_suboptimal",
    "compute_controls",
    "fd_gradient",
]

_R90 = np.array([[0.0, -1.0], [1.0, 0.0]])
_EYE = np.eye(2)


@dataclass(frozen=True)
class ArcJacobian:
    """Transpose Jacobian of a boundary point with respect to an agent center."""

    matrix: np.ndarray


@dataclass(frozen=True)
class BoundaryDecomposition:
    """Segments of a sensed-cell boundary grouped by what created them."""

    on_region: tuple[BoundarySegment, ...]
    on_sensing: tuple[BoundarySegment, ...]
    on_hyperbolic: tuple[BoundarySegment, ...]


@dataclass(frozen=True)
class ControlVector:
    """Motion command with its per-arc breakdown.

    ``u`` equals ``alpha`` times the sum of the sensing term and all
    hyperbolic terms.  ``empty_sensed_cell`` flags agents that currently
    control no area and therefore hold still.
    """

    u: Vec2
    sensing_term: Vec2
    hyperbolic_terms: dict[int, Vec2]
    alpha: float
    empty_sensed_cell: bool = False


def boundary_decomposition(cell: CellRegion) -> BoundaryDecomposition:
    region, sensing, hyperbolic = [], [], []
    for seg in cell.segments():
        if isinstance(seg.source, RegionBoundary):
            region.append(seg)
        elif isinstance(seg.source, SensingBoundary):
            sensing.append(seg)
        else:
            hyperbolic.append(seg)
    return BoundaryDecomposition(tuple(region), tuple(sensing), tuple(hyperbolic))


def _branch_jacobians(branch: HyperbolaBranch, ts: np.ndarray, sign: float) -> np.ndarray:
    """Jacobians d(point)/d(focus) at fixed curve parameter, shape (N, 2, 2).

    ``sign`` is +1 when differentiating with respect to the near focus and -1
    for the far focus.  Derived by differentiating the parametrisation
    center + a*cosh(t)*u + b*sinh(t)*v through the focus-dependent frame.
    """
    a = branch.semi_transverse
    b = branch.semi_conjugate
    c = branch.half_focal
    d = 2.0 * c
    u = branch.axis_u.as_array()
    v = branch.axis_v.as_array()
    proj = _EYE - np.outer(u, u)  # d(u)/d(focus) scale, before 1/d
    r90_proj = _R90 @ proj
    vu = np.outer(v, u)
    cosh = np.cosh(ts)
    sinh = np.sinh(ts)
    out = np.empty((len(ts), 2, 2))
    out[:] = 0.5 * _EYE
    out += sign * (
        (a / d) * cosh[:, None, None] * proj
        + (c / (2.0 * b)) * sinh[:, None, None] * vu
        + (b / d) * sinh[:, None, None] * r90_proj
    )
    return out


def hyperbolic_jacobian(
    branch: HyperbolaBranch, point: Vec2, which_focus: str = "near"
) -> ArcJacobian:
    """Transpose Jacobian of an on-branch point with respect to one focus."""
    if which_focus not in ("near", "far"):
        raise ValueError(f"which_focus must be 'near' or 'far', got {which_focus!r}")
    if abs(branch.focal_residual(point)) > 1e-8:
        raise GeometryError(
            f"point is not on the branch (residual {branch.focal_residual(point):.3e})"
        )
    t = branch.param_of(point)
    sign = 1.0 if which_focus == "near" else -1.0
    jac = _branch_jacobians(branch, np.array([t]), sign)[0]
    return ArcJacobian(jac.T)


def _hyperbolic_flux(seg: BoundarySegment, phi: Density, sign: float) -> np.ndarray:
    """Integral of phi * (transpose Jacobian @ outward normal) over one arc."""
    arc = seg.curve
    if not isinstance(arc, HypArc):
        raise GeometryError("hyperbolic flux requires a hyperbolic arc")

    def g(us: np.ndarray) -> np.ndarray:
        ts = arc.param_many(us)
        pts = arc.point_many(us)
        vel = arc.velocity_many(us)
        n_ds = np.stack([vel[:, 1], -vel[:, 0]], axis=1)
        jac_t = _branch_jacobians(arc.branch, ts, sign).transpose(0, 2, 1)
        return density_many(phi, pts)[:, None] * np.einsum(
            "nkl,nl->nk", jac_t, n_ds
        )

    return adaptive_vec_quad(g, tol=1e-8)


def _control_for(
    agent_id: int,
    diagram: GvDiagram,
    sensed: Mapping[int, CellRegion],
    phi: Density,
    alpha: float,
    include_hyperbolic: bool,
) -> ControlVector:
    cell = sensed[agent_id]
    zero = Vec2(0.0, 0.0)
    if cell.is_empty:
        return ControlVector(zero, zero, {}, alpha, empty_sensed_cell=True)
    sensing = np.zeros(2)
    for seg in cell.segments():
        if seg.source == SensingBoundary(agent_id):
            sensing += arc_flux(seg, lambda pts: density_many(phi, pts))
    hyp_terms: dict[int, Vec2] = {}
    if include_hyperbolic:
        # the neighbor relation over surviving arcs is not symmetric: a third
        # agent's cut can swallow this cell's arc against j while j's mirror
        # arc survives, yet that mirror arc still moves when this agent does,
        # so the sweep must cover every cell, not just tagged neighbors
        acc: dict[int, np.ndarray] = {}
        for seg in cell.segments():
            src = seg.source
            if isinstance(src, HyperbolaEdge) and src.agent == agent_id:
                flux = _hyperbolic_flux(seg, phi, sign=1.0)
                acc[src.neighbor] = acc.get(src.neighbor, np.zeros(2)) + flux
        for j, other in sensed.items():
            if j == agent_id or other.is_empty:
                continue
            for seg in other.segments():
                if seg.source == HyperbolaEdge(j, agent_id):
                    flux = _hyperbolic_flux(seg, phi, sign=-1.0)
                    acc[j] = acc.get(j, np.zeros(2)) + flux
        hyp_terms = {j: Vec2.from_array(v) for j, v in sorted(acc.items())}
    total = sensing + sum(
        (t.as_array() for t in hyp_terms.values()), start=np.zeros(2)
    )
    return ControlVector(
        Vec2.from_array(alpha * total),
        Vec2.from_array(sensing),
        hyp_terms,
        alpha,
    )


def control_full(
    agent_id: int,
    agents: Sequence[AgentState],
    region: ConvexRegion,
    phi: Density,
    alpha: float = 1.0,
    diagram: GvDiagram | None = None,
    sensed: Mapping[int, CellRegion] | None = None,
) -> ControlVector:
    """Exact objective gradient for one agent, scaled by ``alpha``."""
    if diagram is None:
        diagram = gv_diagram(agents, region)
    if sensed is None:
        sensed = sensed_cells(diagram, agents)
    return _control_for(agent_id, diagram, sensed, phi, alpha, include_hyperbolic=True)


def control_suboptimal(
    agent_id: int,
    agents: Sequence[AgentState],
    region: ConvexRegion,
    phi: Density,
    alpha: float = 1.0,
    diagram: GvDiagram | None = None,
    sensed: Mapping[int, CellRegion] | None = None,
) -> ControlVector:
    """Sensing-circle term only: cheaper, ascent in practice but not exact."""
    if diagram is None:
        diagram = gv_diagram(agents, region)
    if sensed is None:
        sensed = sensed_cells(diagram, agents)
    return _control_for(agent_id, diagram, sensed, phi, alpha, include_hyperbolic=False)


def compute_controls(
    agents: Sequence[AgentState],
    region: ConvexRegion,
    phi: Density,
    alphas: Mapping[int, float] | float = 1.0,
    law: str = "full",
    diagram: GvDiagram | None = None,
    sensed: Mapping[int, CellRegion] | None = None,
) -> dict[int, ControlVector]:
    """Commands for every agent from a single shared partition build."""
    if law not in ("full", "suboptimal"):
        raise ValueError(f"unknown control law {law!r}")
    if diagram is None:
        diagram = gv_diagram(agents, region)
    if sensed is None:
        sensed = sensed_cells(diagram, agents)
    include = law == "full"
    out = {}
    for a in agents:
        alpha = alphas if isinstance(alphas, (int, float)) else alphas[a.id]
        out[a.id] = _control_for(
            a.id, diagram, sensed, phi, float(alpha), include_hyperbolic=include
        )
    return out


def fd_gradient(
    h_evaluator: Callable[[Sequence[AgentState]], float],
    agents: Sequence[AgentState],
    agent_id: int,
    step: float = 1e-5,
) -> Vec2:
    """Central finite difference of an objective evaluator in one agent's center."""
    from dataclasses import replace

    agents = list(agents)
    idx = next(k for k, a in enumerate(agents) if a.id == agent_id)

    def shifted(dx: float, dy: float) -> list[AgentState]:
        moved = replace(
            agents[idx],
            center=Vec2(agents[idx].center.x + dx, agents[idx].center.y + dy),
        )
        return agents[:idx] + [moved] + agents[idx + 1 :]

    gx = (h_evaluator(shifted(step, 0.0)) - h_evaluator(shifted(-step, 0.0))) / (2 * step)
    gy = (h_evaluator(shifted(0.0, step)) - h_evaluator(shifted(0.0, -step))) / (2 * step)
    return Vec2(gx, gy)
