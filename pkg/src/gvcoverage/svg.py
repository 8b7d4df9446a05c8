"""Static SVG snapshots of a partition state.

One frame shows the workspace outline, every non-empty guaranteed cell,
the guaranteed sensing footprints, the uncertainty disks, and the reported
centers.  Curved boundary pieces are flattened by recursive bisection until
the chord sag is below a small fraction of the workspace diameter, so file
size stays proportional to visible detail.
"""

from __future__ import annotations

from pathlib import Path
from typing import Iterable, Sequence

from .geometry import BoundarySegment, CellRegion, Curve, LineSeg, Vec2
from .partition import AgentState, GvDiagram

__all__ = ["emit_svg_frame"]

_CELL_FILLS = (
    "#a6cee3", "#b2df8a", "#fdbf6f", "#cab2d6", "#fb9a99",
    "#ffff99", "#1f78b4", "#33a02c", "#ff7f00", "#6a3d9a",
)
_SENSED_FILL = "#2c7fb8"
_IMMOBILE_STROKE = "#d7191c"
_MARGIN_FRAC = 0.04


def _fmt(x: float) -> str:
    return format(x, ".6g")


def _flatten_curve(curve: Curve, sag_tol: float) -> list[Vec2]:
    """Polyline approximation, excluding the start point."""
    if isinstance(curve, LineSeg):
        return [curve.end_point]

    out: list[Vec2] = []

    def recurse(ua: float, ub: float, pa: Vec2, pb: Vec2, depth: int) -> None:
        um = 0.5 * (ua + ub)
        pm = curve.point(um)
        chord_mid = Vec2(0.5 * (pa.x + pb.x), 0.5 * (pa.y + pb.y))
        if depth >= 12 or pm.dist(chord_mid) <= sag_tol:
            out.append(pm)
            out.append(pb)
            return
        recurse(ua, um, pa, pm, depth + 1)
        recurse(um, ub, pm, pb, depth + 1)

    recurse(0.0, 1.0, curve.point(0.0), curve.point(1.0), 0)
    return out


def _loop_path(loop: Sequence[BoundarySegment], sag_tol: float) -> str:
    start = loop[0].start_point
    cmds = [f"M {_fmt(start.x)} {_fmt(start.y)}"]
    for seg in loop:
        for p in _flatten_curve(seg.curve, sag_tol):
            cmds.append(f"L {_fmt(p.x)} {_fmt(p.y)}")
    cmds.append("Z")
    return " ".join(cmds)


def _cell_path(cell: CellRegion, sag_tol: float, style: str) -> str:
    d = " ".join(_loop_path(loop, sag_tol) for loop in cell.loops)
    return f'<path d="{d}" {style}/>'


def _cell_polygons(cell: CellRegion, sag_tol: float, style: str) -> list[str]:
    # fills only, no stroke: keeps <path> reserved for boundary curves
    out = []
    for loop in cell.loops:
        pts = [loop[0].start_point]
        for seg in loop:
            pts.extend(_flatten_curve(seg.curve, sag_tol))
        coords = " ".join(f"{_fmt(p.x)},{_fmt(p.y)}" for p in pts)
        out.append(f'<polygon points="{coords}" {style}/>')
    return out


def emit_svg_frame(
    agents: Sequence[AgentState],
    diagram: GvDiagram,
    path: str | Path,
    sensed: dict[int, CellRegion] | None = None,
) -> None:
    """Write one SVG snapshot of the current partition to ``path``."""
    region = diagram.region
    x0, y0, x1, y1 = region.bbox()
    span = max(x1 - x0, y1 - y0)
    margin = _MARGIN_FRAC * span
    sag_tol = 0.002 * region.diameter
    width = (x1 - x0) + 2.0 * margin
    height = (y1 - y0) + 2.0 * margin
    stroke = max(0.002 * span, 1e-6)

    parts: list[str] = []
    parts.append(
        '<svg xmlns="http://www.w3.org/2000/svg" '
        f'viewBox="0 0 {_fmt(width)} {_fmt(height)}" '
        f'width="720" height="{_fmt(720.0 * height / width)}">'
    )
    # image y grows downward; flip so the workspace keeps its own handedness
    parts.append(
        f'<g transform="translate({_fmt(margin - x0)},{_fmt(y1 + margin)}) scale(1,-1)">'
    )

    outline = " ".join(
        f"{'M' if k == 0 else 'L'} {_fmt(v.x)} {_fmt(v.y)}"
        for k, v in enumerate(region.vertices)
    )
    parts.append(
        f'<path d="{outline} Z" fill="#ffffff" stroke="#222222" '
        f'stroke-width="{_fmt(2 * stroke)}"/>'
    )

    for agent in agents:
        cell = diagram.cells.get(agent.id)
        if cell is None or cell.is_empty:
            continue
        fill = _CELL_FILLS[agent.id % len(_CELL_FILLS)]
        style = (
            f'fill="{fill}" fill-opacity="0.45" stroke="#444444" '
            f'stroke-width="{_fmt(stroke)}"'
        )
        parts.append(_cell_path(cell, sag_tol, style))

    if sensed:
        for agent in agents:
            sub = sensed.get(agent.id)
            if sub is None or sub.is_empty:
                continue
            style = f'fill="{_SENSED_FILL}" fill-opacity="0.30" stroke="none"'
            parts.extend(_cell_polygons(sub, sag_tol, style))

    for agent in agents:
        ring = _IMMOBILE_STROKE if not agent.mobile else "#555555"
        parts.append(
            f'<circle cx="{_fmt(agent.center.x)}" cy="{_fmt(agent.center.y)}" '
            f'r="{_fmt(agent.r_s - agent.r_u)}" fill="none" stroke="{ring}" '
            f'stroke-width="{_fmt(stroke)}" stroke-dasharray="{_fmt(4 * stroke)}"/>'
        )
        if agent.r_u > 0.0:
            parts.append(
                f'<circle cx="{_fmt(agent.center.x)}" cy="{_fmt(agent.center.y)}" '
                f'r="{_fmt(agent.r_u)}" fill="#000000" fill-opacity="0.15" '
                f'stroke="{ring}" stroke-width="{_fmt(stroke)}"/>'
            )
        parts.append(
            f'<circle cx="{_fmt(agent.center.x)}" cy="{_fmt(agent.center.y)}" '
            f'r="{_fmt(1.5 * stroke)}" fill="{ring}"/>'
        )

    parts.append("</g>")
    parts.append("</svg>")
    Path(path).write_text("\n".join(parts) + "\n")
