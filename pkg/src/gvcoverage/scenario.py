"""Scenario files: a flat sectioned text format describing one simulation.

Grammar (one statement per line, ``#`` starts a comment, blank lines ignored)::

    [section]
    key = value

Sections and keys:

    [region]   vertices = x,y ; x,y ; ...          workspace polygon (CCW)
    [agents]   centers  = x,y ; x,y ; ...          explicit reported centers
               count / seed / spawn_box = x0,y0,x1,y1   or randomised placement
    [radii]    r_u = <float>   r_s = <float>       shared uncertainty / sensing radii
    [control]  law = full | suboptimal             command law (default full)
               alpha = <float> [; <float> ...]     gain, shared or per agent
    [sim]      dt, max_steps, convergence_eps
    [phi]      uniform = <float>  |  grid = <path> importance density
    [events]   immobilize = step:agent ; ...
    [outputs]  dir = <path>   svg_every = <int>

Unknown sections or keys are rejected.  All numeric constraints are enforced
at parse time and violations are reported with the offending line number.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .geometry import ConvexRegion, GeometryError, Vec2
from .partition import AgentState, PartitionError
from .coverage import CoverageError, Density, GridDensity, UniformDensity
from .sim import SimConfig, SimEvent

__all__ = [
    "ScenarioError",
    "OutputOptions",
    "Scenario",
    "parse_scenario",
    "parse_scenario_file",
    "parse_scenario_text",
    "serialize_scenario",
    "load_grid_density",
]

_SECTIONS = {
    "region": {"vertices"},
    "agents": {"centers", "count", "seed", "spawn_box"},
    "radii": {"r_u", "r_s"},
    "control": {"law", "alpha"},
    "sim": {"dt", "max_steps", "convergence_eps"},
    "phi": {"uniform", "grid"},
    "events": {"immobilize"},
    "outputs": {"dir", "svg_every"},
}


class ScenarioError(ValueError):
    """Malformed or inconsistent scenario input."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


@dataclass(frozen=True)
class OutputOptions:
    directory: str = "out"
    svg_every: int = 0


@dataclass(frozen=True)
class Scenario:
    config: SimConfig
    outputs: OutputOptions
    phi_spec: tuple[str, str]  # ("uniform", value) or ("grid", path)


def _parse_sections(text: str) -> dict[str, dict[str, tuple[str, int]]]:
    sections: dict[str, dict[str, tuple[str, int]]] = {}
    current: str | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ScenarioError("unterminated section header", lineno)
            name = line[1:-1].strip()
            if name not in _SECTIONS:
                raise ScenarioError(f"unknown section [{name}]", lineno)
            current = name
            sections.setdefault(name, {})
            continue
        if "=" not in line:
            raise ScenarioError("expected 'key = value'", lineno)
        if current is None:
            raise ScenarioError("statement outside any [section]", lineno)
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _SECTIONS[current]:
            raise ScenarioError(f"unknown key '{key}' in section [{current}]", lineno)
        if key in sections[current]:
            raise ScenarioError(f"duplicate key '{key}' in section [{current}]", lineno)
        sections[current][key] = (value, lineno)
    return sections


def _want(sections, section: str, key: str) -> tuple[str, int]:
    if section not in sections:
        raise ScenarioError(f"missing required section [{section}]")
    if key not in sections[section]:
        raise ScenarioError(f"missing required key '{key}' in section [{section}]")
    return sections[section][key]


def _float(value: str, line: int, what: str) -> float:
    try:
        return float(value)
    except ValueError:
        raise ScenarioError(f"{what}: expected a number, got {value!r}", line)


def _int(value: str, line: int, what: str) -> int:
    try:
        return int(value)
    except ValueError:
        raise ScenarioError(f"{what}: expected an integer, got {value!r}", line)


def _pairs(value: str, line: int, what: str) -> list[Vec2]:
    out = []
    for item in value.split(";"):
        item = item.strip()
        if not item:
            continue
        parts = [p for p in item.replace(",", " ").split() if p]
        if len(parts) != 2:
            raise ScenarioError(f"{what}: expected 'x,y' pairs, got {item!r}", line)
        out.append(Vec2(_float(parts[0], line, what), _float(parts[1], line, what)))
    if not out:
        raise ScenarioError(f"{what}: no coordinate pairs given", line)
    return out


def _spawn_agents(
    count: int,
    seed: int,
    box: tuple[float, float, float, float],
    region: ConvexRegion,
    r_u: float,
    r_s: float,
    line: int,
) -> list[AgentState]:
    rng = np.random.default_rng(seed)
    x0, y0, x1, y1 = box
    centers: list[Vec2] = []
    attempts = 0
    while len(centers) < count:
        attempts += 1
        if attempts > 20000:
            raise ScenarioError(
                "could not place agents with disjoint uncertainty disks inside "
                "the workspace; enlarge spawn_box or reduce count",
                line,
            )
        p = Vec2(float(rng.uniform(x0, x1)), float(rng.uniform(y0, y1)))
        if not region.contains(p):
            continue
        if all(p.dist(q) > 2.0 * r_u + 1e-6 for q in centers):
            centers.append(p)
    return [AgentState(k, c, r_u, r_s) for k, c in enumerate(centers)]


def load_grid_density(path: str | Path) -> GridDensity:
    """Read a plain-text sample grid: 'width height', then 'x0 y0 x1 y1',
    then width*height values row major with row 0 at the bottom."""
    path = Path(path)
    try:
        tokens = path.read_text().split()
    except OSError as exc:
        raise ScenarioError(f"cannot read density grid {path}: {exc}")
    if len(tokens) < 6:
        raise ScenarioError(f"density grid {path}: truncated header")
    try:
        width, height = int(tokens[0]), int(tokens[1])
        x0, y0, x1, y1 = (float(t) for t in tokens[2:6])
        values = [float(t) for t in tokens[6:]]
    except ValueError as exc:
        raise ScenarioError(f"density grid {path}: {exc}")
    if width < 1 or height < 1:
        raise ScenarioError(f"density grid {path}: dimensions must be positive")
    if len(values) != width * height:
        raise ScenarioError(
            f"density grid {path}: expected {width * height} values, got {len(values)}"
        )
    rows = tuple(
        tuple(values[r * width : (r + 1) * width]) for r in range(height)
    )
    try:
        return GridDensity(x0, y0, x1, y1, rows, source_path=str(path))
    except CoverageError as exc:
        raise ScenarioError(f"density grid {path}: {exc}")


def parse_scenario_text(text: str, base_dir: Path | None = None) -> Scenario:
    sections = _parse_sections(text)
    base_dir = base_dir or Path.cwd()

    value, line = _want(sections, "region", "vertices")
    vertices = _pairs(value, line, "[region] vertices")
    try:
        region = ConvexRegion(tuple(vertices))
    except GeometryError as exc:
        raise ScenarioError(f"[region] vertices: {exc}", line)

    value, line = _want(sections, "radii", "r_u")
    r_u = _float(value, line, "[radii] r_u")
    if r_u < 0.0:
        raise ScenarioError(f"[radii] r_u must be >= 0, got {r_u}", line)
    value, line = _want(sections, "radii", "r_s")
    r_s = _float(value, line, "[radii] r_s")
    if r_s <= r_u:
        raise ScenarioError(f"[radii] r_s must exceed r_u={r_u}, got {r_s}", line)

    agents_sec = sections.get("agents", {})
    rng_seed = 0
    if "centers" in agents_sec and "count" in agents_sec:
        raise ScenarioError(
            "section [agents] takes either 'centers' or 'count', not both",
            agents_sec["count"][1],
        )
    if "centers" in agents_sec:
        value, line = agents_sec["centers"]
        centers = _pairs(value, line, "[agents] centers")
        try:
            agents = [AgentState(k, c, r_u, r_s) for k, c in enumerate(centers)]
        except PartitionError as exc:
            raise ScenarioError(f"[agents] centers: {exc}", line)
        if "seed" in agents_sec:
            rng_seed = _int(*agents_sec["seed"], "[agents] seed")
    elif "count" in agents_sec:
        value, line = agents_sec["count"]
        count = _int(value, line, "[agents] count")
        if count < 1:
            raise ScenarioError(f"[agents] count must be >= 1, got {count}", line)
        seed_v, seed_line = _want(sections, "agents", "seed")
        rng_seed = _int(seed_v, seed_line, "[agents] seed")
        box_v, box_line = _want(sections, "agents", "spawn_box")
        parts = [p for p in box_v.replace(",", " ").split() if p]
        if len(parts) != 4:
            raise ScenarioError(
                f"[agents] spawn_box: expected 'x0,y0,x1,y1', got {box_v!r}", box_line
            )
        box = tuple(_float(p, box_line, "[agents] spawn_box") for p in parts)
        if box[2] <= box[0] or box[3] <= box[1]:
            raise ScenarioError("[agents] spawn_box has non-positive extent", box_line)
        agents = _spawn_agents(count, rng_seed, box, region, r_u, r_s, box_line)
        line = box_line
    else:
        raise ScenarioError("section [agents] needs either 'centers' or 'count'")
    agents_line = line

    control_sec = sections.get("control", {})
    law = "full"
    if "law" in control_sec:
        value, line = control_sec["law"]
        law = value.strip()
        if law not in ("full", "suboptimal"):
            raise ScenarioError(
                f"[control] law must be 'full' or 'suboptimal', got {law!r}", line
            )
    alphas: tuple[float, ...] = ()
    if "alpha" in control_sec:
        value, line = control_sec["alpha"]
        parts = [p.strip() for p in value.split(";") if p.strip()]
        vals = [_float(p, line, "[control] alpha") for p in parts]
        if any(v <= 0.0 for v in vals):
            raise ScenarioError("[control] alpha entries must be positive", line)
        if len(vals) == 1:
            alphas = tuple(vals[0] for _ in agents)
        elif len(vals) == len(agents):
            alphas = tuple(vals)
        else:
            raise ScenarioError(
                f"[control] alpha needs 1 or {len(agents)} entries, got {len(vals)}",
                line,
            )

    sim_sec = sections.get("sim", {})
    dt = 0.01
    if "dt" in sim_sec:
        value, line = sim_sec["dt"]
        dt = _float(value, line, "[sim] dt")
        if not (math.isfinite(dt) and dt > 0.0):
            raise ScenarioError(f"[sim] dt must be positive, got {dt}", line)
    max_steps = 2000
    if "max_steps" in sim_sec:
        value, line = sim_sec["max_steps"]
        max_steps = _int(value, line, "[sim] max_steps")
        if max_steps < 1:
            raise ScenarioError(f"[sim] max_steps must be >= 1, got {max_steps}", line)
    convergence_eps = 1e-4
    if "convergence_eps" in sim_sec:
        value, line = sim_sec["convergence_eps"]
        convergence_eps = _float(value, line, "[sim] convergence_eps")
        if math.isnan(convergence_eps) or convergence_eps < 0.0:
            raise ScenarioError(
                f"[sim] convergence_eps must be >= 0, got {convergence_eps}", line
            )

    phi_sec = sections.get("phi", {})
    if "uniform" in phi_sec and "grid" in phi_sec:
        raise ScenarioError(
            "[phi] must give either 'uniform' or 'grid', not both",
            phi_sec["grid"][1],
        )
    if "grid" in phi_sec:
        value, line = phi_sec["grid"]
        grid_path = Path(value)
        if not grid_path.is_absolute():
            grid_path = base_dir / grid_path
        phi: Density = load_grid_density(grid_path)
        phi_spec = ("grid", value)
    else:
        uniform_value = 1.0
        if "uniform" in phi_sec:
            value, line = phi_sec["uniform"]
            uniform_value = _float(value, line, "[phi] uniform")
            if uniform_value < 0.0:
                raise ScenarioError(
                    f"[phi] uniform must be >= 0, got {uniform_value}", line
                )
        phi = UniformDensity(uniform_value)
        phi_spec = ("uniform", repr(uniform_value))

    events: list[SimEvent] = []
    if "events" in sections and "immobilize" in sections["events"]:
        value, line = sections["events"]["immobilize"]
        for item in value.split(";"):
            item = item.strip()
            if not item:
                continue
            if ":" not in item:
                raise ScenarioError(
                    f"[events] immobilize: expected 'step:agent', got {item!r}", line
                )
            step_s, agent_s = item.split(":", 1)
            ev = SimEvent(
                at_step=_int(step_s.strip(), line, "[events] immobilize step"),
                immobilize=_int(agent_s.strip(), line, "[events] immobilize agent"),
            )
            if ev.at_step < 0 or ev.at_step >= max_steps:
                raise ScenarioError(
                    f"[events] immobilize step {ev.at_step} outside [0, {max_steps})",
                    line,
                )
            if ev.immobilize not in {a.id for a in agents}:
                raise ScenarioError(
                    f"[events] immobilize names unknown agent {ev.immobilize}", line
                )
            events.append(ev)

    out_sec = sections.get("outputs", {})
    directory = out_sec.get("dir", ("out", 0))[0]
    svg_every = 0
    if "svg_every" in out_sec:
        value, line = out_sec["svg_every"]
        svg_every = _int(value, line, "[outputs] svg_every")
        if svg_every < 0:
            raise ScenarioError(f"[outputs] svg_every must be >= 0, got {svg_every}", line)

    try:
        config = SimConfig(
            region=region,
            agents=tuple(agents),
            dt=dt,
            max_steps=max_steps,
            law=law,
            alpha=alphas,
            convergence_eps=convergence_eps,
            phi=phi,
            events=tuple(events),
            rng_seed=rng_seed,
        )
    except ValueError as exc:
        raise ScenarioError(str(exc), agents_line)
    return Scenario(config, OutputOptions(directory, svg_every), phi_spec)


def parse_scenario_file(path: str | Path) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario {path}: {exc}")
    return parse_scenario_text(text, base_dir=path.parent)


def parse_scenario(path: str | Path) -> SimConfig:
    """Parse a scenario file down to its simulation configuration."""
    return parse_scenario_file(path).config


def _fmt(x: float) -> str:
    # repr round-trips float64 exactly, which keeps reparse == original
    return repr(float(x))


def serialize_scenario(scenario: Scenario) -> str:
    """Render a scenario back to text; reparsing yields an equal SimConfig."""
    cfg = scenario.config
    lines = ["[region]"]
    lines.append(
        "vertices = " + " ; ".join(f"{_fmt(v.x)},{_fmt(v.y)}" for v in cfg.region.vertices)
    )
    lines.append("")
    lines.append("[agents]")
    lines.append(
        "centers = " + " ; ".join(f"{_fmt(a.center.x)},{_fmt(a.center.y)}" for a in cfg.agents)
    )
    lines.append(f"seed = {cfg.rng_seed}")
    lines.append("")
    lines.append("[radii]")
    lines.append(f"r_u = {_fmt(cfg.agents[0].r_u)}")
    lines.append(f"r_s = {_fmt(cfg.agents[0].r_s)}")
    lines.append("")
    lines.append("[control]")
    lines.append(f"law = {cfg.law}")
    lines.append("alpha = " + " ; ".join(_fmt(a) for a in cfg.alpha))
    lines.append("")
    lines.append("[sim]")
    lines.append(f"dt = {_fmt(cfg.dt)}")
    lines.append(f"max_steps = {cfg.max_steps}")
    lines.append(f"convergence_eps = {_fmt(cfg.convergence_eps)}")
    lines.append("")
    lines.append("[phi]")
    kind, spec = scenario.phi_spec
    lines.append(f"{kind} = {spec}")
    if cfg.events:
        lines.append("")
        lines.append("[events]")
        lines.append(
            "immobilize = "
            + " ; ".join(f"{ev.at_step}:{ev.immobilize}" for ev in cfg.events)
        )
    lines.append("")
    lines.append("[outputs]")
    lines.append(f"dir = {scenario.outputs.directory}")
    lines.append(f"svg_every = {scenario.outputs.svg_every}")
    lines.append("")
    return "\n".join(lines)
