"""Synchronous simulation loop: snapshot, commands, explicit Euler update.

All agents compute commands from the same partition snapshot and move
simultaneously.  Immobilised agents keep sensing and keep their cell but
ignore their command.  The loop is deterministic: identical configurations
produce identical traces bit for bit.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Sequence

from .geometry import ConvexRegion, Vec2
from .partition import AgentState, gv_diagram
from .coverage import Density, UniformDensity, objective, sensed_cells
from .control import ControlVector, compute_controls

__all__ = [
    "SimulationAbort",
    "SimEvent",
    "SimConfig",
    "TraceRow",
    "SimTrace",
    "step",
    "run",
    "check_collision_free",
]

log = logging.getLogger(__name__)


class SimulationAbort(RuntimeError):
    """The run reached a physically inconsistent state and stopped."""


@dataclass(frozen=True)
class SimEvent:
    """Immobilise one agent at the start of the given step."""

    at_step: int
    immobilize: int


@dataclass(frozen=True)
class SimConfig:
    region: ConvexRegion
    agents: tuple[AgentState, ...]
    dt: float = 0.01
    max_steps: int = 2000
    law: str = "full"
    alpha: tuple[float, ...] = ()
    convergence_eps: float = 1e-4
    phi: Density = UniformDensity(1.0)
    events: tuple[SimEvent, ...] = ()
    rng_seed: int = 0
    candidate_strategy: str = "all_pairs"

    def __post_init__(self) -> None:
        if not self.agents:
            raise ValueError("a simulation needs at least one agent")
        if not (math.isfinite(self.dt) and self.dt > 0.0):
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.max_steps < 1:
            raise ValueError(f"max_steps must be >= 1, got {self.max_steps}")
        if self.law not in ("full", "suboptimal"):
            raise ValueError(f"law must be 'full' or 'suboptimal', got {self.law!r}")
        if math.isnan(self.convergence_eps) or self.convergence_eps < 0.0:
            raise ValueError(f"convergence_eps must be >= 0, got {self.convergence_eps}")
        alpha = self.alpha if self.alpha else tuple(1.0 for _ in self.agents)
        if len(alpha) != len(self.agents):
            raise ValueError(
                f"alpha needs one entry per agent ({len(self.agents)}), got {len(alpha)}"
            )
        if any(not math.isfinite(a) or a <= 0.0 for a in alpha):
            raise ValueError("every alpha must be positive and finite")
        object.__setattr__(self, "alpha", tuple(float(a) for a in alpha))
        ids = {a.id for a in self.agents}
        for ev in self.events:
            if ev.at_step < 0 or ev.at_step >= self.max_steps:
                raise ValueError(
                    f"event step {ev.at_step} outside [0, {self.max_steps})"
                )
            if ev.immobilize not in ids:
                raise ValueError(f"event names unknown agent {ev.immobilize}")
        for a in self.agents:
            if not self.region.contains(a.center):
                raise ValueError(f"agent {a.id} starts outside the workspace")
        for k, a in enumerate(self.agents):
            for b in self.agents[k + 1 :]:
                d = a.center.dist(b.center)
                if d <= a.r_u + b.r_u:
                    raise ValueError(
                        f"agents {a.id} and {b.id} start with overlapping "
                        f"uncertainty disks (distance {d:.6g})"
                    )

    def alpha_of(self) -> dict[int, float]:
        return {a.id: al for a, al in zip(self.agents, self.alpha)}


@dataclass(frozen=True)
class TraceRow:
    step: int
    t: float
    positions: tuple[Vec2, ...]
    controls: tuple[Vec2, ...]
    h: float
    coverage_fraction: float
    neutral_area: float
    min_pairwise_dist: float


@dataclass
class SimTrace:
    agent_ids: tuple[int, ...]
    rows: list[TraceRow] = field(default_factory=list)
    converged: bool = False

    @property
    def final(self) -> TraceRow:
        return self.rows[-1]


def _min_pairwise(agents: Sequence[AgentState]) -> float:
    best = math.inf
    for k, a in enumerate(agents):
        for b in agents[k + 1 :]:
            best = min(best, a.center.dist(b.center))
    return best


def _apply_events(
    agents: tuple[AgentState, ...], config: SimConfig, at_step: int
) -> tuple[AgentState, ...]:
    frozen = {ev.immobilize for ev in config.events if ev.at_step == at_step}
    if not frozen:
        return agents
    return tuple(
        replace(a, mobile=False) if a.id in frozen else a for a in agents
    )


def _advance(
    agents: tuple[AgentState, ...],
    config: SimConfig,
    controls: dict[int, ControlVector],
) -> tuple[AgentState, ...]:
    moved = []
    for a in agents:
        if not a.mobile:
            moved.append(a)
            continue
        u = controls[a.id].u
        nxt = Vec2(a.center.x + config.dt * u.x, a.center.y + config.dt * u.y)
        moved.append(replace(a, center=nxt))
    moved = tuple(moved)
    for k, a in enumerate(moved):
        if a.mobile and not config.region.contains(a.center):
            log.warning("agent %d left the workspace at (%g, %g)", a.id, a.center.x, a.center.y)
        for b in moved[k + 1 :]:
            d = a.center.dist(b.center)
            if d < 1e-12:
                raise SimulationAbort(
                    f"agents {a.id} and {b.id} reached coincident centers"
                )
            if d < a.r_u + b.r_u:
                raise SimulationAbort(
                    f"uncertainty disks of agents {a.id} and {b.id} overlap "
                    f"(distance {d:.6g} < {a.r_u + b.r_u:.6g})"
                )
    return moved


def step(state: Sequence[AgentState], config: SimConfig) -> tuple[AgentState, ...]:
    """One synchronous update of every mobile agent from a shared snapshot."""
    agents = tuple(state)
    diagram = gv_diagram(agents, config.region, strategy=config.candidate_strategy)
    sensed = sensed_cells(diagram, agents)
    controls = compute_controls(
        agents,
        config.region,
        config.phi,
        alphas=config.alpha_of(),
        law=config.law,
        diagram=diagram,
        sensed=sensed,
    )
    return _advance(agents, config, controls)


def run(config: SimConfig) -> SimTrace:
    """Iterate until every mobile agent's command drops below the threshold
    or the step budget runs out.  Records one row per evaluated step."""
    agents = config.agents
    trace = SimTrace(agent_ids=tuple(a.id for a in agents))
    for k in range(config.max_steps):
        agents = _apply_events(agents, config, k)
        diagram = gv_diagram(agents, config.region, strategy=config.candidate_strategy)
        sensed = sensed_cells(diagram, agents)
        controls = compute_controls(
            agents,
            config.region,
            config.phi,
            alphas=config.alpha_of(),
            law=config.law,
            diagram=diagram,
            sensed=sensed,
        )
        report = objective(agents, config.region, config.phi, diagram=diagram)
        trace.rows.append(
            TraceRow(
                step=k,
                t=k * config.dt,
                positions=tuple(a.center for a in agents),
                controls=tuple(controls[a.id].u for a in agents),
                h=report.total_h,
                coverage_fraction=report.coverage_fraction,
                neutral_area=diagram.neutral_area,
                min_pairwise_dist=_min_pairwise(agents),
            )
        )
        residual = max(
            (controls[a.id].u.norm() for a in agents if a.mobile), default=0.0
        )
        if residual < config.convergence_eps:
            trace.converged = True
            break
        agents = _advance(agents, config, controls)
    return trace


def check_collision_free(trace: SimTrace, r_u: float) -> bool:
    """True when reported centers always stayed farther apart than two
    uncertainty radii, so no pair of true positions can ever have met."""
    return all(row.min_pairwise_dist > 2.0 * r_u for row in trace.rows)
