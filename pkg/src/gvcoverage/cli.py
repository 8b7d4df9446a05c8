"""Command line front end.

Subcommands:

    run       simulate a scenario and write trace/coverage/SVG outputs
    diagram   render the initial partition of a scenario without simulating
    validate  parse a scenario and report the resulting configuration

Exit codes: 0 success, 1 usage error, 2 invalid scenario or input file,
3 simulation aborted (safety violation at runtime).
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path
from typing import Sequence

from .partition import AgentState, gv_diagram
from .coverage import sensed_cells
from .scenario import Scenario, ScenarioError, parse_scenario_file
from .sim import SimTrace, SimulationAbort, run
from .svg import emit_svg_frame

__all__ = ["main", "emit_trace_csv", "emit_coverage_csv"]


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse default exits 2; keep 2 for bad files
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _g(x: float) -> str:
    return format(x, ".15g")


def emit_trace_csv(trace: SimTrace, path: str | Path) -> None:
    """Full per-step state: positions and commands per agent, then the
    objective, covered fraction, unclaimed area, and closest approach."""
    cols = ["step", "t"]
    for aid in trace.agent_ids:
        cols += [f"x{aid}", f"y{aid}", f"ux{aid}", f"uy{aid}"]
    cols += ["H", "coverage_fraction", "neutral_area", "min_pairwise_dist"]
    lines = [",".join(cols)]
    for row in trace.rows:
        vals = [str(row.step), _g(row.t)]
        for p, u in zip(row.positions, row.controls):
            vals += [_g(p.x), _g(p.y), _g(u.x), _g(u.y)]
        vals += [
            _g(row.h),
            _g(row.coverage_fraction),
            _g(row.neutral_area),
            _g(row.min_pairwise_dist),
        ]
        lines.append(",".join(vals))
    Path(path).write_text("\n".join(lines) + "\n")


def emit_coverage_csv(trace: SimTrace, path: str | Path) -> None:
    lines = ["step,t,H,coverage_fraction"]
    for row in trace.rows:
        lines.append(
            f"{row.step},{_g(row.t)},{_g(row.h)},{_g(row.coverage_fraction)}"
        )
    Path(path).write_text("\n".join(lines) + "\n")


def _agents_at_row(scenario: Scenario, trace: SimTrace, row_index: int) -> list[AgentState]:
    row = trace.rows[row_index]
    frozen = {
        ev.immobilize
        for ev in scenario.config.events
        if ev.at_step <= row.step
    }
    out = []
    for agent, pos in zip(scenario.config.agents, row.positions):
        out.append(
            dataclasses.replace(agent, center=pos, mobile=agent.mobile and agent.id not in frozen)
        )
    return out


def _render_state(scenario: Scenario, agents: Sequence[AgentState], path: Path) -> None:
    diagram = gv_diagram(
        agents, scenario.config.region, strategy=scenario.config.candidate_strategy
    )
    sensed = sensed_cells(diagram, agents)
    emit_svg_frame(agents, diagram, path, sensed=sensed)


def _cmd_run(args: argparse.Namespace) -> int:
    scenario = parse_scenario_file(args.scenario)
    if args.law is not None:
        scenario = dataclasses.replace(
            scenario, config=dataclasses.replace(scenario.config, law=args.law)
        )
    out_dir = Path(args.out) if args.out else Path(scenario.outputs.directory)
    out_dir.mkdir(parents=True, exist_ok=True)

    trace = run(scenario.config)

    emit_trace_csv(trace, out_dir / "trace.csv")
    emit_coverage_csv(trace, out_dir / "coverage.csv")

    every = scenario.outputs.svg_every if args.svg_every is None else args.svg_every
    if every > 0:
        for k, row in enumerate(trace.rows):
            if row.step % every == 0:
                agents = _agents_at_row(scenario, trace, k)
                _render_state(scenario, agents, out_dir / f"frame_{row.step:06d}.svg")
    final_agents = _agents_at_row(scenario, trace, len(trace.rows) - 1)
    _render_state(scenario, final_agents, out_dir / "final.svg")

    last = trace.rows[-1]
    print(f"steps: {last.step}")
    print(f"converged: {'yes' if trace.converged else 'no'}")
    print(f"objective: {_g(last.h)}")
    print(f"coverage_fraction: {_g(last.coverage_fraction)}")
    print(f"outputs: {out_dir}")
    return 0


def _cmd_diagram(args: argparse.Namespace) -> int:
    scenario = parse_scenario_file(args.scenario)
    out = Path(args.out)
    if out.parent != Path(""):
        out.parent.mkdir(parents=True, exist_ok=True)
    _render_state(scenario, scenario.config.agents, out)
    print(f"wrote {out}")
    return 0


def _cmd_validate(args: argparse.Namespace) -> int:
    scenario = parse_scenario_file(args.scenario)
    cfg = scenario.config
    print(f"scenario ok: {args.scenario}")
    print(f"agents: {len(cfg.agents)}")
    print(f"law: {cfg.law}")
    print(f"dt: {_g(cfg.dt)}  max_steps: {cfg.max_steps}")
    print(f"events: {len(cfg.events)}")
    return 0


def _build_parser() -> _Parser:
    parser = _Parser(prog="gvcover", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="simulate a scenario and write outputs")
    p_run.add_argument("scenario", help="scenario file path")
    p_run.add_argument("--out", help="output directory (overrides [outputs] dir)")
    p_run.add_argument(
        "--law",
        choices=("full", "suboptimal"),
        default=None,
        help="command law (overrides [control] law)",
    )
    p_run.add_argument(
        "--svg-every",
        type=int,
        default=None,
        dest="svg_every",
        help="emit frame_NNNNNN.svg every N steps (overrides [outputs] svg_every)",
    )
    p_run.set_defaults(func=_cmd_run)

    p_diag = sub.add_parser("diagram", help="render the initial partition")
    p_diag.add_argument("scenario", help="scenario file path")
    p_diag.add_argument("--out", default="diagram.svg", help="output SVG path")
    p_diag.set_defaults(func=_cmd_diagram)

    p_val = sub.add_parser("validate", help="check a scenario file")
    p_val.add_argument("scenario", help="scenario file path")
    p_val.set_defaults(func=_cmd_validate)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ScenarioError as exc:
        print(f"gvcover: invalid scenario: {exc}", file=sys.stderr)
        return 2
    except SimulationAbort as exc:
        print(f"gvcover: simulation aborted: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
