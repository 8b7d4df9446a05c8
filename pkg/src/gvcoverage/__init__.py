"""Multi-robot area coverage with guaranteed Voronoi partitions.

Robots report positions with bounded error, so cell ownership is only
certain inside hyperbola-bounded guaranteed cells.  This package builds
those cells, evaluates the covered-mass objective over them, and drives
the robots with boundary-integral gradient commands until coverage
converges.
"""

from .geometry import (
    CellRegion,
    CircArc,
    Circle,
    ConvexRegion,
    GeometryError,
    HypArc,
    HyperbolaBranch,
    HyperbolaEdge,
    LineSeg,
    RegionBoundary,
    SensingBoundary,
    Vec2,
    arc_length,
    clip_disk,
    clip_halfplane,
    clip_halfregion_hyperbolic,
    line_integral,
    region_area,
)
from .partition import (
    AgentState,
    DegeneratePair,
    GvDiagram,
    PartitionError,
    candidate_neighbors,
    gv_cell,
    gv_diagram,
    pairwise_h_region,
)
from .coverage import (
    CallableDensity,
    CoverageError,
    CoverageReport,
    GridDensity,
    UniformDensity,
    density_at,
    guaranteed_sensing_disk,
    objective,
    sampled_objective,
    sensed_cell,
    sensed_cells,
)
from .control import (
    BoundaryDecomposition,
    ControlVector,
    boundary_decomposition,
    compute_controls,
    control_full,
    control_suboptimal,
    fd_gradient,
    hyperbolic_jacobian,
)
from .sim import (
    SimConfig,
    SimEvent,
    SimTrace,
    SimulationAbort,
    TraceRow,
    check_collision_free,
    run,
    step,
)
from .scenario import (
    OutputOptions,
    Scenario,
    ScenarioError,
    load_grid_density,
    parse_scenario,
    parse_scenario_file,
    parse_scenario_text,
    serialize_scenario,
)
from .svg import emit_svg_frame

__version__ = "0.1.0"

__all__ = [
    "AgentState",
    "BoundaryDecomposition",
    "CallableDensity",
    "CellRegion",
    "CircArc",
    "Circle",
    "ControlVector",
    "ConvexRegion",
    "CoverageError",
    "CoverageReport",
    "DegeneratePair",
    "GeometryError",
    "GridDensity",
    "GvDiagram",
    "HypArc",
    "HyperbolaBranch",
    "HyperbolaEdge",
    "LineSeg",
    "OutputOptions",
    "PartitionError",
    "RegionBoundary",
    "Scenario",
    "ScenarioError",
    "SensingBoundary",
    "SimConfig",
    "SimEvent",
    "SimTrace",
    "SimulationAbort",
    "TraceRow",
    "UniformDensity",
    "Vec2",
    "arc_length",
    "boundary_decomposition",
    "candidate_neighbors",
    "check_collision_free",
    "clip_disk",
    "clip_halfplane",
    "clip_halfregion_hyperbolic",
    "compute_controls",
    "control_full",
    "control_suboptimal",
    "density_at",
    "emit_svg_frame",
    "fd_gradient",
    "guaranteed_sensing_disk",
    "gv_cell",
    "gv_diagram",
    "line_integral",
    "load_grid_density",
    "objective",
    "parse_scenario",
    "parse_scenario_file",
    "parse_scenario_text",
    "region_area",
    "run",
    "sampled_objective",
    "sensed_cell",
    "sensed_cells",
    "serialize_scenario",
    "step",
    "__version__",
]
