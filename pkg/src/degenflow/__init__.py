"""Finite-volume runs and entropy-solution checks for a degenerate
advection-diffusion problem on a product rectangle.

The flow of a typical session: describe the problem with a scenario
file or the ``model`` factories, advance it with ``solver.run``, then
hold the result against the solution-structure checks in ``verify``
and the boundary diagnostics in ``trace``.
"""

from .domain import (
    DeformationLayer,
    Grid,
    GridSpec,
    boundary_layer,
    build_grid,
    deformation_layers,
)
from .model import (
    BumpEdge,
    BumpField,
    ConstantEdge,
    ConstantField,
    ModelError,
    NondegeneracyScan,
    ProblemSpec,
    StepField,
    ValidationResult,
    beta22_table,
    check_structure,
    degenerate_fraction,
    nondegeneracy_scan,
    pinned,
    sqrt_diffusion,
    tadmor_tao,
    validate_ellipticity,
    validate_flux_pinning,
)
from .scenario import (
    Scenario,
    ScenarioError,
    build_problem,
    build_problem_b,
    parse_scenario,
    serialize_scenario,
)
from .solver import (
    RunArtifacts,
    SolverConfig,
    SolverError,
    StaticProblemError,
    SweepRow,
    l1_distance,
    run,
    stable_dt,
    step,
    viscosity_continuation,
)
from .trace import (
    TraceProfile,
    boundary_layer_pairing,
    extract_trace_profile,
    gauss_green_refinement,
    gauss_green_residual,
    time_zero_trace,
)
from .verify import (
    ALL_CHECKS,
    CheckEntry,
    VerificationReport,
    check_contraction,
    check_max_principle,
    run_verification,
)

__version__ = "0.1.0"

__all__ = [
    "ALL_CHECKS",
    "BumpEdge",
    "BumpField",
    "CheckEntry",
    "ConstantEdge",
    "ConstantField",
    "DeformationLayer",
    "Grid",
    "GridSpec",
    "ModelError",
    "NondegeneracyScan",
    "ProblemSpec",
    "RunArtifacts",
    "Scenario",
    "ScenarioError",
    "SolverConfig",
    "SolverError",
    "StaticProblemError",
    "StepField",
    "SweepRow",
    "TraceProfile",
    "ValidationResult",
    "VerificationReport",
    "beta22_table",
    "boundary_layer",
    "boundary_layer_pairing",
    "build_grid",
    "build_problem",
    "build_problem_b",
    "check_contraction",
    "check_max_principle",
    "check_structure",
    "deformation_layers",
    "degenerate_fraction",
    "extract_trace_profile",
    "gauss_green_refinement",
    "gauss_green_residual",
    "l1_distance",
    "nondegeneracy_scan",
    "parse_scenario",
    "pinned",
    "run",
    "run_verification",
    "serialize_scenario",
    "sqrt_diffusion",
    "stable_dt",
    "step",
    "tadmor_tao",
    "time_zero_trace",
    "validate_ellipticity",
    "validate_flux_pinning",
    "viscosity_continuation",
]
