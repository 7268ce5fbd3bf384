"""Spatial exclusion vs point source diffusion.

Thin layer over the compiled ``_core`` module: analytic fluxes, the
initial-condition optimizer, mesh generation and full scenario runs.
"""

from ._core import (
    AssemblyError,
    FluxParams,
    GenerationError,
    InvalidInput,
    SolverError,
    classify_phi_sum,
    fundamental_solution,
    generate_mesh,
    optimize_ic,
    p0_from_continuity,
    p0_from_t0,
    phi1,
    phi2,
    phi_sum,
    phi_sum_derivative,
    run_config,
    run_scenario,
    scenarios,
)

__all__ = [
    "AssemblyError",
    "FluxParams",
    "GenerationError",
    "InvalidInput",
    "SolverError",
    "classify_phi_sum",
    "fundamental_solution",
    "generate_mesh",
    "optimize_ic",
    "p0_from_continuity",
    "p0_from_t0",
    "phi1",
    "phi2",
    "phi_sum",
    "phi_sum_derivative",
    "run_config",
    "run_scenario",
    "scenarios",
]
