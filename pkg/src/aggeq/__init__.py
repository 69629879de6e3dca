"""Measure-valued solvers for the nonlocal aggregation equation.

Sticky-particle dynamics for atomic data, a conservative 2-d finite-volume
scheme for general data, and exact optimal-transport diagnostics tying the
two together.
"""

from .config import RunConfig, load_config, parse_config
from .densities import gaussian_sum, quantize_density, three_bump, uniform_box
from .fv2d import (
    FvState,
    Grid2D,
    VelocityKernel,
    build_kernel,
    cfl_dt,
    compute_velocity,
    fv_diagnostics,
    fv_step,
    init_cells,
    state_to_measure,
)
from .measures import (
    DiscreteMeasure,
    interaction_energy,
    load_measure_csv,
    save_measure_csv,
    velocity_at,
)
from .particles import ParticleSystem, particle_rhs, simulate, step
from .potentials import Potential, absolute_value, mollify, morse
from .runner import RunReport, compare, contraction_test, load_report, run
from .transport import TransportPlan, quantile_coupling_1d, wasserstein2

__version__ = "0.1.0"

__all__ = [
    "DiscreteMeasure",
    "FvState",
    "Grid2D",
    "ParticleSystem",
    "Potential",
    "RunConfig",
    "RunReport",
    "TransportPlan",
    "VelocityKernel",
    "absolute_value",
    "build_kernel",
    "cfl_dt",
    "compare",
    "compute_velocity",
    "contraction_test",
    "fv_diagnostics",
    "fv_step",
    "gaussian_sum",
    "init_cells",
    "interaction_energy",
    "load_config",
    "load_measure_csv",
    "load_report",
    "mollify",
    "morse",
    "parse_config",
    "particle_rhs",
    "quantile_coupling_1d",
    "quantize_density",
    "run",
    "save_measure_csv",
    "simulate",
    "state_to_measure",
    "step",
    "three_bump",
    "uniform_box",
    "velocity_at",
    "wasserstein2",
]
