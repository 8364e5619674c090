"""Equilibria, trajectories and stability of the perturbed restricted three-body problem."""

from .dynamics import IntegratorConfig, Termination, Trajectory, energy_drift_report, integrate, rhs
from .equilibria import LagrangePoint, PointIndex, locate_all, solve_collinear, solve_triangular, taylor_seed
from .model import (
    SUN_EARTH_MU,
    SUN_JUPITER_MU,
    State,
    SystemParams,
    grad_omega,
    hess_omega,
    jacobi_energy,
    make_params,
    mass_reduction_from_forces,
    oblateness_from_radii,
    omega,
)
from .stability import Perturbation, StabilityVerdict, classify, perturb_ic, sweep, sweep_direction, sweep_params

__version__ = "0.1.0"
