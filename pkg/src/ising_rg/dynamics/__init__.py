"""Synchronous sign-threshold spin dynamics on the ring."""

from .schedule import Schedule
from .window import (
    DynamicsParams,
    ThetaError,
    analytic_spectrum,
    build_theta,
    build_transfer_determined,
    coefficient_iteration,
    convergence_horizon,
    m_point_observable,
    new_spin_distribution,
    observable_from_distribution,
    site_update_probability,
    spectrum_check,
    decorrelated_limit,
    theta_error_bound,
    two_point_table,
)
from .ring import (
    EvolveResult,
    exact_ring_evolve,
    exact_ring_step,
    gibbs_initial_distribution,
    point_mass_distribution,
    ring_gibbs_weights,
    ring_kernel_table,
    site_marginal,
    window_marginal,
)
from .montecarlo import SimulationResult, gibbs_sample, mc_simulate, mc_step

__all__ = [
    "DynamicsParams",
    "EvolveResult",
    "Schedule",
    "SimulationResult",
    "ThetaError",
    "analytic_spectrum",
    "build_theta",
    "build_transfer_determined",
    "coefficient_iteration",
    "convergence_horizon",
    "exact_ring_evolve",
    "exact_ring_step",
    "gibbs_initial_distribution",
    "gibbs_sample",
    "m_point_observable",
    "mc_simulate",
    "mc_step",
    "new_spin_distribution",
    "observable_from_distribution",
    "point_mass_distribution",
    "ring_gibbs_weights",
    "ring_kernel_table",
    "site_marginal",
    "site_update_probability",
    "spectrum_check",
    "decorrelated_limit",
    "theta_error_bound",
    "two_point_table",
    "window_marginal",
]
