"""1D Ising transfer-matrix observables, decimation RG remainders and synchronous spin dynamics."""

from .errors import DomainError, IsingRGError, NumericError, ResourceError, UnsupportedRegimeError
from .numerics import gauss_cdf, rank_to_spins, spin_rank, spin_table, xlogx
from .rgflow import (
    RemainderSeries,
    RgTrajectory,
    correlation_remainder,
    decay_rate_fit,
    decimation_oracle,
    observable_remainders,
    rg_trajectory,
    rgt_step,
    tail_ratios,
)
from .transfer import (
    BOUNDARIES,
    BoundaryLimitSet,
    Coupling,
    ObservableConstants,
    ObservableFn,
    ObservableOperator,
    TransferSpectrum,
    TwoPointObservable,
    boundary_limit_observables,
    brute_force_fixed_boundary_partition,
    brute_force_partition,
    correlation_two_point,
    finite_open_chain_observable,
    finite_ring_correlation,
    finite_ring_observable,
    fixed_boundary_partition,
    free_energy_density,
    observable_constants,
    observable_operator,
    partition_function,
    transfer_matrix,
    transfer_spectrum,
    two_point_observable,
)

__version__ = "0.1.0"
