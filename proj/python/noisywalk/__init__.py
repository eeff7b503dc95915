"""Noisy coupled random walks on free groups and free semigroups.

Estimates are returned as dicts with the keys of the CSV schema:
rho, n, trials, seed, method, value, std_error, ci_low, ci_high.
"""

from ._core import (
    BudgetError,
    InputError,
    Measure,
    TruncationError,
    UnsupportedRegimeError,
    ValidationError,
    build_pi_rho,
    dimension_singularity_check,
    drift_free_group_srw,
    drift_mc,
    entropy_exact_curve,
    free_group_srw,
    free_semigroup_uniform,
    h_semigroup,
    h_semigroup_derivative,
    local_dimension,
    measure_from_json,
    parse_rho_grid,
    rho_sweep,
    shannon_pointwise,
    tv_exact,
    tv_lower_bound_mc,
    tv_semigroup,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
