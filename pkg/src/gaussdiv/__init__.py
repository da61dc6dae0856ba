"""Divisor-weighted averaging over the Gaussian integers: sieves, exponential
sums, circle-method multipliers, and maximal/oscillation experiments."""

from .gaussint import (
    GaussInt,
    ReducedRational,
    TorusPoint,
    dirichlet_approx,
    enumerate_Aq,
    enumerate_Bq,
    euclid_divmod,
    euler_phi,
    gcd,
    inner,
    norm,
    ramanujan_tau,
    reduced_rational,
)
from .arith import (
    DivisorTable,
    Sector,
    divisor_count_single,
    divisor_sieve,
    full_sector,
    lattice_count_sector,
    r2,
    r2_harmonic,
    r2_prefix,
    sector_divisor_sum,
    sierpinski_kappa,
    summatory_D,
    summatory_main_term,
)
from .expsum import (
    ExpSumResult,
    error_EN_avg,
    lattice_expsum,
    log_weighted_expsum,
    rational_main_term,
    rotation_avg_abs_expsum,
    weighted_expsum_direct,
    weighted_expsum_hyperbola,
)
from .circle import (
    ArcClass,
    K_hat,
    Kprime_hat,
    L_hat,
    M_hat,
    U_hat,
    V_hat,
    classify_arc,
    enumerate_Rs,
    eta,
    eta_s,
    f_tilde_hat,
    hi_hat,
    lo_hat,
    lo_kernel_spatial,
    ramanujan_moment,
)
from .operators import (
    DiskRegion,
    GridFunction,
    SparseFamily,
    apply_AN,
    greedy_sparse_certificate,
    improving_experiment,
    local_avg,
    maximal_Astar,
    oscillation_experiment,
    sharpness_experiment,
    sparse_form_eval,
    square_function_experiment,
    weighted_maximal_experiment,
)
from .report import ExperimentReport

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
