"""Spectral-profile toolkit for finite Markov chains.

Computes spectral and conductance profiles, evaluates upper and lower
mixing-time bounds built from them (and from spectral-gap, log-Sobolev,
Nash, volume-growth and local-Poincare inputs), and validates everything
against exact L^p mixing times measured on dense heat kernels.
"""

from .bounds import (
    BoundReport,
    MassScale,
    delta_regularity,
    dsc_moderate_growth_lower,
    heat_diag_lower,
    l2_decay_upper,
    mass_scale,
    profile_integral,
    tau_discrete_conductance,
    tau_discrete_upper,
    tau_discrete_upper_symmetrized,
    tau_lower_anti_fk,
    tau_lower_spectral_gap,
    tau_upper_combined,
    tau_upper_conductance,
    tau_upper_spectral,
    tau_upper_spectral_gap,
)
from .chain import (
    HeatKernelSnapshot,
    MarkovChain,
    add_laziness,
    adjoint,
    adjoint_kernel,
    build_chain,
    dirichlet_form,
    discrete_power,
    heat_kernel,
    multiplicative_symmetrizations,
    remove_laziness,
    variance,
)
from .exact import (
    DistanceCurve,
    distance_curve,
    exact_tau,
    lp_distance,
    worst_start_distance,
)
from .formats import (
    chain_from_edge_csv,
    chain_from_json,
    chain_to_json,
    load_chain,
    load_chain_any,
    save_chain,
)
from .profiles import (
    GrowthData,
    SpectralProfileBand,
    StepProfile,
    anti_fk_profile,
    ball_family,
    cheeger_envelopes,
    conductance_lower_envelope,
    conductance_profile,
    estimate_logsob,
    growth_data,
    logsob_profile_bound,
    merge_max,
    moderate_growth_check,
    nash_profile_bound,
    poincare_profile_bound,
    spectral_gap,
    spectral_profile_exhaustive,
    volume_profile_bound,
)
from .report import ChainReport, ReportOptions, build_report, write_report
from .subsets import (
    LambdaBracket,
    Subset,
    dirichlet_eigenvalue,
    lambda_bracket,
    rayleigh_by_components,
    rayleigh_minimize,
    restricted_laplacian,
    subset,
)
from .zoo import (
    ViscekGraph,
    complete_graph,
    cycle,
    random_chain,
    random_reversible,
    torus_product,
    viscek,
    viscek_test_function,
)

__version__ = "0.1.0"
