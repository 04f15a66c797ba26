"""banditlab: Thompson-sampling bandit experiments under noninformative priors.

Two reward models (uniform location-scale, gaussian), exact sequential
posterior samplers for priors sigma^(-k), the truncated-statistic policy
variant, closed-form regret lower bounds, and a deterministic Monte-Carlo
harness whose traces are bit-identical for any worker count.
"""
from .bounds import (
    LowerBoundCurve,
    klinf_gaussian,
    klinf_uniform,
    lb_coefficient,
    lb_curve,
)
from .core import (
    BUILTIN_INSTANCES,
    Arm,
    BanditInstance,
    GapVector,
    SeedSpec,
    derive_run_seed,
    gap_vector,
    instance_from_json,
    instance_to_json,
    resolve_instance,
)
from .harness import (
    DIAG_THEOREM2,
    ExperimentConfig,
    RegretTrace,
    fit_growth_exponent,
    read_trace,
    record_points,
    run_details,
    run_experiment,
    run_single,
    theorem2_instance,
    write_trace,
)
from .policies import (
    DiracArm,
    PolicyConfig,
    PolicyState,
    initial_play_count,
    make_dirac_arm,
    new_policy_state,
    parse_policy_spec,
    run_initial_phase,
    ts_select,
)
from .posteriors import (
    GaussianPosteriorParams,
    PriorK,
    UniformPosteriorParams,
    gamma_quantile,
    gaussian_sample_mu,
    gaussian_truncated_scale,
    prior_k_for,
    t_from_uniforms,
    uniform_sample_mu,
    uniform_sample_sigma,
    uniform_sigma_cdf,
    uniform_truncated_scale,
)
from .rewards import (
    GaussianStats,
    UniformStats,
    sample_reward,
    uniform_ab_from_ls,
    uniform_ls_from_ab,
    update_gaussian_stats,
    update_uniform_stats,
)

__version__ = "0.1.0"
