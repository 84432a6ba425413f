"""Bayesian reward learning from demonstrations under approximate normalizers."""

from .core import (
    ChainInitError,
    ConfigError,
    ContractError,
    Dataset,
    DegenerateEstimateError,
    DiscreteUniformPrior,
    RewardParams,
    Trajectory,
    UniformSpherePrior,
    dataset_reward_dependent,
    dataset_reward_independent,
    feature_vector,
    state_reward,
    trajectory_distance,
    trajectory_reward,
)
from .environments import (
    CupEnv,
    Environment,
    PathEnv,
    SphereEnv,
    make_environment,
    optimal_trajectory,
    perturb_trajectory,
    sample_uniform_trajectory,
)
from .inference import (
    Chain,
    InnerConfig,
    MhConfig,
    acceptance_ratio_dependent,
    acceptance_ratio_independent,
    double_mh_acceptance,
    double_mh_posterior,
    inner_sampler,
    mh_posterior,
    posterior_frequency,
    posterior_mean,
    propose_theta,
)
from .experiments import (
    ExperimentConfig,
    check_assertions,
    load_config,
    run_crossover,
    run_dependence_study,
    run_experiment,
    run_simulation_suite,
    run_working_example,
)
from .metrics import EvalRecord, belief_error, regret, theta_error
from .normalizers import (
    ExactQuadratureNormalizer,
    IgnoreNormalizer,
    LogNormalizer,
    MaximumNormalizer,
    MeanSamplingNormalizer,
    NormalizerStrategy,
    belief_two_hypothesis,
    check_spherical_invariance,
    log_likelihood,
    make_strategy,
    z_exact,
    z_max,
    z_mean,
)
from .teachers import TeacherSpec, generate_dataset, sample_teacher_trajectory

__version__ = "0.1.0"
