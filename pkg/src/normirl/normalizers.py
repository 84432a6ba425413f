"""Likelihood normalizers for trajectory choice models.

A demonstrator picks trajectories with probability proportional to
exp(beta * R(xi, theta)), so the likelihood of a demonstration carries the
partition function Z(theta) = integral over trajectories of
exp(beta * R(xi', theta)).  Z is what makes the posterior over theta hard:
it must be re-evaluated at every candidate theta.  This module implements
the strategies a learner can take toward Z, all in log space:

  ignore    pretend Z is constant and drop it;
  sample    Monte Carlo mean of exp(beta R) over uniform trajectories
            (the uniform density constant is dropped; it cancels wherever
            normalizers are compared across theta);
  maximum   upper bound exp(beta * max R);
  exact     midpoint-rule quadrature on the environment grid, feasible only
            for trajectory spaces of dimension <= 3, used as the oracle.

Strategies also come in a dataset-space flavor for sequential-correction
data, where the normalizer integrates over whole candidate datasets drawn
around the initial motion.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize
from scipy.special import logsumexp

from .core import (
    ConfigError,
    ContractError,
    Dataset,
    RewardParams,
    Trajectory,
)
from .environments import (
    Environment,
    correction_box,
    maximize_reward,
    sample_dependent_datasets,
)


@dataclass(frozen=True)
class LogNormalizer:
    """A log-partition value with the strategy and weights it was computed for."""

    log_z: float
    strategy: str
    theta: RewardParams


def _check_beta(beta: float) -> float:
    beta = float(beta)
    if not math.isfinite(beta) or beta < 0.0:
        raise ContractError(f"beta must be finite and >= 0, got {beta!r}")
    return beta


def _finite(value: float, what: str) -> float:
    if not math.isfinite(value):
        raise FloatingPointError(f"{what} is not finite: {value!r}")
    return value


# ---------------------------------------------------------------------------
# Dataset-space reward helpers.  A candidate dataset is a (k, flat_dim) block
# of corrections; its reward is the sum of correction rewards minus the
# squared-displacement chain penalty anchored at the initial motion.

def batch_dataset_rewards(env: Environment, initial: Trajectory, blocks: np.ndarray,
                          theta, penalty_weight: float = 1.0) -> np.ndarray:
    blocks = np.asarray(blocks, dtype=float)
    n, k, d = blocks.shape
    if d != env.flat_dim:
        raise ContractError(f"dataset blocks must be (n, k, {env.flat_dim})")
    vec = env.theta_vector(theta)
    rewards = (env.batch_features(blocks.reshape(n * k, d)) @ vec).reshape(n, k).sum(axis=1)
    prev = np.broadcast_to(initial.flat, (n, d))
    chain = np.concatenate([prev[:, None, :], blocks], axis=1)
    penalty = np.sum(np.diff(chain, axis=1) ** 2, axis=(1, 2))
    return rewards - penalty_weight * penalty


def dataset_fast_reward(env: Environment, initial: Trajectory, k: int, theta,
                        penalty_weight: float = 1.0):
    """Scalar-math dataset reward over concatenated correction coordinates."""
    f = env.fast_reward(theta)
    d = env.flat_dim
    init = [float(v) for v in initial.flat]
    w = float(penalty_weight)

    def g(x):
        total = 0.0
        prev = init
        for j in range(k):
            seg = x[j * d:(j + 1) * d]
            total += f(seg)
            for i in range(d):
                step = seg[i] - prev[i]
                total -= w * step * step
            prev = seg
        return total

    return g


def maximize_dataset_reward(env: Environment, dataset: Dataset, theta,
                            penalty_weight: float = 1.0, x0=None):
    """Best dataset-space reward over the correction box around the initial motion.

    The objective is concave in the concatenated coordinates (negated convex
    features plus a negated quadratic penalty), so any local ascent endpoint
    is global up to solver wobble at the path-length kinks.  A warm ``x0``
    replaces the default center/observed starts since it is already near the
    optimum.  Returns ``(argmax, best)``.
    """
    k = dataset.size
    lo1, hi1 = correction_box(env, dataset.initial)
    lo, hi = np.tile(lo1, k), np.tile(hi1, k)
    g = dataset_fast_reward(env, dataset.initial, k, theta, penalty_weight)
    if x0 is not None:
        starts = [np.clip(np.asarray(x0, dtype=float), lo, hi)]
    else:
        observed = np.concatenate([t.flat for t in dataset.trajectories])
        starts = [(lo + hi) / 2.0, np.clip(observed, lo, hi)]
    bounds = np.column_stack([lo, hi])
    best_x, best = None, -math.inf
    for start in starts:
        res = minimize(lambda x: -g(x), start, method="L-BFGS-B", bounds=bounds)
        if -res.fun > best:
            best_x, best = res.x, float(-res.fun)
    return best_x, best


# ---------------------------------------------------------------------------
# Normalizer strategies.  ``bind`` returns a memoized callable
# RewardParams -> log Z for a fixed (environment, beta); ``bind_dataset``
# is the dataset-space analog for dependent data.

class NormalizerStrategy:
    name = "base"

    def bind(self, env: Environment, beta: float):
        raise NotImplementedError

    def bind_dataset(self, env: Environment, beta: float, dataset: Dataset,
                     penalty_weight: float = 1.0):
        raise NotImplementedError

    def bind_for(self, env: Environment, beta: float, dataset: Dataset,
                 penalty_weight: float = 1.0):
        if dataset.dependence == "dependent":
            return self.bind_dataset(env, beta, dataset, penalty_weight)
        return self.bind(env, beta)

    def __repr__(self):
        return f"{type(self).__name__}()"


def _memoized(fn):
    cache = {}

    def call(theta: RewardParams) -> float:
        key = theta.key()
        out = cache.get(key)
        if out is None:
            out = fn(theta)
            cache[key] = out
        return out

    return call


class IgnoreNormalizer(NormalizerStrategy):
    """Treat Z as a constant: log Z = 0 for every theta."""

    name = "ignore"

    def bind(self, env, beta):
        return lambda theta: 0.0

    def bind_dataset(self, env, beta, dataset, penalty_weight=1.0):
        return lambda theta: 0.0


class MeanSamplingNormalizer(NormalizerStrategy):
    """log of the sample mean of exp(beta R) over n uniform trajectories.

    The batch is drawn once per bind from the strategy's own seed, so a bound
    evaluator is a deterministic function of theta and all hypotheses are
    scored against the same draws.
    """

    name = "sample"

    def __init__(self, n: int = 100, seed: int = 0):
        if n < 1:
            raise ConfigError("sample count must be positive")
        self.n = int(n)
        self.seed = int(seed)

    def __repr__(self):
        return f"MeanSamplingNormalizer(n={self.n}, seed={self.seed})"

    def bind(self, env, beta):
        beta = _check_beta(beta)
        rng = np.random.default_rng([self.seed, 1])
        feats = env.batch_features(env.sample_flat(self.n, rng))
        log_n = math.log(self.n)

        def value(theta):
            w = beta * (feats @ env.theta_vector(theta))
            return _finite(float(logsumexp(w)) - log_n, "log z_mean")

        return _memoized(value)

    def bind_dataset(self, env, beta, dataset, penalty_weight=1.0):
        beta = _check_beta(beta)
        rng = np.random.default_rng([self.seed, 2])
        blocks = sample_dependent_datasets(env, dataset.initial, dataset.size, self.n, rng)
        n, k, d = blocks.shape
        feats = env.batch_features(blocks.reshape(n * k, d))
        prev = np.broadcast_to(dataset.initial.flat, (n, d))
        chain = np.concatenate([prev[:, None, :], blocks], axis=1)
        penalty = penalty_weight * np.sum(np.diff(chain, axis=1) ** 2, axis=(1, 2))
        log_n = math.log(self.n)

        def value(theta):
            r = (feats @ env.theta_vector(theta)).reshape(n, k).sum(axis=1) - penalty
            return _finite(float(logsumexp(beta * r)) - log_n, "log z_mean")

        return _memoized(value)


class MaximumNormalizer(NormalizerStrategy):
    """Upper bound: log Z = beta * max over trajectories of R."""

    name = "maximum"

    def __init__(self, refine_steps: int = 20):
        self.refine_steps = int(refine_steps)

    def bind(self, env, beta):
        beta = _check_beta(beta)

        def value(theta):
            if beta == 0.0:
                return 0.0
            _, best = maximize_reward(env, theta, refine_steps=self.refine_steps)
            return _finite(beta * best, "log z_max")

        return _memoized(value)

    def bind_dataset(self, env, beta, dataset, penalty_weight=1.0):
        beta = _check_beta(beta)
        # Successive chain proposals move theta a little, so the previous
        # argmax is a near-converged start for the next concave ascent.
        warm = {"x0": None}

        def value(theta):
            if beta == 0.0:
                return 0.0
            x, best = maximize_dataset_reward(env, dataset, theta, penalty_weight,
                                              x0=warm["x0"])
            warm["x0"] = x
            return _finite(beta * best, "log z_max")

        return _memoized(value)


class ExactQuadratureNormalizer(NormalizerStrategy):
    """Midpoint-rule quadrature on the environment grid; the test oracle.

    Only available when the flattened trajectory space has dimension <= 3.
    """

    name = "exact"

    def bind(self, env, beta):
        beta = _check_beta(beta)
        _, log_cell = env.quadrature_grid()

        def value(theta):
            w = beta * env.grid_rewards(theta)
            return _finite(float(logsumexp(w)) + log_cell, "log z_exact")

        return _memoized(value)

    def bind_dataset(self, env, beta, dataset, penalty_weight=1.0):
        raise ConfigError("exact quadrature over dataset spaces is not supported")


STRATEGIES = {
    "ignore": IgnoreNormalizer,
    "sample": MeanSamplingNormalizer,
    "maximum": MaximumNormalizer,
    "exact": ExactQuadratureNormalizer,
}


def make_strategy(name: str, **kwargs) -> NormalizerStrategy:
    if name not in STRATEGIES:
        known = ", ".join(sorted(STRATEGIES))
        raise ConfigError(f"unknown normalizer strategy {name!r}; expected one of: {known}")
    return STRATEGIES[name](**kwargs)


# ---------------------------------------------------------------------------
# Free-function forms of the three computable normalizers.

def z_exact(theta, beta: float, env: Environment) -> LogNormalizer:
    """Grid quadrature of exp(beta R) over the trajectory box, in log space."""
    theta = _as_params(theta, env)
    value = ExactQuadratureNormalizer().bind(env, beta)(theta)
    return LogNormalizer(value, "exact", theta)


def z_mean(theta, beta: float, env: Environment, n: int,
           rng: np.random.Generator) -> LogNormalizer:
    """log mean of exp(beta R) over n uniform draws from the given generator."""
    theta = _as_params(theta, env)
    beta = _check_beta(beta)
    if n < 1:
        raise ContractError("n must be positive")
    feats = env.batch_features(env.sample_flat(n, rng))
    w = beta * (feats @ env.theta_vector(theta))
    value = _finite(float(logsumexp(w)) - math.log(n), "log z_mean")
    return LogNormalizer(value, "sample", theta)


def z_max(theta, beta: float, env: Environment, refine_steps: int = 20) -> LogNormalizer:
    """beta times the best achievable reward."""
    theta = _as_params(theta, env)
    value = MaximumNormalizer(refine_steps=refine_steps).bind(env, beta)(theta)
    return LogNormalizer(value, "maximum", theta)


def _as_params(theta, env: Environment) -> RewardParams:
    if isinstance(theta, RewardParams):
        return theta
    return RewardParams.continuous(env.theta_vector(theta))


# ---------------------------------------------------------------------------
# Likelihood and the two-hypothesis belief.

def log_likelihood(xi: Trajectory, theta, beta: float,
                   strategy: NormalizerStrategy, env: Environment) -> float:
    """log P(xi | theta) = beta R(xi, theta) - log Z_strategy(theta)."""
    theta = _as_params(theta, env)
    beta = _check_beta(beta)
    return beta * env.trajectory_reward(xi, theta) - strategy.bind(env, beta)(theta)


def belief_curve(demo_flats: np.ndarray, beta: float,
                 strategy: NormalizerStrategy, env: Environment) -> np.ndarray:
    """Posterior of hypothesis 0 for each demo, under a uniform 2-hypothesis prior.

    One bind serves every demo, so a sampling strategy scores both hypotheses
    and all demos against a single batch.
    """
    hyps = getattr(env, "hypotheses", None)
    if hyps is None or len(hyps) != 2:
        raise ContractError("belief needs an environment with exactly two hypotheses")
    beta = _check_beta(beta)
    demo_flats = np.atleast_2d(np.asarray(demo_flats, dtype=float))
    logz = strategy.bind(env, beta)
    ll = np.empty((demo_flats.shape[0], 2))
    for i in range(2):
        theta = RewardParams.discrete(i, hyps)
        ll[:, i] = beta * env.batch_rewards(demo_flats, theta) - logz(theta)
    return np.exp(ll[:, 0] - logsumexp(ll, axis=1))


def belief_two_hypothesis(xi: Trajectory, beta: float,
                          strategy: NormalizerStrategy, env: Environment) -> float:
    """Posterior probability of hypothesis 0 given one demonstration."""
    env._check_trajectory(xi)
    return float(belief_curve(xi.flat[None, :], beta, strategy, env)[0])


def check_spherical_invariance(env: Environment, beta: float, n_thetas: int = 50,
                               tol: float = 1e-3, seed: int = 0) -> bool:
    """Whether log z_exact is constant in theta, up to tol, over sampled directions.

    Constant Z is exactly the condition under which dropping the normalizer
    leaves the posterior untouched; it holds when the feature image is a
    sphere and fails otherwise.
    """
    beta = _check_beta(beta)
    if n_thetas < 2:
        raise ContractError("need at least two weight samples")
    rng = np.random.default_rng(seed)
    logz = ExactQuadratureNormalizer().bind(env, beta)
    values = []
    for _ in range(int(n_thetas)):
        vec = rng.normal(size=env.feature_dim)
        vec /= np.linalg.norm(vec)
        values.append(logz(RewardParams.continuous(vec)))
    return (max(values) - min(values)) <= tol
