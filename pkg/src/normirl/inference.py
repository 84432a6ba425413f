"""Posterior samplers over reward weights.

Two families:

* ``mh_posterior``: random-walk Metropolis over weights where each proposal
  evaluates the dataset likelihood with one of the normalizer strategies
  (the normalizer enters the acceptance ratio once per demonstration).

* ``double_mh_posterior``: the normalizer-free alternative.  Each proposed
  theta' triggers one auxiliary draw from the trajectory (or dataset)
  distribution at theta' via a short inner chain; the auxiliary term makes
  every partition function cancel out of the acceptance ratio exactly.

Acceptance follows the ratio > alpha rule with alpha uniform on [0, 1),
which is standard Metropolis: accept with probability min(1, ratio).
"""

from __future__ import annotations

import csv
import math
import time
from dataclasses import dataclass

import numpy as np

from .core import (
    ChainInitError,
    ConfigError,
    ContractError,
    Dataset,
    DegenerateEstimateError,
    RewardParams,
    Trajectory,
    fmt_float,
)
from .environments import Environment, correction_box
from .normalizers import NormalizerStrategy, dataset_fast_reward


@dataclass(frozen=True)
class MhConfig:
    iterations: int = 4000
    burn_in: int = 1000
    thinning: int = 1
    proposal_scale: float = 0.15
    seed: int = 0

    def validate(self):
        if self.iterations < 1:
            raise ConfigError("iterations must be positive")
        if not 0 <= self.burn_in < self.iterations:
            raise ConfigError("burn_in must lie in [0, iterations)")
        if self.thinning < 1:
            raise ConfigError("thinning must be positive")
        if (self.iterations - self.burn_in) < self.thinning:
            raise ConfigError("chain would keep no samples; shrink burn_in or thinning")
        if self.proposal_scale < 0.0:
            raise ConfigError("proposal_scale must be nonnegative")


@dataclass(frozen=True)
class InnerConfig:
    """Inner-chain settings; the proposal scale is a fraction of the state range."""

    iterations: int = 500
    proposal_scale: float = 0.1
    seed: int = 0

    def validate(self):
        if self.iterations < 0:
            raise ConfigError("inner iterations must be nonnegative")
        if self.proposal_scale < 0.0:
            raise ConfigError("inner proposal_scale must be nonnegative")


@dataclass(frozen=True, eq=False)
class Chain:
    """Retained posterior samples plus run diagnostics."""

    samples: tuple
    log_ratio_trace: np.ndarray
    accepted: np.ndarray
    accept_count: int
    config: MhConfig
    method: str
    seconds_per_iteration: float

    def __len__(self):
        return len(self.samples)

    @property
    def acceptance_rate(self) -> float:
        return self.accept_count / self.config.iterations

    def vectors(self) -> np.ndarray:
        if not self.samples or not self.samples[0].is_continuous:
            raise ContractError("chain does not hold continuous weights")
        return np.stack([s.vector for s in self.samples])

    def indices(self) -> np.ndarray:
        if not self.samples or self.samples[0].is_continuous:
            raise ContractError("chain does not hold discrete weights")
        return np.array([s.index for s in self.samples], dtype=int)

    def to_csv(self, path):
        """One row per retained sample: seed, iteration, weights, accepted flag."""
        discrete = self.samples and not self.samples[0].is_continuous
        if discrete:
            coord_names = ["hypothesis"]
        else:
            coord_names = [f"theta_{i}" for i in range(self.samples[0].vector.size)]
        burn, thin = self.config.burn_in, self.config.thinning
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["seed", "iteration"] + coord_names + ["accepted"])
            for j, s in enumerate(self.samples):
                iteration = burn + (j + 1) * thin - 1
                if discrete:
                    coords = [str(s.index)]
                else:
                    coords = [fmt_float(v) for v in s.vector]
                writer.writerow([str(self.config.seed), str(iteration)]
                                + coords + [str(int(self.accepted[j]))])


# ---------------------------------------------------------------------------
# Proposals.

def propose_theta_vector(vec: np.ndarray, scale: float, rng: np.random.Generator) -> np.ndarray:
    """Tangent Gaussian step on the unit sphere, renormalized.

    The step is isotropic in the tangent plane at vec and the renormalization
    depends only on the step length, so the proposal density is a function of
    the angle between old and new weights alone; the proposal is symmetric.
    A zero scale returns vec unchanged.
    """
    step = rng.normal(size=vec.size) * scale
    step -= (step @ vec) * vec
    out = vec + step
    return out / np.linalg.norm(out)


def propose_theta(theta: RewardParams, scale: float, rng: np.random.Generator) -> RewardParams:
    if not theta.is_continuous:
        raise ContractError("propose_theta expects continuous weights")
    if scale < 0.0:
        raise ContractError("proposal scale must be nonnegative")
    return RewardParams.continuous(propose_theta_vector(theta.vector, scale, rng))


def _propose(theta: RewardParams, scale: float, rng: np.random.Generator) -> RewardParams:
    if theta.is_continuous:
        return propose_theta(theta, scale, rng)
    # Uniform over the hypothesis list, a symmetric discrete proposal.
    return RewardParams.discrete(int(rng.integers(len(theta.hypotheses))), theta.hypotheses)


def _accepts(log_ratio: float, u: float) -> bool:
    if log_ratio >= 0.0:
        return True
    return u < math.exp(log_ratio)


def _memo(fn):
    cache = {}

    def call(theta: RewardParams):
        key = theta.key()
        out = cache.get(key)
        if out is None:
            out = fn(theta)
            cache[key] = out
        return out

    return call


# ---------------------------------------------------------------------------
# Dataset log-likelihood pieces shared by the samplers.

def _data_reward_fn(dataset: Dataset, env: Environment, penalty_weight: float):
    """Memoized theta -> summed dataset reward (penalty included when dependent)."""
    flats = np.stack([t.flat for t in dataset.trajectories])
    base = env.batch_features(flats).sum(axis=0)
    offset = 0.0
    if dataset.dependence == "dependent":
        chain = np.vstack([dataset.initial.flat[None, :], flats])
        offset = penalty_weight * float(np.sum(np.diff(chain, axis=0) ** 2))
    return _memo(lambda theta: float(base @ env.theta_vector(theta)) - offset)


def acceptance_ratio_independent(theta: RewardParams, theta_prime: RewardParams,
                                 dataset: Dataset, beta: float,
                                 strategy: NormalizerStrategy, env: Environment,
                                 prior=None) -> float:
    """Log MH ratio for independent demonstrations.

    beta * (R_D(theta') - R_D(theta)) + K * (log Z(theta) - log Z(theta'))
    plus the prior log-ratio; K is the number of demonstrations.
    """
    if dataset.dependence != "independent":
        raise ContractError("dataset is not independent")
    prior = env.default_prior() if prior is None else prior
    logz = strategy.bind(env, beta)
    rd = _data_reward_fn(dataset, env, 0.0)
    return (beta * (rd(theta_prime) - rd(theta))
            + dataset.size * (logz(theta) - logz(theta_prime))
            + prior.log_prob(theta_prime) - prior.log_prob(theta))


def acceptance_ratio_dependent(theta: RewardParams, theta_prime: RewardParams,
                               dataset: Dataset, beta: float,
                               strategy: NormalizerStrategy, env: Environment,
                               prior=None, penalty_weight: float = 1.0) -> float:
    """Log MH ratio for a correction sequence scored as one observation.

    The normalizer integrates over whole candidate datasets, so it enters
    once rather than once per trajectory.
    """
    if dataset.dependence != "dependent":
        raise ContractError("dataset is not dependent")
    prior = env.default_prior() if prior is None else prior
    logz = strategy.bind_dataset(env, beta, dataset, penalty_weight)
    rd = _data_reward_fn(dataset, env, penalty_weight)
    return (beta * (rd(theta_prime) - rd(theta))
            + logz(theta) - logz(theta_prime)
            + prior.log_prob(theta_prime) - prior.log_prob(theta))


# ---------------------------------------------------------------------------
# Algorithm family 1: Metropolis over theta with an explicit normalizer.

def mh_posterior(dataset: Dataset, beta: float, strategy: NormalizerStrategy,
                 env: Environment, prior=None, cfg: MhConfig = MhConfig(),
                 penalty_weight: float = 1.0) -> Chain:
    """Random-walk Metropolis over reward weights under the given normalizer.

    Dispatches on the dataset's dependence mode: independent data uses the
    per-trajectory normalizer raised to the demonstration count, dependent
    data the dataset-space normalizer.
    """
    cfg.validate()
    prior = env.default_prior() if prior is None else prior
    rng = np.random.default_rng(cfg.seed)
    independent = dataset.dependence == "independent"
    logz = strategy.bind_for(env, beta, dataset, penalty_weight)
    rd = _data_reward_fn(dataset, env, penalty_weight)
    z_power = dataset.size if independent else 1

    def log_post(theta):
        lp = prior.log_prob(theta)
        if lp == -math.inf:
            return -math.inf
        return lp + beta * rd(theta) - z_power * logz(theta)

    theta = _init_theta(prior, rng, log_post)
    current = log_post(theta)
    keep = (cfg.iterations - cfg.burn_in) // cfg.thinning
    samples, trace, flags = [], np.empty(keep), np.zeros(keep, dtype=bool)
    accept_count = 0
    start = time.perf_counter()
    for it in range(cfg.iterations):
        proposal = _propose(theta, cfg.proposal_scale, rng)
        candidate = log_post(proposal)
        log_ratio = candidate - current
        accepted = _accepts(log_ratio, rng.uniform())
        if accepted:
            theta, current = proposal, candidate
            accept_count += 1
        j = it - cfg.burn_in
        if j >= 0 and (j + 1) % cfg.thinning == 0:
            idx = (j + 1) // cfg.thinning - 1
            samples.append(theta)
            trace[idx] = log_ratio
            flags[idx] = accepted
    elapsed = time.perf_counter() - start
    return Chain(tuple(samples), trace, flags, accept_count, cfg, strategy.name,
                 elapsed / cfg.iterations)


def _init_theta(prior, rng, log_post, attempts: int = 100) -> RewardParams:
    for _ in range(attempts):
        theta = prior.sample(rng)
        if math.isfinite(log_post(theta)):
            return theta
    raise ChainInitError(f"no finite starting point after {attempts} prior draws")


# ---------------------------------------------------------------------------
# Inner sampler: a short chain over trajectories at fixed theta.

def _box_mh_chain(f, x0, lo, hi, std, iterations, beta, rng):
    """Scalar-math Metropolis chain on a box targeting exp(beta * f).

    Proposals falling outside the box are rejected (the target is zero
    there), which keeps the kernel symmetric inside; clipping instead would
    pile stationary mass onto the faces.
    """
    d = len(x0)
    noise = (rng.normal(size=(iterations, d)) * std).tolist() if iterations else []
    us = rng.uniform(size=iterations).tolist() if iterations else []
    lo = [float(v) for v in lo]
    hi = [float(v) for v in hi]
    x = [float(v) for v in x0]
    xp = list(x)
    fx = f(x)
    accepts = 0
    for t in range(iterations):
        row = noise[t]
        inside = True
        for i in range(d):
            v = x[i] + row[i]
            if v < lo[i] or v > hi[i]:
                inside = False
                break
            xp[i] = v
        if not inside:
            continue
        fxp = f(xp)
        delta = beta * (fxp - fx)
        if delta >= 0.0 or us[t] < math.exp(delta):
            x, xp = xp, x
            fx = fxp
            accepts += 1
    return np.asarray(x), accepts


def inner_sampler(dataset: Dataset, theta: RewardParams, beta: float, env: Environment,
                  cfg: InnerConfig = InnerConfig(), rng: np.random.Generator = None) -> Trajectory:
    """Approximate draw from P(xi | theta) proportional to exp(beta R).

    Starts from a uniformly chosen dataset trajectory and runs a Gaussian
    random-walk chain on the trajectory box; zero iterations return the
    starting point.
    """
    cfg.validate()
    if rng is None:
        rng = np.random.default_rng(cfg.seed)
    flats = [t.flat for t in dataset.trajectories]
    x0 = flats[int(rng.integers(len(flats)))]
    f = env.fast_reward(theta)
    std = cfg.proposal_scale * (env.flat_hi - env.flat_lo)
    x, _ = _box_mh_chain(f, x0, env.flat_lo, env.flat_hi, std, cfg.iterations, beta, rng)
    return Trajectory.from_flat(x, env.state_dim)


def _aux_dataset_chain(dataset: Dataset, theta: RewardParams, beta: float,
                       env: Environment, cfg: InnerConfig, rng,
                       penalty_weight: float) -> np.ndarray:
    """Auxiliary dataset draw: a chain over the correction box, started from
    the observed corrections clipped into the box."""
    k = dataset.size
    lo1, hi1 = correction_box(env, dataset.initial)
    lo, hi = np.tile(lo1, k), np.tile(hi1, k)
    x0 = np.clip(np.concatenate([t.flat for t in dataset.trajectories]), lo, hi)
    g = dataset_fast_reward(env, dataset.initial, k, theta, penalty_weight)
    std = cfg.proposal_scale * np.tile(env.flat_hi - env.flat_lo, k)
    x, _ = _box_mh_chain(g, x0, lo, hi, std, cfg.iterations, beta, rng)
    return x.reshape(k, env.flat_dim)


# ---------------------------------------------------------------------------
# Algorithm family 2: double Metropolis-Hastings.

def double_mh_acceptance(theta: RewardParams, theta_prime: RewardParams,
                         xi_aux: Trajectory, dataset: Dataset, beta: float,
                         env: Environment, prior=None) -> float:
    """Log acceptance ratio with the auxiliary trajectory standing in for Z.

    beta * sum_i (R(xi_i, theta') - R(xi_i, theta))
    + beta * K * (R(xi_aux, theta) - R(xi_aux, theta'))
    + log prior ratio.

    No normalizer appears; the auxiliary draw at theta' cancels both
    partition functions exactly in expectation over the inner sampler.
    """
    if dataset.dependence != "independent":
        raise ContractError("the trajectory-space ratio needs independent data")
    prior = env.default_prior() if prior is None else prior
    rd = _data_reward_fn(dataset, env, 0.0)
    r_aux = env.trajectory_reward(xi_aux, theta)
    r_aux_p = env.trajectory_reward(xi_aux, theta_prime)
    return (beta * (rd(theta_prime) - rd(theta))
            + beta * dataset.size * (r_aux - r_aux_p)
            + prior.log_prob(theta_prime) - prior.log_prob(theta))


def double_mh_posterior(dataset: Dataset, beta: float, env: Environment,
                        prior=None, cfg: MhConfig = MhConfig(),
                        inner: InnerConfig = InnerConfig(),
                        penalty_weight: float = 1.0) -> Chain:
    """Normalizer-free posterior chain over reward weights.

    Every outer proposal runs exactly one inner chain at theta' (over
    trajectories for independent data, over candidate datasets for
    dependent data); inner randomness is seeded from (inner seed, outer
    seed, outer iteration), so runs are reproducible.
    """
    cfg.validate()
    inner.validate()
    prior = env.default_prior() if prior is None else prior
    rng = np.random.default_rng(cfg.seed)
    independent = dataset.dependence == "independent"
    rd = _data_reward_fn(dataset, env, 0.0 if independent else penalty_weight)
    k = dataset.size

    def log_target(theta):
        lp = prior.log_prob(theta)
        return lp if lp == -math.inf else lp + beta * rd(theta)

    theta = _init_theta(prior, rng, log_target)
    keep = (cfg.iterations - cfg.burn_in) // cfg.thinning
    samples, trace, flags = [], np.empty(keep), np.zeros(keep, dtype=bool)
    accept_count = 0
    start = time.perf_counter()
    for it in range(cfg.iterations):
        proposal = _propose(theta, cfg.proposal_scale, rng)
        inner_rng = np.random.default_rng([inner.seed, cfg.seed, it])
        if independent:
            xi_aux = inner_sampler(dataset, proposal, beta, env, inner, inner_rng)
            log_ratio = double_mh_acceptance(theta, proposal, xi_aux, dataset,
                                             beta, env, prior)
        else:
            aux = _aux_dataset_chain(dataset, proposal, beta, env, inner,
                                     inner_rng, penalty_weight)
            vec_r = _dependent_block_reward(env, dataset, aux, penalty_weight)
            log_ratio = (beta * (rd(proposal) - rd(theta))
                         + beta * (vec_r(theta) - vec_r(proposal))
                         + prior.log_prob(proposal) - prior.log_prob(theta))
        accepted = _accepts(log_ratio, rng.uniform())
        if accepted:
            theta = proposal
            accept_count += 1
        j = it - cfg.burn_in
        if j >= 0 and (j + 1) % cfg.thinning == 0:
            idx = (j + 1) // cfg.thinning - 1
            samples.append(theta)
            trace[idx] = log_ratio
            flags[idx] = accepted
    elapsed = time.perf_counter() - start
    return Chain(tuple(samples), trace, flags, accept_count, cfg, "double-mh",
                 elapsed / cfg.iterations)


def _dependent_block_reward(env, dataset, block, penalty_weight):
    feats = env.batch_features(block).sum(axis=0)
    chain = np.vstack([dataset.initial.flat[None, :], block])
    offset = penalty_weight * float(np.sum(np.diff(chain, axis=0) ** 2))
    return lambda theta: float(feats @ env.theta_vector(theta)) - offset


# ---------------------------------------------------------------------------
# Point estimates.

def posterior_mean(chain: Chain) -> RewardParams:
    """Coordinate-wise mean of the samples, renormalized to the sphere."""
    if len(chain) == 0:
        raise ContractError("cannot average an empty chain")
    mean = chain.vectors().mean(axis=0)
    norm = float(np.linalg.norm(mean))
    if norm < 1e-8:
        raise DegenerateEstimateError("posterior mean has no direction")
    return RewardParams.continuous(mean / norm)


def posterior_frequency(chain: Chain, index: int = 0) -> float:
    """Fraction of retained samples equal to the given hypothesis index."""
    if len(chain) == 0:
        raise ContractError("cannot summarize an empty chain")
    return float(np.mean(chain.indices() == index))
