"""Core types for trajectory-based reward models.

A reward model scores a trajectory xi by R(xi, theta) = theta . Phi(xi),
where Phi maps a trajectory to a d-dimensional feature vector and theta is
a unit-norm weight vector (or an index into a finite hypothesis list for
environments with a small set of candidate rewards).  Environments own the
feature map; the functions here only wire types together and enforce the
shared contracts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

UNIT_NORM_TOL = 1e-9


def fmt_float(x) -> str:
    """Canonical CSV float format: nine significant digits."""
    return f"{float(x):.9g}"


class ContractError(ValueError):
    """An argument violates a documented precondition."""


class ConfigError(ValueError):
    """A configuration value is missing, unknown, or out of range."""


class ChainInitError(RuntimeError):
    """A sampler could not find a finite starting point."""


class DegenerateEstimateError(RuntimeError):
    """A point estimate is undefined (for example a zero mean direction)."""


def _frozen_array(x, dtype=float) -> np.ndarray:
    out = np.array(x, dtype=dtype)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class RewardParams:
    """Reward weights: either a continuous unit vector or a hypothesis index.

    Use the ``continuous`` / ``discrete`` constructors; the raw constructor
    performs no validation beyond what ``__post_init__`` checks.
    """

    vector: np.ndarray | None = None
    index: int | None = None
    hypotheses: tuple[float, ...] | None = None

    def __post_init__(self):
        if (self.vector is None) == (self.index is None):
            raise ContractError("RewardParams needs exactly one of vector or index")
        if self.vector is not None:
            vec = _frozen_array(self.vector)
            if vec.ndim != 1 or vec.size < 2:
                raise ContractError("continuous weights must be a vector of dim >= 2")
            norm = float(np.linalg.norm(vec))
            if not math.isfinite(norm) or abs(norm - 1.0) > UNIT_NORM_TOL:
                raise ContractError(f"weight vector must have unit norm, got {norm!r}")
            object.__setattr__(self, "vector", vec)
        else:
            if self.hypotheses is None or len(self.hypotheses) < 2:
                raise ContractError("discrete weights need a hypothesis list of size >= 2")
            if not 0 <= self.index < len(self.hypotheses):
                raise ContractError(
                    f"hypothesis index {self.index} out of range for {len(self.hypotheses)} hypotheses"
                )
            object.__setattr__(self, "hypotheses", tuple(float(h) for h in self.hypotheses))

    @classmethod
    def continuous(cls, vector) -> "RewardParams":
        return cls(vector=np.asarray(vector, dtype=float))

    @classmethod
    def discrete(cls, index: int, hypotheses) -> "RewardParams":
        return cls(index=int(index), hypotheses=tuple(hypotheses))

    @property
    def is_continuous(self) -> bool:
        return self.vector is not None

    @property
    def hypothesis_value(self) -> float:
        if self.is_continuous:
            raise ContractError("hypothesis_value is only defined for discrete weights")
        return self.hypotheses[self.index]

    @property
    def dimension(self) -> int:
        return self.vector.size if self.is_continuous else 1

    def key(self) -> tuple:
        """Hashable identity, used for normalizer memoization."""
        if self.is_continuous:
            return ("c", self.vector.tobytes())
        return ("d", self.index)


@dataclass(frozen=True, eq=False)
class Trajectory:
    """A fixed-horizon sequence of states, shape (horizon, state_dim)."""

    states: np.ndarray

    def __post_init__(self):
        arr = _frozen_array(self.states)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ContractError(f"trajectory states must be (horizon, state_dim), got {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ContractError("trajectory states must be finite")
        object.__setattr__(self, "states", arr)

    @classmethod
    def from_flat(cls, flat, state_dim: int) -> "Trajectory":
        flat = np.asarray(flat, dtype=float)
        return cls(states=flat.reshape(-1, state_dim))

    @property
    def horizon(self) -> int:
        return self.states.shape[0]

    @property
    def state_dim(self) -> int:
        return self.states.shape[1]

    @property
    def flat(self) -> np.ndarray:
        return self.states.reshape(-1)


def trajectory_distance(a: Trajectory, b: Trajectory) -> float:
    """Euclidean distance between two equal-shape trajectories, flattened."""
    if a.states.shape != b.states.shape:
        raise ContractError(
            f"trajectory shapes differ: {a.states.shape} vs {b.states.shape}"
        )
    return float(np.linalg.norm(a.flat - b.flat))


INDEPENDENT = "independent"
DEPENDENT = "dependent"


@dataclass(frozen=True, eq=False)
class Dataset:
    """Demonstrations (independent) or sequential corrections (dependent).

    In dependent mode ``initial`` is the motion the corrections started from;
    it contributes no reward term of its own but anchors the first correction
    penalty.
    """

    trajectories: tuple[Trajectory, ...]
    dependence: str = INDEPENDENT
    initial: Trajectory | None = None

    def __post_init__(self):
        if self.dependence not in (INDEPENDENT, DEPENDENT):
            raise ContractError(f"unknown dependence mode {self.dependence!r}")
        if len(self.trajectories) < 1:
            raise ContractError("dataset needs at least one trajectory")
        shape = self.trajectories[0].states.shape
        for t in self.trajectories:
            if t.states.shape != shape:
                raise ContractError("all trajectories in a dataset must share one shape")
        if self.dependence == DEPENDENT:
            if self.initial is None:
                raise ContractError("dependent datasets need the initial trajectory")
            if self.initial.states.shape != shape:
                raise ContractError("initial trajectory must match the corrections' shape")
        object.__setattr__(self, "trajectories", tuple(self.trajectories))

    @property
    def size(self) -> int:
        return len(self.trajectories)


# ---------------------------------------------------------------------------
# Reward evaluation.  Environments implement the feature map; these wrappers
# fix the calling conventions used everywhere else.

def state_reward(state, theta: RewardParams, env) -> float:
    """Per-state reward theta . phi(s) for environments with per-state features."""
    return env.state_reward(np.asarray(state, dtype=float), theta)


def trajectory_reward(trajectory: Trajectory, theta: RewardParams, env) -> float:
    return env.trajectory_reward(trajectory, theta)


def feature_vector(trajectory: Trajectory, env) -> np.ndarray:
    """Trajectory features Phi(xi); the sum of per-state features where those exist."""
    return env.trajectory_features(trajectory)


def dataset_reward_independent(dataset: Dataset, theta: RewardParams, env) -> float:
    """Sum of trajectory rewards over an independent dataset."""
    if dataset.dependence != INDEPENDENT:
        raise ContractError("dataset is not independent; use dataset_reward_dependent")
    vec = env.theta_vector(theta)
    flats = np.stack([t.flat for t in dataset.trajectories])
    return float(np.sum(env.batch_rewards(flats, vec)))


def dataset_reward_dependent(
    dataset: Dataset, theta: RewardParams, env, penalty_weight: float = 1.0
) -> float:
    """Reward of a correction sequence under the coupled model.

    Each correction earns its trajectory reward minus ``penalty_weight`` times
    the squared distance to its predecessor, with the initial motion as the
    predecessor of the first correction.
    """
    if dataset.dependence != DEPENDENT:
        raise ContractError("dataset is not dependent; use dataset_reward_independent")
    vec = env.theta_vector(theta)
    flats = np.stack([t.flat for t in dataset.trajectories])
    total = float(np.sum(env.batch_rewards(flats, vec)))
    prev = dataset.initial.flat
    for flat in flats:
        total -= penalty_weight * float(np.sum((flat - prev) ** 2))
        prev = flat
    return total


# ---------------------------------------------------------------------------
# Priors over reward weights.  log_prob values are unnormalized; only
# differences enter acceptance ratios.

class UniformSpherePrior:
    """Uniform direction prior on the unit sphere in R^dim.

    With ``orthant=True`` the support is the nonnegative orthant of the
    sphere, for tradeoff weights.
    """

    def __init__(self, dim: int, orthant: bool = False):
        if dim < 2:
            raise ConfigError("sphere prior needs dim >= 2")
        self.dim = dim
        self.orthant = orthant

    def sample(self, rng: np.random.Generator) -> RewardParams:
        vec = rng.normal(size=self.dim)
        norm = np.linalg.norm(vec)
        while norm < 1e-12:  # essentially impossible, retried for completeness
            vec = rng.normal(size=self.dim)
            norm = np.linalg.norm(vec)
        vec = vec / norm
        if self.orthant:
            vec = np.abs(vec)
        return RewardParams.continuous(vec)

    def log_prob(self, theta: RewardParams) -> float:
        if not theta.is_continuous or theta.vector.size != self.dim:
            raise ContractError("prior dimension mismatch")
        if self.orthant and np.any(theta.vector < 0.0):
            return -math.inf
        return 0.0


class DiscreteUniformPrior:
    """Uniform prior over a finite hypothesis list."""

    def __init__(self, hypotheses):
        self.hypotheses = tuple(float(h) for h in hypotheses)
        if len(self.hypotheses) < 2:
            raise ConfigError("discrete prior needs at least two hypotheses")

    def sample(self, rng: np.random.Generator) -> RewardParams:
        return RewardParams.discrete(int(rng.integers(len(self.hypotheses))), self.hypotheses)

    def log_prob(self, theta: RewardParams) -> float:
        if theta.is_continuous:
            raise ContractError("discrete prior got continuous weights")
        if theta.hypotheses != self.hypotheses:
            raise ContractError("hypothesis list mismatch")
        return -math.log(len(self.hypotheses))
