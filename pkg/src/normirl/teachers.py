"""Simulated demonstrators with softmax-rational trajectory choice."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import ContractError, Dataset, RewardParams, Trajectory
from .environments import Environment


@dataclass(frozen=True)
class TeacherSpec:
    """How a simulated human produces data for one learning episode."""

    theta_true: RewardParams
    beta: float
    k: int = 3
    dependence: str = "independent"
    burn_in: int = 2000
    proposal_scale: float = 0.1
    penalty_weight: float = 1.0

    def __post_init__(self):
        if self.beta < 0.0:
            raise ContractError("beta must be nonnegative")
        if self.k < 1:
            raise ContractError("demo count must be positive")
        if self.dependence not in ("independent", "dependent"):
            raise ContractError(f"unknown dependence mode {self.dependence!r}")
        if self.burn_in < 1:
            raise ContractError("burn_in must be positive")


def _batched_chains(env: Environment, vec: np.ndarray, beta: float, n: int,
                    iterations: int, scale: float, rng: np.random.Generator,
                    init=None, ref=None, penalty_weight: float = 1.0) -> np.ndarray:
    """n independent random-walk chains on the box targeting exp(beta * score).

    score is the trajectory reward, minus a squared distance to ``ref`` when
    given (the correction model).  Out-of-box proposals are rejected so the
    box-uniform base measure is preserved.  Returns final states, (n, D).
    """
    lo, hi = env.flat_lo, env.flat_hi
    std = scale * (hi - lo)
    if init is None:
        X = rng.uniform(lo, hi, size=(n, env.flat_dim))
    else:
        X = np.array(init, dtype=float)

    def score(A):
        r = env.batch_features(A) @ vec
        if ref is not None:
            r = r - penalty_weight * np.sum((A - ref) ** 2, axis=1)
        return r

    fX = score(X)
    for _ in range(int(iterations)):
        P = X + rng.normal(size=X.shape) * std
        inside = np.all((P >= lo) & (P <= hi), axis=1)
        fP = score(P)
        delta = beta * (fP - fX)
        u = rng.uniform(size=n)
        acc = inside & ((delta >= 0.0) | (u < np.exp(np.minimum(delta, 0.0))))
        X[acc] = P[acc]
        fX[acc] = fP[acc]
    return X


def sample_teacher_trajectory(theta, beta: float, env: Environment,
                              rng: np.random.Generator, burn_in: int = 2000,
                              proposal_scale: float = 0.1) -> Trajectory:
    """One approximate draw from P(xi | theta): a long-burn-in chain from a
    uniform start."""
    vec = env.theta_vector(theta)
    X = _batched_chains(env, vec, beta, 1, burn_in, proposal_scale, rng)
    return Trajectory.from_flat(X[0], env.state_dim)


def generate_dataset(spec: TeacherSpec, env: Environment,
                     rng: np.random.Generator) -> Dataset:
    """Simulate one teacher's dataset.

    Independent mode runs k parallel chains over the trajectory box, one per
    demonstration.  Dependent mode starts from the environment's initial
    motion and produces k sequential corrections: correction j is an
    approximate draw from

        P(xi | c_{j-1}) propto exp(beta * (R(xi) - w ||xi - c_{j-1}||^2)),

    via a chain started at the previous motion, so each correction locally
    improves on the one before while staying close to it.
    """
    vec = env.theta_vector(spec.theta_true)
    if spec.dependence == "independent":
        X = _batched_chains(env, vec, spec.beta, spec.k, spec.burn_in,
                            spec.proposal_scale, rng)
        trajs = tuple(Trajectory.from_flat(row, env.state_dim) for row in X)
        return Dataset(trajs, "independent")
    initial = env.initial_trajectory()
    prev = initial.flat
    corrections = []
    for _ in range(spec.k):
        X = _batched_chains(env, vec, spec.beta, 1, spec.burn_in,
                            spec.proposal_scale, rng, init=prev[None, :],
                            ref=prev, penalty_weight=spec.penalty_weight)
        prev = X[0]
        corrections.append(Trajectory.from_flat(prev, env.state_dim))
    return Dataset(tuple(corrections), "dependent", initial=initial)
