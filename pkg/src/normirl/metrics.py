"""Evaluation metrics for learned reward weights."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import ContractError, RewardParams, Trajectory, fmt_float
from .environments import Environment, optimal_trajectory
from .normalizers import (
    ExactQuadratureNormalizer,
    NormalizerStrategy,
    belief_two_hypothesis,
)

# Numerical slack before a negative regret is treated as an argmax failure.
_REGRET_SLACK = -1e-9


def theta_error(theta_true: RewardParams, theta_hat: RewardParams) -> float:
    """Euclidean distance between true and estimated unit weight vectors."""
    if not (theta_true.is_continuous and theta_hat.is_continuous):
        raise ContractError("theta_error needs continuous weights on both sides")
    if theta_true.vector.size != theta_hat.vector.size:
        raise ContractError("weight dimensions differ")
    return float(np.linalg.norm(theta_true.vector - theta_hat.vector))


def belief_error(strategy: NormalizerStrategy, xi: Trajectory, beta: float,
                 env: Environment) -> float:
    """|exact belief - strategy belief| for the two-hypothesis posterior."""
    exact = belief_two_hypothesis(xi, beta, ExactQuadratureNormalizer(), env)
    approx = belief_two_hypothesis(xi, beta, strategy, env)
    return abs(exact - approx)


def regret(theta_true: RewardParams, theta_hat: RewardParams, env: Environment,
           refine_steps: int = 20) -> float:
    """True-reward shortfall of acting on the estimate instead of the truth.

    Both argmaxes run through the same grid-plus-refinement optimizer so that
    systematic optimizer bias cancels.  Values below a -1e-9 slack indicate an
    optimizer inconsistency and raise; tiny negatives inside the slack clamp
    to zero.
    """
    best = optimal_trajectory(theta_true, env, refine_steps=refine_steps)
    acted = optimal_trajectory(theta_hat, env, refine_steps=refine_steps)
    shortfall = (env.trajectory_reward(best, theta_true)
                 - env.trajectory_reward(acted, theta_true))
    if shortfall < _REGRET_SLACK:
        raise ContractError(f"argmax inconsistency: negative regret {shortfall!r}")
    return max(shortfall, 0.0)


@dataclass(frozen=True)
class EvalRecord:
    """One learner evaluation on one teacher's data."""

    environment: str
    method: str
    dependence: str
    beta: float
    teacher_seed: int
    theta_true: RewardParams
    theta_hat: RewardParams
    error: float
    regret: float
    wall_seconds: float
    seconds_per_iteration: float

    RESULT_HEADER = ("environment", "method", "dependence", "beta", "teacher_seed",
                     "theta_true", "theta_hat", "error", "regret")
    TIMING_HEADER = ("environment", "method", "dependence", "beta", "teacher_seed",
                     "wall_seconds", "seconds_per_iteration")

    def result_row(self) -> list[str]:
        return [self.environment, self.method, self.dependence, fmt_float(self.beta),
                str(self.teacher_seed), _vec_str(self.theta_true),
                _vec_str(self.theta_hat), fmt_float(self.error), fmt_float(self.regret)]

    def timing_row(self) -> list[str]:
        return [self.environment, self.method, self.dependence, fmt_float(self.beta),
                str(self.teacher_seed), fmt_float(self.wall_seconds),
                fmt_float(self.seconds_per_iteration)]


def _vec_str(theta: RewardParams) -> str:
    if theta.is_continuous:
        return ";".join(fmt_float(v) for v in theta.vector)
    return f"hypothesis:{theta.index}"
