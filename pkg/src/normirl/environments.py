"""Desk-scale environments with analytically tractable trajectory spaces.

Every environment here is a box of fixed-horizon trajectories with a linear
reward R(xi, theta) = theta . Phi(xi).  Trajectory spaces are deliberately
low dimensional so that grid quadrature over the whole space stays feasible
(for the exact-normalizer oracle) and so that maximization over trajectories
is cheap.

All batch methods take flattened trajectories, shape (n, horizon * state_dim),
so that samplers and quadrature can treat the trajectory space as a plain box
in R^D.
"""

from __future__ import annotations

import itertools
import math

import numpy as np
from scipy.optimize import minimize

from .core import (
    ConfigError,
    ContractError,
    DiscreteUniformPrior,
    RewardParams,
    Trajectory,
    UniformSpherePrior,
)

# Default quadrature resolutions per trajectory-space dimension.  Only 1-D
# spaces get the fine grid; above 3-D no grid is built at all.
_GRID_DEFAULTS = {1: 10_000, 2: 200, 3: 60}


class Environment:
    """Shared plumbing for box trajectory spaces with linear rewards."""

    name = "environment"

    def __init__(self, state_dim, horizon, lo, hi, feature_dim, grid_resolution=None,
                 correction_halfwidth=0.5):
        self.state_dim = int(state_dim)
        self.horizon = int(horizon)
        self.lo = np.asarray(lo, dtype=float)
        self.hi = np.asarray(hi, dtype=float)
        if self.lo.shape != (self.state_dim,) or self.hi.shape != (self.state_dim,):
            raise ConfigError("bounds must have shape (state_dim,)")
        if np.any(self.hi < self.lo):
            raise ConfigError("upper bounds must not be below lower bounds")
        self.feature_dim = int(feature_dim)
        self.flat_dim = self.horizon * self.state_dim
        self.flat_lo = np.tile(self.lo, self.horizon)
        self.flat_hi = np.tile(self.hi, self.horizon)
        if grid_resolution is None:
            grid_resolution = _GRID_DEFAULTS.get(self.flat_dim, 0)
        self.grid_resolution = int(grid_resolution)
        if self.flat_dim <= 3 and self.grid_resolution < 2:
            raise ConfigError("quadrature grid needs at least 2 points per dimension")
        # Half-width of the correction box around an initial trajectory, as a
        # fraction of the per-coordinate state range.
        self.correction_halfwidth = float(correction_halfwidth)
        self._grid_cache = None
        self._grid_features = None

    # Caches hold large arrays; rebuild them after unpickling instead.
    def __getstate__(self):
        state = self.__dict__.copy()
        state["_grid_cache"] = None
        state["_grid_features"] = None
        return state

    # -- feature map ------------------------------------------------------

    def batch_features(self, flats: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def state_features(self, state: np.ndarray) -> np.ndarray:
        raise ContractError(f"{self.name} does not define per-state features")

    def theta_vector(self, theta) -> np.ndarray:
        """Resolve reward weights to a feature-space vector."""
        if isinstance(theta, RewardParams):
            if not theta.is_continuous:
                raise ContractError(f"{self.name} has no hypothesis list for discrete weights")
            vec = theta.vector
        else:
            vec = np.asarray(theta, dtype=float)
        if vec.shape != (self.feature_dim,):
            raise ContractError(
                f"weight dimension {vec.shape} does not match feature dim {self.feature_dim}"
            )
        return vec

    # -- rewards ----------------------------------------------------------

    def batch_rewards(self, flats: np.ndarray, theta) -> np.ndarray:
        flats = np.asarray(flats, dtype=float)
        if flats.ndim != 2 or flats.shape[1] != self.flat_dim:
            raise ContractError(f"flat trajectories must be (n, {self.flat_dim})")
        return self.batch_features(flats) @ self.theta_vector(theta)

    def trajectory_reward(self, trajectory: Trajectory, theta) -> float:
        self._check_trajectory(trajectory)
        return float(self.batch_rewards(trajectory.flat[None, :], theta)[0])

    def trajectory_features(self, trajectory: Trajectory) -> np.ndarray:
        self._check_trajectory(trajectory)
        return self.batch_features(trajectory.flat[None, :])[0]

    def state_reward(self, state, theta) -> float:
        state = np.asarray(state, dtype=float)
        if state.shape != (self.state_dim,):
            raise ContractError(f"state must have shape ({self.state_dim},)")
        return float(self.state_features(state) @ self.theta_vector(theta))

    def fast_reward(self, theta):
        """Scalar-math reward closure over a flat coordinate sequence.

        Equivalent to ``batch_rewards`` on a single row; used inside sampler
        loops where per-call numpy overhead dominates.
        """
        vec = self.theta_vector(theta)
        batch = self.batch_rewards
        return lambda x: float(batch(np.asarray(x, dtype=float)[None, :], vec)[0])

    def _check_trajectory(self, trajectory: Trajectory):
        if trajectory.states.shape != (self.horizon, self.state_dim):
            raise ContractError(
                f"trajectory shape {trajectory.states.shape} does not match "
                f"({self.horizon}, {self.state_dim})"
            )

    # -- trajectory space -------------------------------------------------

    def sample_flat(self, n: int, rng: np.random.Generator) -> np.ndarray:
        """Uniform trajectories from the box, shape (n, flat_dim)."""
        return rng.uniform(self.flat_lo, self.flat_hi, size=(int(n), self.flat_dim))

    def quadrature_grid(self):
        """Midpoint grid over the trajectory box: (points, log cell volume)."""
        if self.flat_dim > 3:
            raise ConfigError(
                f"quadrature over a {self.flat_dim}-D trajectory space is not feasible; "
                "use a sampled or maximized normalizer instead"
            )
        if self.grid_resolution < 2:
            raise ConfigError("quadrature grid needs at least 2 points per dimension")
        if self._grid_cache is None:
            res = self.grid_resolution
            axes = []
            log_cell = 0.0
            for d in range(self.flat_dim):
                width = (self.flat_hi[d] - self.flat_lo[d]) / res
                axes.append(self.flat_lo[d] + width * (np.arange(res) + 0.5))
                log_cell += math.log(width)
            mesh = np.meshgrid(*axes, indexing="ij")
            points = np.stack([m.reshape(-1) for m in mesh], axis=1)
            self._grid_cache = (points, log_cell)
        return self._grid_cache

    def grid_rewards(self, theta) -> np.ndarray:
        """Rewards on the quadrature grid, with the feature matrix cached."""
        points, _ = self.quadrature_grid()
        if self._grid_features is None:
            self._grid_features = self.batch_features(points)
        return self._grid_features @ self.theta_vector(theta)

    def initial_trajectory(self) -> Trajectory:
        """The neutral motion corrections start from: box center at every step."""
        center = (self.flat_lo + self.flat_hi) / 2.0
        return Trajectory.from_flat(center, self.state_dim)

    def default_prior(self):
        raise NotImplementedError


class CupEnv(Environment):
    """One wrist angle s in [0, pi/2] carrying a cup, horizon 1.

    The reward is linear in the angle weights (cos a, sin a) through the
    feature map phi(s) = (-5 (s + 1), -(pi/2 - s)), which is the same as the
    closed form

        r(s, a) = -5 cos(a) (s + 1) - sin(a) (pi/2 - s).

    Hypothesis a = 0 penalizes only the cup-height term and wants s = 0;
    a = pi/2 penalizes only wrist tilt and wants s = pi/2.  The default
    weight space is the discrete pair {0, pi/2} under a uniform prior.
    """

    name = "cup"
    hypotheses = (0.0, math.pi / 2.0)

    def __init__(self, grid_resolution=None):
        super().__init__(state_dim=1, horizon=1, lo=[0.0], hi=[math.pi / 2.0],
                         feature_dim=2, grid_resolution=grid_resolution)

    def batch_features(self, flats):
        s = np.asarray(flats, dtype=float)[:, 0]
        return np.stack([-5.0 * (s + 1.0), -(math.pi / 2.0 - s)], axis=1)

    def state_features(self, state):
        s = float(state[0])
        return np.array([-5.0 * (s + 1.0), -(math.pi / 2.0 - s)])

    def resolve_angle(self, theta) -> float:
        if isinstance(theta, RewardParams) and not theta.is_continuous:
            if theta.hypotheses != self.hypotheses:
                raise ContractError("hypothesis list does not belong to this environment")
            return theta.hypothesis_value
        vec = Environment.theta_vector(self, theta)
        return math.atan2(vec[1], vec[0])

    def theta_vector(self, theta):
        if isinstance(theta, RewardParams) and not theta.is_continuous:
            a = self.resolve_angle(theta)
            return np.array([math.cos(a), math.sin(a)])
        return Environment.theta_vector(self, theta)

    def fast_reward(self, theta):
        a = self.resolve_angle(theta)
        ca, sa = -5.0 * math.cos(a), -math.sin(a)
        # r(s) = ca (s + 1) + sa (pi/2 - s), linear in s
        slope = ca - sa
        intercept = ca + sa * (math.pi / 2.0)
        return lambda x: slope * x[0] + intercept

    def hypothesis(self, index: int) -> RewardParams:
        return RewardParams.discrete(index, self.hypotheses)

    def default_prior(self):
        return DiscreteUniformPrior(self.hypotheses)


class SphereEnv(Environment):
    """Horizon-1 environment whose feature image is a circle of radius sigma.

    States are angles t in [0, 2 pi] with phi(t) = sigma (cos t, sin t), so
    the best achievable reward sigma * ||theta|| is the same in every weight
    direction.  The partition function is therefore constant in theta, which
    makes this the control environment where ignoring the normalizer is
    harmless.
    """

    name = "sphere"

    def __init__(self, sigma=1.0, grid_resolution=None):
        super().__init__(state_dim=1, horizon=1, lo=[0.0], hi=[2.0 * math.pi],
                         feature_dim=2, grid_resolution=grid_resolution)
        self.sigma = float(sigma)
        if self.sigma <= 0.0:
            raise ConfigError("sigma must be positive")

    def batch_features(self, flats):
        t = np.asarray(flats, dtype=float)[:, 0]
        return self.sigma * np.stack([np.cos(t), np.sin(t)], axis=1)

    def state_features(self, state):
        t = float(state[0])
        return self.sigma * np.array([math.cos(t), math.sin(t)])

    def fast_reward(self, theta):
        vec = self.theta_vector(theta)
        w0, w1 = self.sigma * vec[0], self.sigma * vec[1]
        return lambda x: w0 * math.cos(x[0]) + w1 * math.sin(x[0])

    def default_prior(self):
        return UniformSpherePrior(2, orthant=False)


class PathEnv(Environment):
    """Waypoint paths on the unit box with tradeoff features.

    A trajectory is ``horizon`` free waypoints in [0, 1]^waypoint_dim.  Paths
    implicitly start at the origin corner and the goal sits at the opposite
    corner.  Features, each affinely scaled to [-1, 0] over the box:

      0. negative path length, including the leg from the start corner to the
         first waypoint, scaled by 1 / (horizon * sqrt(waypoint_dim));
      1. negative squared distance from the last waypoint to the goal,
         scaled by 1 / waypoint_dim;
      2. (optional, 2-D waypoints) negative mean waypoint height.

    Short paths stop near the start, goal-seeking paths pay length, so the
    achievable feature set is far from spherical and the partition function
    varies strongly with theta.  Weights are nonnegative tradeoffs: the prior
    is uniform on the positive part of the unit sphere.
    """

    name = "path"

    def __init__(self, waypoint_dim=1, horizon=5, n_features=2, grid_resolution=None,
                 correction_halfwidth=0.5):
        if waypoint_dim not in (1, 2):
            raise ConfigError("waypoint_dim must be 1 or 2")
        if n_features not in (2, 3):
            raise ConfigError("n_features must be 2 or 3")
        if n_features == 3 and waypoint_dim != 2:
            raise ConfigError("the height feature needs 2-D waypoints")
        if horizon < 1:
            raise ConfigError("horizon must be at least 1")
        super().__init__(state_dim=waypoint_dim, horizon=horizon,
                         lo=np.zeros(waypoint_dim), hi=np.ones(waypoint_dim),
                         feature_dim=n_features, grid_resolution=grid_resolution,
                         correction_halfwidth=correction_halfwidth)
        self.waypoint_dim = waypoint_dim
        self.start = np.zeros(waypoint_dim)
        self.goal = np.ones(waypoint_dim)
        self._len_scale = 1.0 / (horizon * math.sqrt(waypoint_dim))
        self._sq_scale = 1.0 / waypoint_dim

    def batch_features(self, flats):
        flats = np.asarray(flats, dtype=float)
        pts = flats.reshape(flats.shape[0], self.horizon, self.waypoint_dim)
        legs = np.concatenate(
            [pts[:, :1, :] - self.start, np.diff(pts, axis=1)], axis=1
        )
        plen = np.sqrt(np.sum(legs ** 2, axis=2)).sum(axis=1)
        sq_goal = np.sum((pts[:, -1, :] - self.goal) ** 2, axis=1)
        cols = [-plen * self._len_scale, -sq_goal * self._sq_scale]
        if self.feature_dim == 3:
            cols.append(-pts[:, :, 1].mean(axis=1))
        return np.stack(cols, axis=1)

    def fast_reward(self, theta):
        vec = self.theta_vector(theta)
        T, w = self.horizon, self.waypoint_dim
        w_len = -vec[0] * self._len_scale
        w_sq = -vec[1] * self._sq_scale
        w_h = -vec[2] / T if self.feature_dim == 3 else 0.0
        if w == 1:
            def f(x):
                plen = abs(x[0])
                for i in range(1, T):
                    plen += abs(x[i] - x[i - 1])
                d = x[T - 1] - 1.0
                return w_len * plen + w_sq * d * d
        else:
            def f(x):
                plen = math.hypot(x[0], x[1])
                heights = x[1]
                for i in range(1, T):
                    j = 2 * i
                    plen += math.hypot(x[j] - x[j - 2], x[j + 1] - x[j - 1])
                    heights += x[j + 1]
                dx, dy = x[2 * T - 2] - 1.0, x[2 * T - 1] - 1.0
                return w_len * plen + w_sq * (dx * dx + dy * dy) + w_h * heights
        return f

    def initial_trajectory(self) -> Trajectory:
        """The untuned motion corrections start from: waypoints jerking
        between 0.8 and 0.2 with the final waypoint stopping at 0.2.

        The jerks make the path long and the stop leaves it far from the
        goal, so every weighting in the positive orthant has room to improve
        it.  A box-center start would already be length-optimal (zero
        waypoint variation) and length-dominated teachers could not correct
        anything.
        """
        vals = np.where(np.arange(self.horizon) % 2 == 0, 0.8, 0.2)
        vals[-1] = 0.2
        pts = np.repeat(vals[:, None], self.waypoint_dim, axis=1)
        return Trajectory(pts)

    def default_prior(self):
        return UniformSpherePrior(self.feature_dim, orthant=True)


ENVIRONMENTS = {"cup": CupEnv, "sphere": SphereEnv, "path": PathEnv}


def make_environment(name: str, **kwargs) -> Environment:
    if name not in ENVIRONMENTS:
        known = ", ".join(sorted(ENVIRONMENTS))
        raise ConfigError(f"unknown environment {name!r}; expected one of: {known}")
    return ENVIRONMENTS[name](**kwargs)


# ---------------------------------------------------------------------------
# Trajectory-space sampling and perturbation.

def sample_uniform_trajectory(env: Environment, rng: np.random.Generator) -> Trajectory:
    return Trajectory.from_flat(env.sample_flat(1, rng)[0], env.state_dim)


def perturb_flat(flat: np.ndarray, scale: float, env: Environment,
                 rng: np.random.Generator) -> np.ndarray:
    """Gaussian step on every coordinate, clipped to the box.

    ``scale`` is a fraction of the per-coordinate state range.  Clipping makes
    the step only approximately symmetric within a step of the boundary.
    """
    std = scale * (env.flat_hi - env.flat_lo)
    return np.clip(flat + rng.normal(size=flat.shape) * std, env.flat_lo, env.flat_hi)


def perturb_trajectory(trajectory: Trajectory, scale: float, env: Environment,
                       rng: np.random.Generator) -> Trajectory:
    env._check_trajectory(trajectory)
    return Trajectory.from_flat(perturb_flat(trajectory.flat, scale, env, rng), env.state_dim)


def correction_box(env: Environment, initial: Trajectory):
    """Coordinate bounds of the dataset space: a box around the initial motion."""
    env._check_trajectory(initial)
    half = env.correction_halfwidth * (env.flat_hi - env.flat_lo)
    lo = np.maximum(env.flat_lo, initial.flat - half)
    hi = np.minimum(env.flat_hi, initial.flat + half)
    return lo, hi


def sample_dependent_datasets(env: Environment, initial: Trajectory, k: int, n: int,
                              rng: np.random.Generator) -> np.ndarray:
    """Uniform draws from the dataset space, shape (n, k, flat_dim).

    Each candidate dataset is ``k`` trajectories drawn independently and
    uniformly from the correction box around ``initial``.
    """
    if k < 1:
        raise ContractError("datasets need at least one correction")
    lo, hi = correction_box(env, initial)
    return rng.uniform(lo, hi, size=(int(n), int(k), env.flat_dim))


# ---------------------------------------------------------------------------
# Reward maximization over the trajectory box.

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def golden_max(f, a: float, b: float, tol: float = 1e-8, max_iter: int = 200):
    """Golden-section maximization of a unimodal scalar function on [a, b]."""
    if b - a <= tol:
        x = (a + b) / 2.0
        return x, f(x)
    h = b - a
    x1 = b - _INVPHI * h
    x2 = a + _INVPHI * h
    f1, f2 = f(x1), f(x2)
    for _ in range(max_iter):
        if h <= tol:
            break
        if f1 >= f2:
            b, x2, f2 = x2, x1, f1
            h = b - a
            x1 = b - _INVPHI * h
            f1 = f(x1)
        else:
            a, x1, f1 = x1, x2, f2
            h = b - a
            x2 = a + _INVPHI * h
            f2 = f(x2)
    if f1 >= f2:
        return x1, f1
    return x2, f2


def _coordinate_refine(f, x0, lo, hi, half, refine_steps, tol):
    """Cyclic per-coordinate golden-section ascent from x0 within the box."""
    x = [float(v) for v in x0]
    best = f(x)
    dim = len(x)
    for _ in range(int(refine_steps)):
        moved = 0.0
        for i in range(dim):
            a = max(lo[i], x[i] - half[i])
            b = min(hi[i], x[i] + half[i])
            old = x[i]

            def along(v, i=i):
                x[i] = v
                return f(x)

            xi, fi = golden_max(along, a, b, tol=tol)
            if fi >= best:
                x[i], best = xi, fi
            else:
                x[i] = old
            moved = max(moved, abs(x[i] - old))
        if moved < tol:
            break
    return np.asarray(x), best


def maximize_reward(env: Environment, theta, refine_steps: int = 20, tol: float = 1e-8):
    """Best trajectory and reward for the given weights.

    Low-dimensional spaces take the quadrature-grid argmax (first index wins
    ties) followed by per-coordinate golden-section refinement in the argmax
    cell.  Higher-dimensional spaces run a bounded quasi-Newton ascent from
    the best of a fixed candidate set (box center, corners, seeded uniform
    draws), then polish with the same coordinate refinement; rewards are
    concave in the flattened coordinates, so local ascent is global, and the
    polish step guards against early quasi-Newton stops at gradient kinks.
    """
    vec = env.theta_vector(theta)
    f = env.fast_reward(vec)
    lo, hi = env.flat_lo, env.flat_hi
    if env.flat_dim <= 3:
        points, _ = env.quadrature_grid()
        rewards = env.grid_rewards(vec)
        x0 = points[int(np.argmax(rewards))]
        half = (hi - lo) / env.grid_resolution
    else:
        corners = np.array(list(itertools.product(*zip(lo, hi))))
        draws = np.random.default_rng(0).uniform(lo, hi, size=(64, env.flat_dim))
        cands = np.vstack([[(lo + hi) / 2.0], corners, draws])
        x0 = cands[int(np.argmax(env.batch_rewards(cands, vec)))]
        res = minimize(lambda x: -f(x), x0, method="L-BFGS-B",
                       bounds=np.column_stack([lo, hi]))
        x0 = res.x
        half = hi - lo
    x, best = _coordinate_refine(f, x0, lo, hi, half, refine_steps, tol)
    return x, best


def optimal_trajectory(theta, env: Environment, refine_steps: int = 20) -> Trajectory:
    """The reward-maximizing trajectory for the given weights."""
    x, _ = maximize_reward(env, theta, refine_steps=refine_steps)
    return Trajectory.from_flat(x, env.state_dim)
