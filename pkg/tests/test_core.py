import math
import pickle

import numpy as np
import pytest

from normirl.core import (
    ConfigError,
    ContractError,
    Dataset,
    DiscreteUniformPrior,
    RewardParams,
    Trajectory,
    UniformSpherePrior,
    dataset_reward_dependent,
    dataset_reward_independent,
    feature_vector,
    fmt_float,
    state_reward,
    trajectory_distance,
    trajectory_reward,
)

HALF_PI = math.pi / 2


class TestFmtFloat:
    def test_nine_significant_digits(self):
        assert fmt_float(math.pi) == "3.14159265"
        assert fmt_float(1.0) == "1"
        assert fmt_float(-0.25) == "-0.25"
        assert fmt_float(1e-12) == "1e-12"

    def test_round_trip_close(self):
        x = 0.123456789123
        assert abs(float(fmt_float(x)) - x) < 1e-9


class TestRewardParams:
    def test_continuous_requires_unit_norm(self):
        RewardParams.continuous([1.0, 0.0])
        RewardParams.continuous([0.6, 0.8])
        with pytest.raises(ContractError):
            RewardParams.continuous([1.0, 1.0])
        with pytest.raises(ContractError):
            RewardParams.continuous([0.5])

    def test_norm_tolerance_is_tight(self):
        v = np.array([1.0 + 5e-10, 0.0])
        RewardParams.continuous(v / 1.0)  # within 1e-9 of unit
        with pytest.raises(ContractError):
            RewardParams.continuous(np.array([1.0 + 5e-8, 0.0]))

    def test_discrete_bounds(self):
        p = RewardParams.discrete(1, (0.0, HALF_PI))
        assert p.hypothesis_value == HALF_PI
        assert not p.is_continuous
        with pytest.raises(ContractError):
            RewardParams.discrete(2, (0.0, HALF_PI))
        with pytest.raises(ContractError):
            RewardParams.discrete(0, (0.0,))

    def test_exactly_one_kind(self):
        with pytest.raises(ContractError):
            RewardParams(vector=np.array([1.0, 0.0]), index=0,
                         hypotheses=(0.0, 1.0))

    def test_key_distinguishes(self):
        a = RewardParams.continuous([1.0, 0.0])
        b = RewardParams.continuous([0.0, 1.0])
        c = RewardParams.discrete(0, (0.0, HALF_PI))
        d = RewardParams.discrete(1, (0.0, HALF_PI))
        assert a.key() != b.key()
        assert c.key() != d.key()
        assert a.key() != c.key()
        assert a.key() == RewardParams.continuous([1.0, 0.0]).key()

    def test_vector_is_read_only(self):
        p = RewardParams.continuous([1.0, 0.0])
        with pytest.raises(ValueError):
            p.vector[0] = 0.5

    def test_hypothesis_value_continuous_raises(self):
        with pytest.raises(ContractError):
            _ = RewardParams.continuous([1.0, 0.0]).hypothesis_value


class TestTrajectory:
    def test_shape_and_flat(self):
        t = Trajectory(np.array([[0.1], [0.2], [0.3]]))
        assert t.horizon == 3
        assert t.state_dim == 1
        np.testing.assert_array_equal(t.flat, [0.1, 0.2, 0.3])

    def test_from_flat_round_trip(self):
        flat = np.array([1.0, 2.0, 3.0, 4.0])
        t = Trajectory.from_flat(flat, state_dim=2)
        assert t.states.shape == (2, 2)
        np.testing.assert_array_equal(t.flat, flat)

    def test_rejects_bad_shapes(self):
        with pytest.raises(ContractError):
            Trajectory(np.array([1.0, 2.0]))
        with pytest.raises(ContractError):
            Trajectory(np.array([[np.nan]]))

    def test_states_are_read_only(self):
        t = Trajectory(np.array([[0.5]]))
        with pytest.raises(ValueError):
            t.states[0, 0] = 1.0


class TestTrajectoryDistance:
    def test_known_value(self):
        a = Trajectory(np.array([[0.0], [0.0]]))
        b = Trajectory(np.array([[3.0], [4.0]]))
        assert trajectory_distance(a, b) == pytest.approx(5.0)

    def test_shape_mismatch_raises(self):
        a = Trajectory(np.array([[0.0]]))
        b = Trajectory(np.array([[0.0], [1.0]]))
        with pytest.raises(ContractError):
            trajectory_distance(a, b)

    def test_metric_properties(self, rng):
        for _ in range(25):
            a = Trajectory(rng.normal(size=(3, 2)))
            b = Trajectory(rng.normal(size=(3, 2)))
            d = trajectory_distance(a, b)
            assert d >= 0.0
            assert d == pytest.approx(trajectory_distance(b, a))
            assert trajectory_distance(a, a) == 0.0


class TestDataset:
    def test_mode_validation(self):
        t = Trajectory(np.array([[0.5]]))
        Dataset((t,), "independent")
        with pytest.raises(ContractError):
            Dataset((t,), "iid")
        with pytest.raises(ContractError):
            Dataset((), "independent")

    def test_dependent_requires_matching_initial(self):
        t = Trajectory(np.array([[0.5]]))
        with pytest.raises(ContractError):
            Dataset((t,), "dependent")
        bad = Trajectory(np.array([[0.5], [0.5]]))
        with pytest.raises(ContractError):
            Dataset((t,), "dependent", initial=bad)
        d = Dataset((t,), "dependent", initial=Trajectory(np.array([[0.1]])))
        assert d.size == 1

    def test_shared_shape_enforced(self):
        a = Trajectory(np.array([[0.5]]))
        b = Trajectory(np.array([[0.5], [0.6]]))
        with pytest.raises(ContractError):
            Dataset((a, b), "independent")


class TestDatasetRewards:
    def test_independent_is_sum(self, cup, rng):
        theta = RewardParams.discrete(0, cup.hypotheses)
        for _ in range(10):
            trajs = tuple(
                Trajectory(rng.uniform(0.0, HALF_PI, size=(1, 1))) for _ in range(3))
            data = Dataset(trajs, "independent")
            total = sum(trajectory_reward(t, theta, cup) for t in trajs)
            assert dataset_reward_independent(data, theta, cup) == pytest.approx(total)

    def test_independent_rejects_dependent(self, cup):
        t = Trajectory(np.array([[0.5]]))
        data = Dataset((t,), "dependent", initial=Trajectory(np.array([[0.1]])))
        theta = RewardParams.discrete(0, cup.hypotheses)
        with pytest.raises(ContractError):
            dataset_reward_independent(data, theta, cup)

    def test_dependent_hand_value(self, cup):
        # Corrections 0.2 then 0.6 starting from 0.0 at theta = pi/2:
        # r(s) = -(pi/2 - s), penalty 2 * (0.04 + 0.16).
        theta = RewardParams.discrete(1, cup.hypotheses)
        data = Dataset(
            (Trajectory(np.array([[0.2]])), Trajectory(np.array([[0.6]]))),
            "dependent", initial=Trajectory(np.array([[0.0]])))
        expected = -(HALF_PI - 0.2) - (HALF_PI - 0.6) - 2.0 * (0.04 + 0.16)
        got = dataset_reward_dependent(data, theta, cup, penalty_weight=2.0)
        assert got == pytest.approx(expected, abs=1e-12)

    def test_dependent_matches_direct_formula(self, cup, rng):
        theta = RewardParams.discrete(1, cup.hypotheses)
        for _ in range(10):
            chain = rng.uniform(0.0, HALF_PI, size=4)
            init = Trajectory(np.array([[chain[0]]]))
            trajs = tuple(Trajectory(np.array([[s]])) for s in chain[1:])
            data = Dataset(trajs, "dependent", initial=init)
            expected = sum(trajectory_reward(t, theta, cup) for t in trajs)
            expected -= 1.5 * float(np.sum(np.diff(chain) ** 2))
            got = dataset_reward_dependent(data, theta, cup, penalty_weight=1.5)
            assert got == pytest.approx(expected, abs=1e-10)


class TestWrappers:
    def test_wrappers_agree_with_env(self, cup):
        theta = RewardParams.discrete(0, cup.hypotheses)
        t = Trajectory(np.array([[0.7]]))
        assert trajectory_reward(t, theta, cup) == cup.trajectory_reward(t, theta)
        np.testing.assert_array_equal(feature_vector(t, cup),
                                      cup.trajectory_features(t))
        assert state_reward(np.array([0.7]), theta, cup) == pytest.approx(
            cup.trajectory_reward(t, theta))


class TestUniformSpherePrior:
    def test_samples_have_unit_norm(self, rng):
        prior = UniformSpherePrior(3)
        for _ in range(50):
            theta = prior.sample(rng)
            assert np.linalg.norm(theta.vector) == pytest.approx(1.0, abs=1e-12)

    def test_orthant_samples_nonnegative(self, rng):
        prior = UniformSpherePrior(2, orthant=True)
        draws = np.stack([prior.sample(rng).vector for _ in range(200)])
        assert np.all(draws >= 0.0)

    def test_log_prob(self):
        prior = UniformSpherePrior(2, orthant=True)
        assert prior.log_prob(RewardParams.continuous([0.6, 0.8])) == 0.0
        assert prior.log_prob(RewardParams.continuous([0.6, -0.8])) == -math.inf
        full = UniformSpherePrior(2)
        assert full.log_prob(RewardParams.continuous([0.6, -0.8])) == 0.0

    def test_dim_mismatch_raises(self):
        prior = UniformSpherePrior(3)
        with pytest.raises(ContractError):
            prior.log_prob(RewardParams.continuous([1.0, 0.0]))

    def test_full_sphere_mean_near_zero(self):
        prior = UniformSpherePrior(2)
        rng = np.random.default_rng(7)
        draws = np.stack([prior.sample(rng).vector for _ in range(4000)])
        assert np.linalg.norm(draws.mean(axis=0)) < 0.05

    def test_bad_dim(self):
        with pytest.raises(ConfigError):
            UniformSpherePrior(1)


class TestDiscreteUniformPrior:
    def test_log_prob_is_uniform(self):
        prior = DiscreteUniformPrior((0.0, HALF_PI))
        theta = RewardParams.discrete(0, (0.0, HALF_PI))
        assert prior.log_prob(theta) == pytest.approx(-math.log(2.0))

    def test_sample_frequencies(self):
        prior = DiscreteUniformPrior((0.0, HALF_PI))
        rng = np.random.default_rng(3)
        draws = [prior.sample(rng).index for _ in range(4000)]
        assert np.mean(np.array(draws) == 0) == pytest.approx(0.5, abs=0.03)

    def test_continuous_rejected(self):
        prior = DiscreteUniformPrior((0.0, HALF_PI))
        with pytest.raises(ContractError):
            prior.log_prob(RewardParams.continuous([1.0, 0.0]))

    def test_needs_two_hypotheses(self):
        with pytest.raises(ConfigError):
            DiscreteUniformPrior((0.0,))


class TestPickling:
    def test_params_and_trajectories_round_trip(self):
        p = RewardParams.continuous([0.6, 0.8])
        t = Trajectory(np.array([[0.1], [0.2]]))
        p2 = pickle.loads(pickle.dumps(p))
        t2 = pickle.loads(pickle.dumps(t))
        assert p2.key() == p.key()
        np.testing.assert_array_equal(t2.states, t.states)
