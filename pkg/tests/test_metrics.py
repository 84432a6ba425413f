import math

import numpy as np
import pytest

from normirl.core import ContractError, RewardParams, Trajectory
from normirl.metrics import EvalRecord, belief_error, regret, theta_error
from normirl.normalizers import IgnoreNormalizer, MeanSamplingNormalizer

EXACT_BELIEF_S0 = 0.9501490194732971
IGNORE_BELIEF_S0 = 0.031395139101022804


class TestThetaError:
    def test_hand_values(self):
        a = RewardParams.continuous([1.0, 0.0])
        b = RewardParams.continuous([0.0, 1.0])
        assert theta_error(a, a) == 0.0
        assert theta_error(a, b) == pytest.approx(math.sqrt(2.0), abs=1e-12)

    def test_three_four_five(self):
        a = RewardParams.continuous([0.6, 0.8])
        b = RewardParams.continuous([0.6, -0.8])
        assert theta_error(a, b) == pytest.approx(1.6, abs=1e-12)

    def test_requires_continuous_and_matching_dims(self, cup):
        cont2 = RewardParams.continuous([1.0, 0.0])
        cont3 = RewardParams.continuous([1.0, 0.0, 0.0])
        disc = RewardParams.discrete(0, cup.hypotheses)
        with pytest.raises(ContractError):
            theta_error(disc, cont2)
        with pytest.raises(ContractError):
            theta_error(cont2, cont3)


class TestBeliefError:
    def test_ignore_gap_is_frozen_working_example_gap(self, cup):
        # The reference belief runs through midpoint quadrature, which sits
        # within 2e-9 of the closed-form posterior used for the constants.
        xi = Trajectory(np.array([[0.0]]))
        gap = belief_error(IgnoreNormalizer(), xi, 1.0, cup)
        assert gap == pytest.approx(EXACT_BELIEF_S0 - IGNORE_BELIEF_S0, abs=1e-8)

    def test_sampling_error_shrinks_with_batch(self, cup):
        xi = Trajectory(np.array([[0.0]]))
        coarse = belief_error(MeanSamplingNormalizer(n=5, seed=0), xi, 1.0, cup)
        fine = belief_error(MeanSamplingNormalizer(n=20_000, seed=0), xi, 1.0, cup)
        assert fine < coarse
        assert fine < 0.02


class TestRegret:
    def test_zero_when_estimate_is_exact(self, path2):
        theta = RewardParams.continuous([0.6, 0.8])
        assert regret(theta, theta, path2) == 0.0

    def test_cup_hypothesis_swap_is_five_half_pi(self, cup):
        # Acting on a = pi/2 when the truth is a = 0 lands at s = pi/2:
        # shortfall -5 - (-5 (pi/2 + 1)) = 5 pi / 2.
        h0 = RewardParams.discrete(0, cup.hypotheses)
        h1 = RewardParams.discrete(1, cup.hypotheses)
        assert regret(h0, h1, cup) == pytest.approx(5.0 * math.pi / 2.0, abs=1e-4)

    def test_positive_for_wrong_direction(self, path2):
        true = RewardParams.continuous([1.0, 0.0])
        hat = RewardParams.continuous([0.0, 1.0])
        assert regret(true, hat, path2) > 0.05

    def test_small_estimate_error_gives_small_regret(self, path2):
        true = RewardParams.continuous([0.6, 0.8])
        nudged = true.vector + np.array([1e-3, -1e-3])
        hat = RewardParams.continuous(nudged / np.linalg.norm(nudged))
        assert 0.0 <= regret(true, hat, path2) < 1e-3


class TestEvalRecord:
    def _record(self, theta_true, theta_hat):
        return EvalRecord(environment="path", method="sample",
                          dependence="independent", beta=5.0, teacher_seed=7,
                          theta_true=theta_true, theta_hat=theta_hat,
                          error=0.125, regret=0.25, wall_seconds=1.5,
                          seconds_per_iteration=0.001)

    def test_result_row_continuous(self):
        rec = self._record(RewardParams.continuous([0.6, 0.8]),
                           RewardParams.continuous([1.0, 0.0]))
        assert rec.result_row() == [
            "path", "sample", "independent", "5", "7",
            "0.6;0.8", "1;0", "0.125", "0.25",
        ]

    def test_result_row_discrete(self, cup):
        rec = self._record(RewardParams.discrete(0, cup.hypotheses),
                           RewardParams.discrete(1, cup.hypotheses))
        row = rec.result_row()
        assert row[5] == "hypothesis:0"
        assert row[6] == "hypothesis:1"

    def test_timing_row(self):
        rec = self._record(RewardParams.continuous([0.6, 0.8]),
                           RewardParams.continuous([1.0, 0.0]))
        assert rec.timing_row() == [
            "path", "sample", "independent", "5", "7", "1.5", "0.001",
        ]

    def test_headers_are_frozen(self):
        assert EvalRecord.RESULT_HEADER == (
            "environment", "method", "dependence", "beta", "teacher_seed",
            "theta_true", "theta_hat", "error", "regret")
        assert EvalRecord.TIMING_HEADER == (
            "environment", "method", "dependence", "beta", "teacher_seed",
            "wall_seconds", "seconds_per_iteration")
