"""
Learning from corrections that build on each other
==================================================

A teacher who physically corrects a robot does not produce independent
demonstrations: each correction starts from the motion the robot just
ran, and moving far from it costs effort.  Here the teacher draws each
correction from a Boltzmann model whose reward is the task reward minus
a squared-displacement penalty to the previous motion.  A learner can
either ignore that structure and treat the corrections as independent
demos, or model the chain.  Double MH handles the chained model's
normalizer (an integral over whole correction sequences) without ever
computing it.
"""

import numpy as np

from normirl import (
    Dataset,
    InnerConfig,
    MhConfig,
    RewardParams,
    TeacherSpec,
    double_mh_posterior,
    generate_dataset,
    make_environment,
    posterior_mean,
    theta_error,
    trajectory_reward,
)

env = make_environment("path", horizon=3, waypoint_dim=1, n_features=2,
                       correction_halfwidth=1.0)
rng = np.random.default_rng(7)

# A teacher who cares mostly about reaching the goal, a little about path
# length, corrects the robot's jerky initial motion three times.
theta_true = RewardParams.continuous(np.array([0.4, np.sqrt(1 - 0.16)]))
spec = TeacherSpec(theta_true, beta=10.0, k=3, dependence="dependent",
                   burn_in=2000, proposal_scale=0.1, penalty_weight=2.0)
data = generate_dataset(spec, env, rng)

print("Reward of each motion under the teacher's true weights:\n")
r0 = trajectory_reward(data.initial, theta_true, env)
print(f"  initial motion   {r0:8.4f}   waypoints {np.round(data.initial.flat, 3)}")
for i, xi in enumerate(data.trajectories):
    r = trajectory_reward(xi, theta_true, env)
    print(f"  correction {i}     {r:8.4f}   waypoints {np.round(xi.flat, 3)}")

print("\nCorrections drift toward better motions, but the effort penalty")
print("keeps each one near its predecessor, so early corrections are still")
print("poor motions in absolute terms.")

# Learn the weights twice from the same corrections: once under the
# chained model and once pretending they are independent demos.
cfg = MhConfig(iterations=2_000, burn_in=500, proposal_scale=0.2, seed=3)
inner = InnerConfig(iterations=500, proposal_scale=0.1)

print("\nDouble MH under both dataset views...")
for view in ("dependent", "independent"):
    ds = data if view == "dependent" else Dataset(data.trajectories, "independent")
    chain = double_mh_posterior(ds, spec.beta, env, env.default_prior(), cfg,
                                inner, penalty_weight=spec.penalty_weight)
    theta_hat = posterior_mean(chain)
    err = theta_error(theta_true, theta_hat)
    print(f"  {view:12s} view: theta_hat = {np.round(theta_hat.vector, 3)}"
          f"   error {err:.4f}")

print("\nThe independent view reads the early, still-bad corrections as")
print("trajectories the teacher liked, which drags the estimate off; the")
print("chained view attributes them to anchoring on the previous motion.")
print("One teacher is an anecdote: `irl run dependence-study --config")
print("configs/dependence_study.toml` repeats this twenty times for every")
print("method under both views.")
