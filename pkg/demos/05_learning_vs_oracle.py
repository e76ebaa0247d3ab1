"""
Learning against the exhaustive bound
=====================================

At a scaled-down instance (1 AV, 1 V2V pair, 4 surface elements, 1-bit
phases) the per-state action space is small enough to enumerate: every
legal lending row x every codeword x an 11-point offload grid.  That
makes an honest per-state upper bound to compare the learned team
against, on the exact same frozen fading draws.
"""

import time

import numpy as np

from ricsnet import config, env, oracle, training

small = config.load_config("configs/desk.cfg", overrides=[
    "avs_per_cell=1", "v2v_per_cell=1", "rics_elements=4",
    "num_subblocks=1", "phase_bits=1",
    "episodes=120", "steps_per_episode=50",
    "learning_rate=5e-4", "epsilon_decay=0.999",
])
world = env.VehicularEnv(small)

# ----------------------------------------------------------------------
# 1. What the oracle does on one state: grid search over everything.
# ----------------------------------------------------------------------
state = world.reset(np.random.default_rng(42))
batches = world.draw_mc_batches(state, np.random.default_rng(1))
res = oracle.exhaustive_joint_search(world, state, batches=batches)
cell = res.cells[0]
print("exhaustive search on the first state:")
print("  evaluations :", res.evaluations)
print("  best value  : %.4f (safety %.4f, outage term %.4f)"
      % (res.value, cell.part1, cell.part2))
print("  codeword    : reflect %s transmit %s"
      % (cell.rics.reflect_idx, cell.rics.transmit_idx))
print("  lending row :", cell.share_row, " offload :", cell.rho_row)

neutral = world.compute_reward(state, world.neutral_action(), batches=batches)
print("  neutral action scores %.4f on the same draws" % neutral.reward)

# ----------------------------------------------------------------------
# 2. Train the two-agent team at this scale.
# ----------------------------------------------------------------------
t0 = time.perf_counter()
arts = training.train(small, seed=0)
print("\ntrained %d episodes x %d slots in %.1f s"
      % (small.train.episodes, small.train.steps_per_episode,
         time.perf_counter() - t0))
rewards = np.array([ep.reward for ep in arts.history])
print("episode reward, first 10 avg: %.3f   last 10 avg: %.3f"
      % (rewards[:10].mean(), rewards[-10:].mean()))
print("final epsilon %.3f, final lr %.2e"
      % (arts.history[-1].epsilon, arts.history[-1].lr))

# ----------------------------------------------------------------------
# 3. Greedy policy vs per-slot oracle on held-out states.  Both score
#    on identical frozen fading, so the gap is pure decision quality.
#    The oracle rho grid is 11-point, so a well-tuned continuous rho
#    can even edge past it.
# ----------------------------------------------------------------------
eval_rng = np.random.default_rng(999)
state = arts.env.reset(eval_rng, episode_index=small.train.episodes)
learned, bound = [], []
for slot in range(10):
    frozen = arts.env.draw_mc_batches(state, np.random.default_rng(100 + slot))
    obs_r = arts.env.rics_observations(state)
    obs_a = arts.env.av_observations(state)
    act = training.assemble_joint(arts.env, arts.team, obs_r, obs_a,
                                  eval_rng, greedy=True)
    got = arts.env.compute_reward(state, act, batches=frozen).reward
    best = oracle.exhaustive_joint_search(arts.env, state, batches=frozen).value
    learned.append(got)
    bound.append(best)
    state = arts.env.step(state, act, eval_rng).next_state
learned = np.array(learned)
bound = np.array(bound)
print("\nslot   learned   bound   fraction")
for i in range(10):
    print("  %d    %7.3f  %7.3f   %.3f" % (i, learned[i], bound[i],
                                           learned[i] / bound[i]))
print("mean fraction of the exhaustive bound: %.3f"
      % (learned.mean() / bound.mean()))
