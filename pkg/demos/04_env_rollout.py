"""
One episode inside the decision loop
====================================

The environment ties the pieces together.  Every slot, the surface
controller picks a phase codeword and each AV picks (channel to lend,
offload split).  The scalar team reward is

    sum of AV safety factors  +  V2V outage shortfall (<= 0)
    or -penalty when two AVs lend the same channel.

This demo resets an episode, walks it with random actions, and pokes at
the reward pieces.
"""

import numpy as np

from ricsnet import config, env, phy

cfg = config.load_config("configs/desk.cfg")
world = env.VehicularEnv(cfg)
rng = np.random.default_rng(3)

state = world.reset(rng)
U = cfg.topology.avs_per_cell
V = cfg.topology.v2v_per_cell
print("episode constants: f_local (GHz) =", np.round(state.f_local / 1e9, 2))
print("task bits (Mbit) =", np.round(state.task_bits / 1e6, 2))
print("surface controller observes %d values (channel features + last codeword)"
      % world.rics_obs_dim)
print("each AV observes %d values (own links + last action + task)"
      % world.av_obs_dim)

# ----------------------------------------------------------------------
# 1. The do-nothing baseline: codeword 0, nobody lends (share 0 means
#    keep the channel), half offload.
# ----------------------------------------------------------------------
out = world.step(state, world.neutral_action(), rng)
b = out.breakdown
print("\nneutral action:")
print("  reward %.3f = safety sum %.3f + outage shortfall %.3f"
      % (b.reward, b.part1, b.part2))
print("  per-AV safety:", np.round(b.safety[0], 3))
print("  per-AV uplink (Mbit/s):", np.round(b.av_rates[0] / 1e6, 2))
print("  V2V mean SINR: %s, comfortably above the outage-safe floor %.3f"
      % (np.format_float_scientific(b.v2v_mean_sinr[0].min(), 2),
         phy.outage_threshold(cfg.phy)))

# ----------------------------------------------------------------------
# 2. A full random episode.  Conflicts happen whenever two AVs pick the
#    same pair, and each one costs the whole team the flat penalty.
# ----------------------------------------------------------------------
state = world.reset(np.random.default_rng(3))
rewards = []
conflicts = 0
while not state.terminal:
    out = world.step(state, world.random_action(rng), rng)
    rewards.append(out.reward)
    conflicts += out.breakdown.penalized
    state = out.next_state
rewards = np.asarray(rewards)
print("\nrandom policy, %d slots:" % rewards.size)
print("  mean reward %.3f, best %.3f, penalized slots %d (%.0f%%)"
      % (rewards.mean(), rewards.max(), conflicts, 100 * conflicts / rewards.size))
print("  discounted return (gamma=%.2f): %.3f"
      % (cfg.train.discount, env.discounted_return(list(rewards), cfg.train.discount)))

# ----------------------------------------------------------------------
# 3. Forcing a collision.  Two AVs lending channel 1 is illegal; the
#    lowest index keeps it, the step reports the clash, and the reward
#    collapses to -penalty regardless of physics.
# ----------------------------------------------------------------------
state = world.reset(np.random.default_rng(3))
bad = world.neutral_action()
bad.share_idx[0, 0] = 1
bad.share_idx[0, 1] = 1
out = world.step(state, bad, rng)
print("\nforced clash on pair 1: reward = %.1f, violations = %s"
      % (out.reward, out.breakdown.violations))

# ----------------------------------------------------------------------
# 4. Same state, same action, same draws: the reward is reproducible;
#    fresh scattered fading moves only the outage term.
# ----------------------------------------------------------------------
state = world.reset(np.random.default_rng(3))
act = world.neutral_action()
batches = world.draw_mc_batches(state, np.random.default_rng(77))
r1 = world.compute_reward(state, act, batches=batches)
r2 = world.compute_reward(state, act, batches=batches)
r3 = world.compute_reward(state, act, rng=np.random.default_rng(78))
print("\nfrozen fading twice :", r1.reward == r2.reward)
print("fresh fading        : part1 %.6f == %.6f, part2 %.4f vs %.4f"
      % (r1.part1, r3.part1, r1.part2, r3.part2))
