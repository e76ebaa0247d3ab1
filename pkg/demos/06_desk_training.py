"""
Training at desk scale
======================

The benchmark instance: one cell, 4 AVs, 2 V2V pairs, an 8-element
surface at 2-bit phase resolution.  One surface controller (discrete
Q-learner with a twin target net) and four AV agents (hybrid learners
with a continuous offload head) share the team reward.  Run with
--full for the 150-episode benchmark schedule; the default trims to 60
episodes (about half a minute), enough to watch the collision penalty
get learned away even though the reward is still climbing.

Equivalent from the shell:  ricsnet train --config configs/desk.cfg
"""

import sys
import time

import numpy as np

from ricsnet import config, training

full = "--full" in sys.argv
overrides = [] if full else ["episodes=60"]
cfg = config.load_config("configs/desk.cfg", overrides=overrides)
E = cfg.train.episodes

print("training %d episodes x %d slots (seed 0)..." % (E, cfg.train.steps_per_episode))
t0 = time.perf_counter()


def report(stats):
    if (stats.episode + 1) % 10 == 0:
        print("  episode %3d  reward %7.3f  eps %.3f  collisions %.0f%%"
              % (stats.episode + 1, stats.reward, stats.epsilon,
                 100 * stats.collision_rate))


arts = training.train(cfg, seed=0, progress=report)
print("done in %.1f s" % (time.perf_counter() - t0))

# ----------------------------------------------------------------------
# 1. The learning curve, smoothed.  Early episodes explore (epsilon=1)
#    and trip the lending-collision penalty constantly; the curve
#    climbs as collisions die out and the offload heads tune rho.
# ----------------------------------------------------------------------
rewards = [ep.reward for ep in arts.history]
ma = training.moving_average(rewards, 10)
print("\n10-episode moving average:")
step = max(1, len(ma) // 8)
for i in range(0, len(ma), step):
    bar = "#" * max(0, int(8 + ma[i]))
    print("  ep %3d  %7.3f  %s" % (i + 1, ma[i], bar))
print("  ep %3d  %7.3f" % (len(ma), ma[-1]))

# ----------------------------------------------------------------------
# 2. Greedy evaluation vs a random policy, fresh episodes either way.
# ----------------------------------------------------------------------
greedy = training.evaluate(arts.env, arts.team, np.random.default_rng(123),
                           episodes=10, start_index=E)
random_ = training.random_rollouts(arts.env, np.random.default_rng(123),
                                   episodes=10, start_index=E)


def summarize(tag, stats):
    print("  %-7s reward %7.3f   safety sum %6.3f   outage term %7.3f   collisions %4.1f%%"
          % (tag, np.mean([s.reward for s in stats]),
             np.mean([s.part1 for s in stats]),
             np.mean([s.part2 for s in stats]),
             100 * np.mean([s.collision_rate for s in stats])))


print("\nper-slot averages over 10 evaluation episodes:")
summarize("greedy", greedy)
summarize("random", random_)
if not full:
    print("(the full 150-episode schedule ends around reward +2.2 with")
    print(" zero greedy collisions; rerun with --full to see it)")

# ----------------------------------------------------------------------
# 3. Persistence round trip.  A run directory carries the config, the
#    metrics table, every network, and the RNG cursor, so a reloaded
#    team evaluates identically.
# ----------------------------------------------------------------------
out_dir = "runs/demo06"
training.save_run(out_dir, arts)
again = training.load_run(out_dir)
re_eval = training.evaluate(again.env, again.team, np.random.default_rng(123),
                            episodes=10, start_index=E)
same = all(a.reward == b.reward for a, b in zip(greedy, re_eval))
print("\nsaved to %s; reloaded team reproduces the evaluation: %s" % (out_dir, same))
