"""
Task splitting and the safety objective
=======================================

Each AV splits a perception task: a fraction rho of the data goes to
the edge server over the uplink, the rest runs on the local CPU.  Both
branches run in parallel, so completion time is the slower one.  The
reward the agents maximize is accuracy per second of completion time,
which rewards fast AND offloaded (the server model is more accurate).
"""

import numpy as np

from ricsnet import config, mec

cfg = config.load_config("configs/desk.cfg")
comp = cfg.compute
rng = np.random.default_rng(11)

task = mec.draw_task(comp, rng)
f_local = 2.0e9
rate = 4.0e6
print("task: %.2f Mbit, %.2f Gcycles, deadline %.2f s"
      % (task.data_bits / 1e6, task.cpu_cycles / 1e9, task.max_delay))
print("local CPU %.1f GHz, uplink %.1f Mbit/s, server slice %.0f GHz"
      % (f_local / 1e9, rate / 1e6, comp.f_mec_per_av / 1e9))

# ----------------------------------------------------------------------
# 1. The two branches cross.  Local work shrinks as rho grows, the
#    upload grows; the slower branch sets the completion time, and the
#    accuracy blend rises with rho, so safety peaks near the crossing
#    or at full offload when the link is fast enough.
# ----------------------------------------------------------------------
print("\n rho    local(s)  offload(s)  accuracy  safety(1/s)")
for rho in (0.0, 0.25, 0.5, 0.75, 0.9, 1.0):
    tl = mec.local_delay(rho, task, f_local)
    to = mec.offload_delay(rho, task, rate, comp)
    acc = mec.avg_accuracy(rho, comp)
    s = mec.safety_factor(rho, task, rate, f_local, comp)
    print(" %.2f   %7.3f   %7.3f     %.3f    %7.3f" % (rho, tl, to, acc, s))

rho_star, s_star = mec.best_offload_ratio(task, rate, f_local, comp)
print("best split rho = %.3f, safety = %.3f" % (rho_star, s_star))

# ----------------------------------------------------------------------
# 2. The link rate moves the optimum.  A starved uplink forces local
#    work; a fast one makes full offload win outright.
# ----------------------------------------------------------------------
print("\n uplink (Mbit/s)   best rho   safety")
for r in (0.2e6, 1e6, 3e6, 10e6, 30e6):
    rho_b, s_b = mec.best_offload_ratio(task, r, f_local, comp)
    print("    %8.1f       %.3f    %7.3f" % (r / 1e6, rho_b, s_b))

# Dead link: any rho > 0 is undeliverable and scores zero; rho = 0
# still works because nothing needs the channel.
print("\ndead link, rho 0.5 ->", mec.safety_factor(0.5, task, 0.0, f_local, comp))
print("dead link, rho 0.0 -> %.3f" % mec.safety_factor(0.0, task, 0.0, f_local, comp))

# ----------------------------------------------------------------------
# 3. Shared server coupling.  The server pins one compute slot per AV,
#    and a batch of uploads finishes when the heaviest one does; passing
#    that worst-case compute time slows everyone in the batch.
# ----------------------------------------------------------------------
heavy = comp.cycles_max / comp.f_mec_per_av
own = task.cpu_cycles / comp.f_mec_per_av
s_alone = mec.safety_factor(1.0, task, rate, f_local, comp)
s_batch = mec.safety_factor(1.0, task, rate, f_local, comp, compute_time=heavy)
print("\nserver compute, own task only : %.4f s -> safety %.3f" % (own, s_alone))
print("server compute, worst in batch: %.4f s -> safety %.3f" % (heavy, s_batch))

# ----------------------------------------------------------------------
# 4. Optional hard deadline.  The default scoring is soft (slow is just
#    low safety); flipping enforce_deadline zeroes any split that blows
#    the per-task budget.
# ----------------------------------------------------------------------
strict = config.ComputeConfig(
    f_local_min=comp.f_local_min, f_local_max=comp.f_local_max,
    f_mec_per_av=comp.f_mec_per_av, accuracy_ratio=comp.accuracy_ratio,
    bs_accuracy=comp.bs_accuracy, s_min=comp.s_min, s_max=comp.s_max,
    cycles_min=comp.cycles_min, cycles_max=comp.cycles_max,
    max_delay=comp.max_delay, enforce_deadline=True)
slow_rate = 0.5e6
print("\nslow link, rho=1: completion %.2f s vs deadline %.2f s"
      % (mec.offload_delay(1.0, task, slow_rate, comp), task.max_delay))
print("  soft scoring  ->", round(mec.safety_factor(1.0, task, slow_rate, f_local, comp), 3))
print("  hard deadline ->", mec.safety_factor(1.0, task, slow_rate, f_local, strict))
