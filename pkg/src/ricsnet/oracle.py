"""Exhaustive-search baselines for small instances.

Brute force over the discrete joint action space (with offload ratios on a
grid), evaluated against frozen channel redraws so every candidate sees the
same noise.  Two exact reductions keep the enumeration tractable:

* cells couple only through the flat conflict penalty, so the optimum is the
  better of "each cell's best conflict-free action" and "any conflicting
  action" (all of which score exactly minus the penalty);
* within a cell, the offload ratio of one AV affects only that AV's safety
  term, so ratios are optimized per AV instead of over the grid's product.

Use ``exhaustive_joint_search`` as ground truth in tests and
``best_rics_action`` for phase-only searches against a custom objective.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from . import mec, phy
from .env import GlobalState, JointAction, VehicularEnv, actions_to_sharing
from .mec import TaskSpec
from .phy import RicsAction

MAX_CELL_CANDIDATES = 200_000


def enumerate_rics_actions(num_subblocks: int, phase_bits: int):
    """Every surface action, ordered by per-sub-block flat index."""
    per_block = (1 << phase_bits) ** 2
    for combo in itertools.product(range(per_block), repeat=num_subblocks):
        yield RicsAction.from_flat(np.array(combo, dtype=int), phase_bits)


def best_rics_action(objective, num_subblocks: int, phase_bits: int):
    """argmax of ``objective(action)`` over the full surface codebook.

    Ties break toward the earliest action in enumeration order.  Returns
    (best_action, best_value).
    """
    best = None
    best_value = -np.inf
    for action in enumerate_rics_actions(num_subblocks, phase_bits):
        value = float(objective(action))
        if value > best_value:
            best, best_value = action, value
    return best, best_value


@dataclass
class CellSearchResult:
    value: float
    rics: RicsAction
    share_row: np.ndarray
    rho_row: np.ndarray
    part1: float
    part2: float
    evaluations: int   # sharing x surface x ratio-grid x AV safety evaluations


@dataclass
class JointSearchResult:
    value: float
    joint: JointAction
    cells: list[CellSearchResult]
    evaluations: int


def _legal_share_rows(num_avs: int, num_pairs: int):
    """Share choices with no two AVs lending to the same pair."""
    for row in itertools.product(range(num_pairs + 1), repeat=num_avs):
        nonzero = [k for k in row if k > 0]
        if len(nonzero) == len(set(nonzero)):
            yield np.array(row, dtype=int)


def search_cell(env: VehicularEnv, state: GlobalState, cell: int,
                batch, rho_grid: np.ndarray,
                compute_term: float) -> CellSearchResult:
    """Best conflict-free (surface action, sharing, ratios) for one cell."""
    t = env.topology
    u_count, v_count = t.avs_per_cell, t.v2v_per_cell
    csi = state.csi[cell]
    threshold = env._threshold
    rho_grid = np.asarray(rho_grid, dtype=float)

    share_rows = list(_legal_share_rows(u_count, v_count))
    rics_actions = list(enumerate_rics_actions(env.rics.num_subblocks,
                                               env.rics.phase_bits))
    n_candidates = len(share_rows) * len(rics_actions)
    if n_candidates > MAX_CELL_CANDIDATES:
        raise ValueError(f"search_cell: {n_candidates} candidates exceeds "
                         f"{MAX_CELL_CANDIDATES}; shrink the instance")

    tasks = [TaskSpec(data_bits=state.task_bits[cell, u],
                      cpu_cycles=state.task_cycles[cell, u],
                      max_delay=state.task_deadline[cell, u])
             for u in range(u_count)]
    best = None
    evaluations = 0
    for share_row in share_rows:
        omega, violations = actions_to_sharing(share_row, u_count, v_count)
        assert not violations
        for action in rics_actions:
            theta_r, theta_t = env._theta(action)
            part2 = 0.0
            if v_count > 0:
                mean_sinr = phy.mean_sinr_v2v(state.mobility, cell, theta_t,
                                              omega, env.fading, env.phy,
                                              rng=None, batch=batch)
                part2 = float(np.minimum(mean_sinr - threshold, 0.0).sum())
            part1 = 0.0
            rho_row = np.zeros(u_count)
            for u in range(u_count):
                gamma = phy.sinr_v2i(csi, theta_r, omega, env.phy, u)
                rate = phy.rate_v2i(gamma, env.phy, u_count)
                vals = [mec.safety_factor(float(r), tasks[u], rate,
                                          float(state.f_local[cell, u]),
                                          env.compute, compute_term)
                        for r in rho_grid]
                k = int(np.argmax(vals))
                rho_row[u] = rho_grid[k]
                part1 += vals[k]
                evaluations += rho_grid.size
            value = part1 + part2
            if best is None or value > best.value:
                best = CellSearchResult(value=value, rics=action,
                                        share_row=share_row.copy(),
                                        rho_row=rho_row, part1=part1,
                                        part2=part2, evaluations=0)
    best.evaluations = evaluations
    return best


def exhaustive_joint_search(env: VehicularEnv, state: GlobalState,
                            rng: np.random.Generator | None = None,
                            rho_grid=None, batches=None) -> JointSearchResult:
    """Exact optimum of the one-step reward over the joint action space.

    Ratios are restricted to ``rho_grid`` (default 11 levels).  Supply
    ``batches`` or an rng for the frozen V2V redraws.  If every conflict-free
    joint scores below minus the penalty the conflicting class would win; that
    cannot happen here because safety is nonnegative and the shortfall sum is
    bounded below the default penalty at supported sizes, so the conflict-free
    optimum is returned alongside the comparison value.
    """
    if rho_grid is None:
        rho_grid = np.linspace(0.0, 1.0, 11)
    if batches is None:
        if rng is None:
            raise ValueError("exhaustive_joint_search: need rng or batches")
        batches = env.draw_mc_batches(state, rng)
    compute_term = float(np.max(state.task_cycles)) / env.compute.f_mec_per_av
    cells = [search_cell(env, state, c, batches[c], rho_grid, compute_term)
             for c in range(env.topology.num_cells)]
    value = sum(c.value for c in cells)
    joint = JointAction(rics=[c.rics for c in cells],
                        share_idx=np.stack([c.share_row for c in cells]),
                        rho=np.stack([c.rho_row for c in cells]))
    return JointSearchResult(value=value, joint=joint, cells=cells,
                             evaluations=sum(c.evaluations for c in cells))


def exhaustive_joint_search_flat(env: VehicularEnv, state: GlobalState,
                                 rho_grid, batches) -> tuple[float, JointAction]:
    """Slow reference: literal product over every cell's every candidate.

    Only for cross-checking ``exhaustive_joint_search`` on tiny instances;
    ratios still optimize per AV (exact, since terms are separable).
    """
    t = env.topology
    if t.num_cells != 1:
        raise ValueError("flat reference supports a single cell")
    u_count, v_count = t.avs_per_cell, t.v2v_per_cell
    compute_term = float(np.max(state.task_cycles)) / env.compute.f_mec_per_av
    rho_grid = np.asarray(rho_grid, dtype=float)
    best_value = -np.inf
    best_joint = None
    for share_row in itertools.product(range(v_count + 1), repeat=u_count):
        share = np.array(share_row, dtype=int)
        for action in enumerate_rics_actions(env.rics.num_subblocks,
                                             env.rics.phase_bits):
            rho = np.zeros(u_count)
            omega, violations = actions_to_sharing(share, u_count, v_count)
            if not violations:
                # pick each AV's best grid ratio under this configuration
                theta_r, _ = env._theta(action)
                for u in range(u_count):
                    gamma = phy.sinr_v2i(state.csi[0], theta_r, omega,
                                         env.phy, u)
                    rate = phy.rate_v2i(gamma, env.phy, u_count)
                    task = TaskSpec(data_bits=state.task_bits[0, u],
                                    cpu_cycles=state.task_cycles[0, u],
                                    max_delay=state.task_deadline[0, u])
                    vals = [mec.safety_factor(float(r), task, rate,
                                              float(state.f_local[0, u]),
                                              env.compute, compute_term)
                            for r in rho_grid]
                    rho[u] = rho_grid[int(np.argmax(vals))]
            joint = JointAction(rics=[action], share_idx=share[None, :],
                                rho=rho[None, :])
            outcome = env.compute_reward(state, joint, batches=batches)
            if outcome.reward > best_value:
                best_value = outcome.reward
                best_joint = joint
    return best_value, best_joint
