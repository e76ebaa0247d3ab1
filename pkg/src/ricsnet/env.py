"""Multi-agent Markov game over the vehicular network.

Agents: one discrete phase agent per surface sub-block and one hybrid agent
per AV.  A joint action fixes every surface phase, every AV's channel-sharing
choice (0 = keep the channel to itself, k >= 1 lends it to V2V pair k), and
every AV's offload ratio.  The shared team reward is the summed driving
safety plus the mean-SINR shortfall of every V2V pair below the outage-safe
level, or a flat penalty when two AVs lend their channel to the same pair.

One environment instance is single-threaded; ``step`` is a pure function of
(state, action, rng stream position), so trajectories are reproducible from
the seed and terminated episodes cannot be stepped further.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import mec, phy
from .channel import (Csi, MobilityState, advance_slot, draw_cell_csi_batch,
                      draw_csi, init_positions)
from .config import RunConfig
from .mec import TaskSpec
from .phy import RicsAction


@dataclass
class JointAction:
    """One action per agent, grouped by cell."""

    rics: list[RicsAction]     # one per cell
    share_idx: np.ndarray      # (C, U) ints in [0, V]
    rho: np.ndarray            # (C, U) floats in [0, 1]


@dataclass
class GlobalState:
    """Everything the next step depends on."""

    mobility: MobilityState
    csi: list[Csi]             # one per cell
    prev_action: JointAction
    task_bits: np.ndarray      # (C, U)
    task_cycles: np.ndarray    # (C, U)
    task_deadline: np.ndarray  # (C, U)
    f_local: np.ndarray        # (C, U)
    episode_index: int
    slot_in_episode: int
    terminal: bool


@dataclass
class RewardBreakdown:
    reward: float
    part1: float               # summed safety over all AVs
    part2: float               # summed V2V mean-SINR shortfall (<= 0)
    penalized: bool
    violations: list
    safety: np.ndarray         # (C, U)
    av_rates: np.ndarray       # (C, U)
    v2v_rates: np.ndarray      # (C, V)
    v2v_mean_sinr: np.ndarray  # (C, V)


@dataclass
class StepOutcome:
    reward: float
    next_state: GlobalState
    terminal: bool
    breakdown: RewardBreakdown


def discounted_return(rewards, gamma: float) -> float:
    """sum_i gamma^i * rewards[i]."""
    total = 0.0
    factor = 1.0
    for r in rewards:
        total += factor * float(r)
        factor *= gamma
    return total


def actions_to_sharing(share_row: np.ndarray, num_avs: int,
                       num_pairs: int):
    """Binary sharing matrix from per-AV choices, plus conflict records.

    When several AVs lend their channel to the same pair, the lowest AV index
    keeps the assignment and the conflict is recorded.
    """
    share_row = np.asarray(share_row, dtype=int)
    if share_row.shape != (num_avs,):
        raise ValueError("actions_to_sharing: expected one choice per AV")
    if share_row.min(initial=0) < 0 or share_row.max(initial=0) > num_pairs:
        raise ValueError("actions_to_sharing: choice outside [0, num_pairs]")
    omega = np.zeros((num_avs, num_pairs))
    violations = []
    for v in range(1, num_pairs + 1):
        pickers = np.flatnonzero(share_row == v)
        if pickers.size == 0:
            continue
        omega[pickers[0], v - 1] = 1.0
        if pickers.size > 1:
            violations.append((v, tuple(int(u) for u in pickers)))
    return omega, violations


class RunningNorm:
    """Per-dimension running z-score (Welford); identity until two updates."""

    def __init__(self, dim: int):
        self.dim = dim
        self.count = 0
        self.mean = np.zeros(dim)
        self.m2 = np.zeros(dim)

    def update(self, x: np.ndarray) -> None:
        for row in np.atleast_2d(np.asarray(x, dtype=float)):
            self.count += 1
            delta = row - self.mean
            self.mean += delta / self.count
            self.m2 += delta * (row - self.mean)

    def normalize(self, x: np.ndarray) -> np.ndarray:
        if self.count < 2:
            return np.asarray(x, dtype=float)
        std = np.sqrt(self.m2 / (self.count - 1))
        return (np.asarray(x, dtype=float) - self.mean) / (std + 1e-8)

    def state_dict(self) -> dict:
        return {"count": self.count, "mean": self.mean.tolist(),
                "m2": self.m2.tolist()}

    def load_state_dict(self, state: dict) -> None:
        self.count = state["count"]
        self.mean = np.asarray(state["mean"], dtype=float)
        self.m2 = np.asarray(state["m2"], dtype=float)


def _complex_features(*arrays) -> np.ndarray:
    parts = []
    for a in arrays:
        flat = np.asarray(a).reshape(-1)
        parts.append(flat.real)
        parts.append(flat.imag)
    return np.concatenate(parts) if parts else np.zeros(0)


class VehicularEnv:
    """Simulator facade bundling config, observation builders, and reward."""

    def __init__(self, config: RunConfig):
        self.config = config
        self.topology = config.topology
        self.fading = config.fading
        self.rics = config.rics
        self.phy = config.phy
        self.compute = config.compute
        self.steps_per_episode = config.train.steps_per_episode
        self.penalty = config.train.penalty
        t = self.topology
        self.block = t.rics_elements // config.rics.num_subblocks
        self.n_phase_actions = (1 << config.rics.phase_bits) ** 2
        self._rics_feat_dim = 2 * self.block * (t.avs_per_cell + t.v2v_per_cell + 1)
        self._av_feat_dim = 2 * (t.v2v_per_cell + 1)
        self.rics_norm = RunningNorm(self._rics_feat_dim)
        self.av_norm = RunningNorm(self._av_feat_dim)
        self._threshold = phy.outage_threshold(config.phy)

    # ---- dimensions ----
    @property
    def rics_obs_dim(self) -> int:
        return self.n_phase_actions + self._rics_feat_dim

    @property
    def av_obs_dim(self) -> int:
        t = self.topology
        return 2 + (t.v2v_per_cell + 1) + 1 + self._av_feat_dim

    # ---- lifecycle ----
    def neutral_action(self) -> JointAction:
        t = self.topology
        q = self.rics.num_subblocks
        return JointAction(
            rics=[RicsAction(reflect_idx=np.zeros(q, dtype=int),
                             transmit_idx=np.zeros(q, dtype=int))
                  for _ in range(t.num_cells)],
            share_idx=np.zeros((t.num_cells, t.avs_per_cell), dtype=int),
            rho=np.full((t.num_cells, t.avs_per_cell), 0.5))

    def random_action(self, rng: np.random.Generator) -> JointAction:
        t = self.topology
        q = self.rics.num_subblocks
        n = 1 << self.rics.phase_bits
        return JointAction(
            rics=[RicsAction(reflect_idx=rng.integers(n, size=q),
                             transmit_idx=rng.integers(n, size=q))
                  for _ in range(t.num_cells)],
            share_idx=rng.integers(t.v2v_per_cell + 1,
                                   size=(t.num_cells, t.avs_per_cell)),
            rho=rng.random((t.num_cells, t.avs_per_cell)))

    def reset(self, rng: np.random.Generator, episode_index: int = 0) -> GlobalState:
        """New episode: fresh positions, tasks, local CPU speeds, channels."""
        t = self.topology
        shape = (t.num_cells, t.avs_per_cell)
        mobility = init_positions(t, rng)
        task_bits = rng.uniform(self.compute.s_min, self.compute.s_max, shape)
        task_cycles = rng.uniform(self.compute.cycles_min,
                                  self.compute.cycles_max, shape)
        f_local = rng.uniform(self.compute.f_local_min,
                              self.compute.f_local_max, shape)
        csi = draw_csi(mobility, self.fading, rng)
        return GlobalState(mobility=mobility, csi=csi,
                           prev_action=self.neutral_action(),
                           task_bits=task_bits, task_cycles=task_cycles,
                           task_deadline=np.full(shape, self.compute.max_delay),
                           f_local=f_local, episode_index=episode_index,
                           slot_in_episode=0, terminal=False)

    def _theta(self, action: RicsAction):
        if not self.rics.enabled:
            k = self.topology.rics_elements
            zero = np.zeros(k, dtype=complex)
            return zero, zero
        return phy.expand_action(action, self.rics)

    def draw_mc_batches(self, state: GlobalState,
                        rng: np.random.Generator) -> list:
        """One mean-SINR redraw batch per cell, reusable across candidate
        actions so that searches compare on identical noise."""
        return [draw_cell_csi_batch(state.mobility, c, self.fading, rng,
                                    self.phy.n_mc)
                for c in range(self.topology.num_cells)]

    def compute_reward(self, state: GlobalState, joint: JointAction,
                       rng: np.random.Generator | None = None, *,
                       batches: list | None = None) -> RewardBreakdown:
        """Team reward and diagnostics for acting in ``state``.

        Consumes randomness only for the V2V mean-SINR redraws; pass
        ``batches`` (from :meth:`draw_mc_batches`) to evaluate against frozen
        draws instead, which consumes no randomness.
        """
        if batches is None and rng is None:
            raise ValueError("compute_reward: need an rng or frozen batches")
        t = self.topology
        c_count, u_count, v_count = t.num_cells, t.avs_per_cell, t.v2v_per_cell
        safety = np.zeros((c_count, u_count))
        av_rates = np.zeros((c_count, u_count))
        v2v_rates = np.zeros((c_count, v_count))
        v2v_mean = np.zeros((c_count, v_count))
        violations = []
        part2 = 0.0
        # edge batches finish with their slowest task, across all cells
        compute_term = float(np.max(state.task_cycles)) / self.compute.f_mec_per_av

        for c in range(c_count):
            omega, cell_violations = actions_to_sharing(joint.share_idx[c],
                                                        u_count, v_count)
            violations.extend((c,) + v for v in cell_violations)
            theta_r, theta_t = self._theta(joint.rics[c])
            csi = state.csi[c]
            for u in range(u_count):
                gamma = phy.sinr_v2i(csi, theta_r, omega, self.phy, u)
                rate = phy.rate_v2i(gamma, self.phy, u_count)
                av_rates[c, u] = rate
                task = TaskSpec(data_bits=state.task_bits[c, u],
                                cpu_cycles=state.task_cycles[c, u],
                                max_delay=state.task_deadline[c, u])
                safety[c, u] = mec.safety_factor(float(joint.rho[c, u]), task,
                                                 rate, float(state.f_local[c, u]),
                                                 self.compute, compute_term)
            if v_count > 0:
                if batches is not None:
                    batch = batches[c]
                else:
                    batch = draw_cell_csi_batch(state.mobility, c, self.fading,
                                                rng, self.phy.n_mc)
                mean_sinr = phy.mean_sinr_v2v(state.mobility, c, theta_t, omega,
                                              self.fading, self.phy, rng,
                                              batch=batch)
                v2v_mean[c] = mean_sinr
                part2 += float(np.minimum(mean_sinr - self._threshold, 0.0).sum())
                for v in range(v_count):
                    gamma_v = phy.sinr_v2v(csi, theta_t, omega, self.phy, v)
                    v2v_rates[c, v] = phy.rate_v2v(gamma_v, self.phy, v_count)

        part1 = float(safety.sum())
        penalized = bool(violations)
        reward = -self.penalty if penalized else part1 + part2
        return RewardBreakdown(reward=reward, part1=part1, part2=part2,
                               penalized=penalized, violations=violations,
                               safety=safety, av_rates=av_rates,
                               v2v_rates=v2v_rates, v2v_mean_sinr=v2v_mean)

    def step(self, state: GlobalState, joint: JointAction,
             rng: np.random.Generator) -> StepOutcome:
        """Apply a joint action, collect the reward, advance one slot."""
        if state.terminal:
            raise RuntimeError("step: episode already terminated; reset first")
        breakdown = self.compute_reward(state, joint, rng)
        mobility = advance_slot(state.mobility, self.topology)
        csi = draw_csi(mobility, self.fading, rng)
        slot = state.slot_in_episode + 1
        next_state = GlobalState(mobility=mobility, csi=csi, prev_action=joint,
                                 task_bits=state.task_bits,
                                 task_cycles=state.task_cycles,
                                 task_deadline=state.task_deadline,
                                 f_local=state.f_local,
                                 episode_index=state.episode_index,
                                 slot_in_episode=slot,
                                 terminal=slot >= self.steps_per_episode)
        return StepOutcome(reward=breakdown.reward, next_state=next_state,
                           terminal=next_state.terminal, breakdown=breakdown)

    # ---- observations ----
    def rics_observations(self, state: GlobalState,
                          update: bool = False) -> np.ndarray:
        """(C, Q, dim): previous own action one-hot plus the sub-block's
        channel features (real/imag, running z-score)."""
        t = self.topology
        q_count = self.rics.num_subblocks
        out = np.zeros((t.num_cells, q_count, self.rics_obs_dim))
        h = self.rics.phase_bits
        for c in range(t.num_cells):
            csi = state.csi[c]
            flat_prev = state.prev_action.rics[c].to_flat(h)
            for q in range(q_count):
                rows = slice(q * self.block, (q + 1) * self.block)
                feats = _complex_features(csi.h_ur[:, rows], csi.h_rv[:, rows],
                                          csi.h_rb[rows])
                if update:
                    self.rics_norm.update(feats)
                one_hot = np.zeros(self.n_phase_actions)
                one_hot[int(flat_prev[q])] = 1.0
                out[c, q] = np.concatenate([one_hot,
                                            self.rics_norm.normalize(feats)])
        return out

    def av_observations(self, state: GlobalState,
                        update: bool = False) -> np.ndarray:
        """(C, U, dim): powers, previous own action, own channel features."""
        t = self.topology
        out = np.zeros((t.num_cells, t.avs_per_cell, self.av_obs_dim))
        powers = np.array([self.phy.p_av_dbm, self.phy.p_v2v_dbm]) / 30.0
        for c in range(t.num_cells):
            csi = state.csi[c]
            for u in range(t.avs_per_cell):
                feats = _complex_features(csi.h_uv[u], csi.h_ub[u:u + 1])
                if update:
                    self.av_norm.update(feats)
                one_hot = np.zeros(t.v2v_per_cell + 1)
                one_hot[int(state.prev_action.share_idx[c, u])] = 1.0
                prev_rho = np.array([state.prev_action.rho[c, u]])
                out[c, u] = np.concatenate([powers, one_hot, prev_rho,
                                            self.av_norm.normalize(feats)])
        return out

    def norm_state_dict(self) -> dict:
        return {"rics": self.rics_norm.state_dict(),
                "av": self.av_norm.state_dict()}

    def load_norm_state_dict(self, state: dict) -> None:
        self.rics_norm.load_state_dict(state["rics"])
        self.av_norm.load_state_dict(state["av"])
