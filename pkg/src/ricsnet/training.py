"""Training loop, evaluation rollouts, metrics, and run persistence.

Centralized-training / decentralized-execution: every agent stores the shared
team reward with its own local observation, samples its own replay batch
every step once warm, and soft-updates its targets after every gradient step.
Exploration decays per step; learning rates decay per episode on a hyperbolic
schedule.

Metric rows serialize with ``repr`` floats so CSV files are byte-identical
across reruns of the same seed and parse back to the exact values.
"""
from __future__ import annotations

import json
import os
from dataclasses import dataclass, fields

import numpy as np

from .agents import DdqnAgent, MpdqnAgent, Transition, decay_lr
from .config import RunConfig, config_from_lines
from .env import GlobalState, JointAction, VehicularEnv, discounted_return
from .phy import RicsAction

TEAM_FORMAT_VERSION = 1


@dataclass
class AgentTeam:
    """One discrete agent per (cell, sub-block), one hybrid per (cell, AV)."""

    rics: list[list[DdqnAgent]]
    av: list[list[MpdqnAgent]]

    def all_agents(self):
        for row in self.rics:
            yield from row
        for row in self.av:
            yield from row

    def set_lr(self, lr: float) -> None:
        for agent in self.all_agents():
            agent.set_lr(lr)

    def decay_epsilon(self) -> None:
        for agent in self.all_agents():
            agent.decay_epsilon()


@dataclass
class EpisodeStats:
    """Per-episode averages of the step-level reward terms and diagnostics."""

    episode: int
    reward: float            # mean per-step team reward
    discounted: float        # discounted return of the episode
    part1: float             # mean summed safety
    part2: float             # mean summed V2V shortfall
    collision_rate: float    # fraction of penalized steps
    mean_safety: float       # per-AV safety average
    mean_av_rate: float
    mean_v2v_rate: float
    mean_v2v_margin: float   # per-pair mean-SINR margin over the safe level
    epsilon: float
    lr: float


METRIC_COLUMNS = [f.name for f in fields(EpisodeStats)]


def build_team(env: VehicularEnv, rng: np.random.Generator) -> AgentTeam:
    """Fresh networks for every agent, initialized in a fixed order."""
    t = env.topology
    cfg = env.config.train
    rics = [[DdqnAgent(env.rics_obs_dim, env.n_phase_actions, cfg, rng)
             for _ in range(env.rics.num_subblocks)]
            for _ in range(t.num_cells)]
    av = [[MpdqnAgent(env.av_obs_dim, t.v2v_per_cell + 1, cfg, rng)
           for _ in range(t.avs_per_cell)]
          for _ in range(t.num_cells)]
    return AgentTeam(rics=rics, av=av)


def assemble_joint(env: VehicularEnv, team: AgentTeam, obs_r: np.ndarray,
                   obs_a: np.ndarray, rng: np.random.Generator,
                   greedy: bool = False) -> JointAction:
    """Collect every agent's local decision into one joint action."""
    t = env.topology
    h = env.rics.phase_bits
    rics_actions = []
    share = np.zeros((t.num_cells, t.avs_per_cell), dtype=int)
    rho = np.zeros((t.num_cells, t.avs_per_cell))
    for c in range(t.num_cells):
        flats = np.array([team.rics[c][q].select(obs_r[c, q], rng, greedy)
                          for q in range(env.rics.num_subblocks)], dtype=int)
        rics_actions.append(RicsAction.from_flat(flats, h))
        for u in range(t.avs_per_cell):
            k, r = team.av[c][u].select(obs_a[c, u], rng, greedy)
            share[c, u] = k
            rho[c, u] = r
    return JointAction(rics=rics_actions, share_idx=share, rho=rho)


def run_episode(env: VehicularEnv, team: AgentTeam, rng: np.random.Generator,
                episode_index: int, train: bool = True) -> EpisodeStats:
    """One full episode; with ``train`` the agents store, learn, and explore."""
    t = env.topology
    h = env.rics.phase_bits
    state = env.reset(rng, episode_index)
    obs_r = env.rics_observations(state, update=train)
    obs_a = env.av_observations(state, update=train)

    rewards = []
    part1 = part2 = collisions = 0.0
    safety_sum = av_rate_sum = v2v_rate_sum = margin_sum = 0.0
    steps = env.steps_per_episode
    for _ in range(steps):
        joint = assemble_joint(env, team, obs_r, obs_a, rng, greedy=not train)
        outcome = env.step(state, joint, rng)
        next_obs_r = env.rics_observations(outcome.next_state, update=train)
        next_obs_a = env.av_observations(outcome.next_state, update=train)

        if train:
            for c in range(t.num_cells):
                flats = joint.rics[c].to_flat(h)
                for q in range(env.rics.num_subblocks):
                    team.rics[c][q].buffer.push(Transition(
                        obs=obs_r[c, q], action=int(flats[q]),
                        reward=outcome.reward, next_obs=next_obs_r[c, q],
                        terminal=outcome.terminal))
                for u in range(t.avs_per_cell):
                    team.av[c][u].buffer.push(Transition(
                        obs=obs_a[c, u],
                        action=(int(joint.share_idx[c, u]),
                                float(joint.rho[c, u])),
                        reward=outcome.reward, next_obs=next_obs_a[c, u],
                        terminal=outcome.terminal))
            for agent in team.all_agents():
                if agent.ready():
                    agent.update(rng)
            team.decay_epsilon()

        b = outcome.breakdown
        rewards.append(outcome.reward)
        part1 += b.part1
        part2 += b.part2
        collisions += 1.0 if b.penalized else 0.0
        safety_sum += float(b.safety.mean())
        av_rate_sum += float(b.av_rates.mean())
        v2v_rate_sum += float(b.v2v_rates.mean()) if b.v2v_rates.size else 0.0
        margin_sum += float((b.v2v_mean_sinr - env._threshold).mean()) \
            if b.v2v_mean_sinr.size else 0.0
        state = outcome.next_state
        obs_r, obs_a = next_obs_r, next_obs_a

    eps = team.rics[0][0].epsilon if team.rics and team.rics[0] \
        else team.av[0][0].epsilon
    lr = team.rics[0][0].adam.lr if team.rics and team.rics[0] \
        else team.av[0][0].q_adam.lr
    return EpisodeStats(
        episode=episode_index,
        reward=float(np.mean(rewards)),
        discounted=discounted_return(rewards, env.config.train.discount),
        part1=part1 / steps, part2=part2 / steps,
        collision_rate=collisions / steps,
        mean_safety=safety_sum / steps,
        mean_av_rate=av_rate_sum / steps,
        mean_v2v_rate=v2v_rate_sum / steps,
        mean_v2v_margin=margin_sum / steps,
        epsilon=eps, lr=lr)


@dataclass
class RunArtifacts:
    config: RunConfig
    env: VehicularEnv
    team: AgentTeam
    history: list[EpisodeStats]


def train(config: RunConfig, seed: int, progress=None) -> RunArtifacts:
    """Full training run from one seed; deterministic end to end."""
    rng = np.random.default_rng(seed)
    env = VehicularEnv(config)
    team = build_team(env, rng)
    history = []
    for episode in range(config.train.episodes):
        team.set_lr(decay_lr(config.train.learning_rate,
                             config.train.lr_decay, episode))
        stats = run_episode(env, team, rng, episode, train=True)
        history.append(stats)
        if progress is not None:
            progress(stats)
    return RunArtifacts(config=config, env=env, team=team, history=history)


def evaluate(env: VehicularEnv, team: AgentTeam, rng: np.random.Generator,
             episodes: int, start_index: int = 0) -> list[EpisodeStats]:
    """Greedy rollouts; no exploration, no learning, no normalizer updates."""
    return [run_episode(env, team, rng, start_index + e, train=False)
            for e in range(episodes)]


def random_rollouts(env: VehicularEnv, rng: np.random.Generator,
                    episodes: int, start_index: int = 0) -> list[EpisodeStats]:
    """Uniform-random joint actions, as a floor baseline."""
    out = []
    for e in range(episodes):
        idx = start_index + e
        state = env.reset(rng, idx)
        rewards = []
        part1 = part2 = collisions = safety_sum = 0.0
        av_rate_sum = v2v_rate_sum = margin_sum = 0.0
        steps = env.steps_per_episode
        for _ in range(steps):
            outcome = env.step(state, env.random_action(rng), rng)
            b = outcome.breakdown
            rewards.append(outcome.reward)
            part1 += b.part1
            part2 += b.part2
            collisions += 1.0 if b.penalized else 0.0
            safety_sum += float(b.safety.mean())
            av_rate_sum += float(b.av_rates.mean())
            v2v_rate_sum += float(b.v2v_rates.mean()) if b.v2v_rates.size else 0.0
            margin_sum += float((b.v2v_mean_sinr - env._threshold).mean()) \
                if b.v2v_mean_sinr.size else 0.0
            state = outcome.next_state
        out.append(EpisodeStats(
            episode=idx, reward=float(np.mean(rewards)),
            discounted=discounted_return(rewards, env.config.train.discount),
            part1=part1 / steps, part2=part2 / steps,
            collision_rate=collisions / steps, mean_safety=safety_sum / steps,
            mean_av_rate=av_rate_sum / steps,
            mean_v2v_rate=v2v_rate_sum / steps,
            mean_v2v_margin=margin_sum / steps, epsilon=1.0, lr=0.0))
    return out


def moving_average(values, window: int) -> np.ndarray:
    """Trailing mean over ``window`` samples (shorter at the start)."""
    values = np.asarray(values, dtype=float)
    if window < 1:
        raise ValueError("moving_average: window must be >= 1")
    out = np.empty_like(values)
    for i in range(values.size):
        out[i] = values[max(0, i - window + 1):i + 1].mean()
    return out


# ---- persistence ----

def _format_value(v) -> str:
    return repr(float(v)) if isinstance(v, float) else str(int(v))


def metrics_to_csv(history: list[EpisodeStats]) -> str:
    lines = [",".join(METRIC_COLUMNS)]
    for row in history:
        lines.append(",".join(_format_value(getattr(row, name))
                              for name in METRIC_COLUMNS))
    return "\n".join(lines) + "\n"


def metrics_from_csv(text: str) -> list[EpisodeStats]:
    lines = [ln for ln in text.strip().split("\n") if ln]
    if lines[0].split(",") != METRIC_COLUMNS:
        raise ValueError("metrics_from_csv: unexpected header")
    out = []
    for ln in lines[1:]:
        cells = ln.split(",")
        kwargs = {name: (int(cell) if name == "episode" else float(cell))
                  for name, cell in zip(METRIC_COLUMNS, cells)}
        out.append(EpisodeStats(**kwargs))
    return out


def team_to_state(team: AgentTeam, env: VehicularEnv) -> dict:
    return {"format_version": TEAM_FORMAT_VERSION,
            "rics": [[a.state_dict() for a in row] for row in team.rics],
            "av": [[a.state_dict() for a in row] for row in team.av],
            "norms": env.norm_state_dict()}


def team_from_state(state: dict, env: VehicularEnv,
                    team: AgentTeam) -> AgentTeam:
    if state.get("format_version") != TEAM_FORMAT_VERSION:
        raise ValueError(f"unsupported team checkpoint version "
                         f"{state.get('format_version')!r}")
    expect = ([len(team.rics), len(team.rics[0]) if team.rics else 0],
              [len(team.av), len(team.av[0]) if team.av else 0])
    got = ([len(state["rics"]), len(state["rics"][0]) if state["rics"] else 0],
           [len(state["av"]), len(state["av"][0]) if state["av"] else 0])
    if expect != got:
        raise ValueError(f"checkpoint topology mismatch: config expects "
                         f"(cells x sub-blocks, cells x AVs) = {expect}, "
                         f"checkpoint holds {got}")
    sample = state["rics"][0][0] if state["rics"] and state["rics"][0] \
        else state["av"][0][0]
    key = "online" if "online" in sample else "q_net"
    stored_obs = sample[key]["layer_sizes"][0]
    expected_obs = env.rics_obs_dim if key == "online" \
        else env.av_obs_dim + env.topology.v2v_per_cell + 1
    if stored_obs != expected_obs:
        raise ValueError(f"checkpoint topology mismatch: network input width "
                         f"{stored_obs} does not match the configured "
                         f"observation width {expected_obs}")
    for row, srow in zip(team.rics, state["rics"]):
        for agent, s in zip(row, srow):
            agent.load_state_dict(s)
    for row, srow in zip(team.av, state["av"]):
        for agent, s in zip(row, srow):
            agent.load_state_dict(s)
    env.load_norm_state_dict(state["norms"])
    return team


def save_run(directory: str, artifacts: RunArtifacts,
             rng: np.random.Generator | None = None) -> None:
    """Write config, metrics CSV, team checkpoint, and optional rng state."""
    os.makedirs(directory, exist_ok=True)
    with open(os.path.join(directory, "config.cfg"), "w", encoding="utf-8") as fh:
        fh.write("\n".join(artifacts.config.to_lines()) + "\n")
    with open(os.path.join(directory, "metrics.csv"), "w", encoding="utf-8") as fh:
        fh.write(metrics_to_csv(artifacts.history))
    with open(os.path.join(directory, "team.json"), "w", encoding="utf-8") as fh:
        json.dump(team_to_state(artifacts.team, artifacts.env), fh)
    if rng is not None:
        with open(os.path.join(directory, "rng.json"), "w",
                  encoding="utf-8") as fh:
            json.dump(rng.bit_generator.state, fh)


def load_run(directory: str) -> RunArtifacts:
    """Rebuild env and team from a saved run directory."""
    with open(os.path.join(directory, "config.cfg"), encoding="utf-8") as fh:
        config = config_from_lines(fh.read().splitlines())
    env = VehicularEnv(config)
    # network shapes depend only on the config, so a throwaway seed is fine
    team = build_team(env, np.random.default_rng(0))
    with open(os.path.join(directory, "team.json"), encoding="utf-8") as fh:
        team_from_state(json.load(fh), env, team)
    history = []
    metrics_path = os.path.join(directory, "metrics.csv")
    if os.path.exists(metrics_path):
        with open(metrics_path, encoding="utf-8") as fh:
            history = metrics_from_csv(fh.read())
    return RunArtifacts(config=config, env=env, team=team, history=history)


def load_rng(directory: str) -> np.random.Generator:
    with open(os.path.join(directory, "rng.json"), encoding="utf-8") as fh:
        state = json.load(fh)
    rng = np.random.default_rng(0)
    rng.bit_generator.state = state
    return rng
