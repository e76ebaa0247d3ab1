"""Learning agents: replay memory, discrete phase agent, hybrid split agent.

Training is centralized (every agent's buffer stores the shared team reward)
but execution is decentralized: action selection reads only the agent's own
local observation.

The discrete agent (one per surface sub-block) picks a joint
(reflect, transmit) codebook pair with a decaying epsilon-greedy rule.  The
hybrid agent (one per AV) picks a discrete channel-sharing choice plus a
continuous offload ratio: an actor net emits one ratio per discrete choice
and a Q net scores (observation, ratio) pairs with one output per choice,
evaluated by masked multi-pass so that choice ``a`` sees only its own ratio
slot.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import TrainConfig
from . import neural
from .neural import DenseNet, Gradients

HIDDEN_SIZES = (64, 32)


def decay_lr(alpha0: float, decay: float, episode: int) -> float:
    """Hyperbolic per-episode schedule alpha0 / (1 + decay*episode)."""
    if episode < 0:
        raise ValueError("decay_lr: episode must be >= 0")
    return alpha0 / (1.0 + decay * episode)


@dataclass
class Transition:
    obs: np.ndarray
    action: object            # int, or (int, float) for hybrid agents
    reward: float
    next_obs: np.ndarray
    terminal: bool


class ReplayBuffer:
    """Fixed-capacity ring buffer with uniform without-replacement sampling."""

    def __init__(self, capacity: int):
        if capacity < 1:
            raise ValueError("ReplayBuffer: capacity must be >= 1")
        self.capacity = capacity
        self._items: list[Transition] = []
        self._cursor = 0

    def __len__(self) -> int:
        return len(self._items)

    def push(self, item: Transition) -> None:
        if len(self._items) < self.capacity:
            self._items.append(item)
        else:
            self._items[self._cursor] = item
        self._cursor = (self._cursor + 1) % self.capacity

    def sample(self, batch_size: int, rng: np.random.Generator) -> list[Transition]:
        if batch_size > len(self._items):
            raise ValueError("ReplayBuffer: not enough transitions to sample")
        idx = rng.choice(len(self._items), size=batch_size, replace=False)
        return [self._items[i] for i in idx]


class DdqnAgent:
    """Discrete Q agent with decaying exploration and soft target updates."""

    def __init__(self, obs_dim: int, n_actions: int, cfg: TrainConfig,
                 rng: np.random.Generator):
        self.obs_dim = obs_dim
        self.n_actions = n_actions
        self.cfg = cfg
        sizes = (obs_dim, *HIDDEN_SIZES, n_actions)
        self.online = neural.init_dense(sizes, rng)
        self.target = neural.copy_net(self.online)
        self.adam = neural.init_adam(self.online, cfg.learning_rate)
        self.epsilon = cfg.epsilon_initial
        self.buffer = ReplayBuffer(cfg.memory_capacity)

    def select(self, obs: np.ndarray, rng: np.random.Generator,
               greedy: bool = False) -> int:
        if not greedy and rng.random() < self.epsilon:
            return int(rng.integers(self.n_actions))
        q = neural.forward(self.online, obs)
        return int(np.argmax(q))   # ties break toward the lowest index

    def decay_epsilon(self) -> None:
        self.epsilon = max(self.epsilon * self.cfg.epsilon_decay,
                           self.cfg.epsilon_floor)

    def set_lr(self, lr: float) -> None:
        self.adam.lr = lr

    def ready(self) -> bool:
        return len(self.buffer) >= self.cfg.warmup_batches * self.cfg.batch_size

    def update(self, rng: np.random.Generator) -> float:
        """One sampled-batch Q step; returns the TD loss."""
        batch = self.buffer.sample(self.cfg.batch_size, rng)
        obs = np.stack([t.obs for t in batch])
        next_obs = np.stack([t.next_obs for t in batch])
        actions = np.array([t.action for t in batch], dtype=int)
        rewards = np.array([t.reward for t in batch])
        live = np.array([0.0 if t.terminal else 1.0 for t in batch])

        q_next = neural.forward(self.target, next_obs)
        y = rewards + self.cfg.discount * live * q_next.max(axis=1)
        q = neural.forward(self.online, obs)
        taken = q[np.arange(len(batch)), actions]
        err = taken - y
        loss = float(np.mean(err ** 2))

        upstream = np.zeros_like(q)
        upstream[np.arange(len(batch)), actions] = 2.0 * err / len(batch)
        grads = neural.backward(self.online, obs, upstream)
        neural.adam_step(self.online, grads, self.adam)
        neural.soft_update(self.target, self.online, self.cfg.tau)
        return loss

    def state_dict(self) -> dict:
        return {"online": neural.net_to_state(self.online),
                "target": neural.net_to_state(self.target),
                "adam": neural.adam_to_state(self.adam),
                "epsilon": self.epsilon}

    def load_state_dict(self, state: dict) -> None:
        self.online = neural.net_from_state(state["online"])
        self.target = neural.net_from_state(state["target"])
        self.adam = neural.adam_from_state(state["adam"])
        self.epsilon = state["epsilon"]


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


class MpdqnAgent:
    """Hybrid-action agent: discrete choice plus one continuous parameter.

    The Q net takes the observation concatenated with the full parameter
    vector (one slot per discrete choice) and emits one value per choice.
    Multi-pass evaluation masks the parameter vector to a single slot per
    pass, so value estimates cannot leak across choices.
    """

    def __init__(self, obs_dim: int, n_discrete: int, cfg: TrainConfig,
                 rng: np.random.Generator):
        self.obs_dim = obs_dim
        self.n_discrete = n_discrete
        self.cfg = cfg
        self.q_net = neural.init_dense((obs_dim + n_discrete, *HIDDEN_SIZES,
                                        n_discrete), rng)
        self.actor = neural.init_dense((obs_dim, *HIDDEN_SIZES, n_discrete), rng)
        self.q_target = neural.copy_net(self.q_net)
        self.actor_target = neural.copy_net(self.actor)
        self.q_adam = neural.init_adam(self.q_net, cfg.learning_rate)
        self.actor_adam = neural.init_adam(self.actor, cfg.learning_rate)
        self.epsilon = cfg.epsilon_initial
        self.buffer = ReplayBuffer(cfg.memory_capacity)

    # ---- forward paths ----
    def actor_params(self, obs: np.ndarray, target: bool = False) -> np.ndarray:
        """Sigmoid-squashed parameter vector, one ratio per discrete choice."""
        net = self.actor_target if target else self.actor
        return _sigmoid(neural.forward(net, obs))

    def _pass_inputs(self, obs: np.ndarray, x: np.ndarray) -> np.ndarray:
        """Masked multi-pass rows: (B*A, obs_dim + A), pass a keeps slot a."""
        obs2 = np.atleast_2d(obs)
        x2 = np.atleast_2d(x)
        b, a = x2.shape
        masked = np.zeros((b, a, a))
        rng_idx = np.arange(a)
        masked[:, rng_idx, rng_idx] = x2
        tiled = np.repeat(obs2[:, None, :], a, axis=1)
        return np.concatenate([tiled, masked], axis=2).reshape(b * a, -1)

    def multipass_q(self, obs: np.ndarray, x: np.ndarray,
                    target: bool = False) -> np.ndarray:
        """Per-choice Q values Q(s, a, x_a); batched when obs is 2-D."""
        net = self.q_target if target else self.q_net
        batched = np.asarray(obs).ndim == 2
        rows = self._pass_inputs(obs, x)
        q = neural.forward(net, rows)                    # (B*A, A)
        a = self.n_discrete
        diag = q.reshape(-1, a, a)[:, np.arange(a), np.arange(a)]
        return diag if batched else diag[0]

    def select(self, obs: np.ndarray, rng: np.random.Generator,
               greedy: bool = False) -> tuple[int, float]:
        if not greedy and rng.random() < self.epsilon:
            return int(rng.integers(self.n_discrete)), float(rng.random())
        x = self.actor_params(obs)
        q = self.multipass_q(obs, x)
        a = int(np.argmax(q))
        return a, float(x[a])

    def decay_epsilon(self) -> None:
        self.epsilon = max(self.epsilon * self.cfg.epsilon_decay,
                           self.cfg.epsilon_floor)

    def set_lr(self, lr: float) -> None:
        self.q_adam.lr = lr
        self.actor_adam.lr = lr

    def ready(self) -> bool:
        return len(self.buffer) >= self.cfg.warmup_batches * self.cfg.batch_size

    # ---- learning ----
    def update(self, rng: np.random.Generator) -> tuple[float, float]:
        """One sampled-batch step of both nets; returns (q_loss, actor_loss)."""
        batch = self.buffer.sample(self.cfg.batch_size, rng)
        obs = np.stack([t.obs for t in batch])
        next_obs = np.stack([t.next_obs for t in batch])
        a_taken = np.array([t.action[0] for t in batch], dtype=int)
        rho_taken = np.array([t.action[1] for t in batch])
        rewards = np.array([t.reward for t in batch])
        live = np.array([0.0 if t.terminal else 1.0 for t in batch])
        b = len(batch)
        a_count = self.n_discrete

        # targets through the target actor and target Q net
        x_next = self.actor_params(next_obs, target=True)
        q_next = self.multipass_q(next_obs, x_next, target=True)
        y = rewards + self.cfg.discount * live * q_next.max(axis=1)

        # ---- Q loss 0.5*mean (y - Q(s, a, x_a))^2 on the taken actions ----
        x_in = np.zeros((b, a_count))
        x_in[np.arange(b), a_taken] = rho_taken
        rows = np.concatenate([obs, x_in], axis=1)
        q_all = neural.forward(self.q_net, rows)
        taken = q_all[np.arange(b), a_taken]
        err = taken - y
        q_loss = 0.5 * float(np.mean(err ** 2))
        upstream = np.zeros_like(q_all)
        upstream[np.arange(b), a_taken] = err / b
        q_grads = neural.backward(self.q_net, rows, upstream)
        neural.adam_step(self.q_net, q_grads, self.q_adam)

        # ---- actor loss -mean sum_a Q(s, a, x_a(s)), gradized through x ----
        actor_logits = neural.forward(self.actor, obs)
        x = _sigmoid(actor_logits)
        pass_rows = self._pass_inputs(obs, x)            # (B*A, d)
        pass_upstream = np.zeros((b * a_count, a_count))
        pass_upstream[np.arange(b * a_count), np.tile(np.arange(a_count), b)] = 1.0
        pass_q = neural.forward(self.q_net, pass_rows)
        actor_loss = -float(np.mean(np.sum(
            pass_q.reshape(b, a_count, a_count)[:, np.arange(a_count),
                                                np.arange(a_count)], axis=1)))
        q_input_grads = neural.backward(self.q_net, pass_rows, pass_upstream)
        slot = q_input_grads.wrt_input[:, self.obs_dim:]  # (B*A, A)
        d_x = slot.reshape(b, a_count, a_count)[:, np.arange(a_count),
                                                np.arange(a_count)]
        d_logits = (-d_x / b) * x * (1.0 - x)
        actor_grads = neural.backward(self.actor, obs, d_logits)
        neural.adam_step(self.actor, actor_grads, self.actor_adam)

        neural.soft_update(self.q_target, self.q_net, self.cfg.tau)
        neural.soft_update(self.actor_target, self.actor, self.cfg.tau)
        return q_loss, actor_loss

    def state_dict(self) -> dict:
        return {"q_net": neural.net_to_state(self.q_net),
                "actor": neural.net_to_state(self.actor),
                "q_target": neural.net_to_state(self.q_target),
                "actor_target": neural.net_to_state(self.actor_target),
                "q_adam": neural.adam_to_state(self.q_adam),
                "actor_adam": neural.adam_to_state(self.actor_adam),
                "epsilon": self.epsilon}

    def load_state_dict(self, state: dict) -> None:
        self.q_net = neural.net_from_state(state["q_net"])
        self.actor = neural.net_from_state(state["actor"])
        self.q_target = neural.net_from_state(state["q_target"])
        self.actor_target = neural.net_from_state(state["actor_target"])
        self.q_adam = neural.adam_from_state(state["q_adam"])
        self.actor_adam = neural.adam_from_state(state["actor_adam"])
        self.epsilon = state["epsilon"]


# Functional aliases for the class methods, handy in scripts and tests.
def select_discrete(agent: DdqnAgent, obs, rng, greedy=False) -> int:
    return agent.select(obs, rng, greedy)


def select_hybrid(agent: MpdqnAgent, obs, rng, greedy=False) -> tuple[int, float]:
    return agent.select(obs, rng, greedy)


def multipass_q(agent: MpdqnAgent, obs, x, target=False) -> np.ndarray:
    return agent.multipass_q(obs, x, target)


def ddqn_update(agent: DdqnAgent, rng) -> float:
    return agent.update(rng)


def mpdqn_update(agent: MpdqnAgent, rng) -> tuple[float, float]:
    return agent.update(rng)
