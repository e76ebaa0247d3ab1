"""Minimal float64 dense-network engine: forward, exact backward, Adam.

Hidden layers use ReLU, the output layer is linear.  Everything is plain
numpy so results are bit-reproducible given the same inputs, and gradients
can be validated against finite differences.  Inputs may be single vectors
``(d,)`` or batches ``(B, d)``; batched backward sums parameter gradients
over the batch (scale the upstream signal for means).
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np


@dataclass
class DenseNet:
    layer_sizes: tuple[int, ...]
    weights: list[np.ndarray] = field(default_factory=list)   # (out, in) each
    biases: list[np.ndarray] = field(default_factory=list)    # (out,) each


@dataclass
class Gradients:
    """Per-parameter partials plus the partial w.r.t. the network input."""

    weights: list[np.ndarray]
    biases: list[np.ndarray]
    wrt_input: np.ndarray


@dataclass
class AdamState:
    lr: float
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    m_w: list[np.ndarray] = field(default_factory=list)
    v_w: list[np.ndarray] = field(default_factory=list)
    m_b: list[np.ndarray] = field(default_factory=list)
    v_b: list[np.ndarray] = field(default_factory=list)


def init_dense(layer_sizes, rng: np.random.Generator) -> DenseNet:
    """Uniform Glorot init: +-sqrt(6/(fan_in+fan_out)), zero biases."""
    sizes = tuple(int(s) for s in layer_sizes)
    if len(sizes) < 2 or any(s < 1 for s in sizes):
        raise ValueError("init_dense: need at least (input, output) sizes >= 1")
    net = DenseNet(layer_sizes=sizes)
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        bound = np.sqrt(6.0 / (fan_in + fan_out))
        net.weights.append(rng.uniform(-bound, bound, size=(fan_out, fan_in)))
        net.biases.append(np.zeros(fan_out))
    return net


def init_adam(net: DenseNet, lr: float) -> AdamState:
    adam = AdamState(lr=lr)
    for w, b in zip(net.weights, net.biases):
        adam.m_w.append(np.zeros_like(w))
        adam.v_w.append(np.zeros_like(w))
        adam.m_b.append(np.zeros_like(b))
        adam.v_b.append(np.zeros_like(b))
    return adam


def _affine(x: np.ndarray, w: np.ndarray, b: np.ndarray) -> np.ndarray:
    return x @ w.T + b


def forward(net: DenseNet, x: np.ndarray) -> np.ndarray:
    a = np.asarray(x, dtype=float)
    last = len(net.weights) - 1
    for i, (w, b) in enumerate(zip(net.weights, net.biases)):
        a = _affine(a, w, b)
        if i != last:
            a = np.maximum(a, 0.0)
    return a


def _forward_trace(net: DenseNet, x: np.ndarray):
    """Returns output plus the post-activation input of every layer."""
    inputs = []
    a = np.asarray(x, dtype=float)
    last = len(net.weights) - 1
    for i, (w, b) in enumerate(zip(net.weights, net.biases)):
        inputs.append(a)
        a = _affine(a, w, b)
        if i != last:
            a = np.maximum(a, 0.0)
    return a, inputs


def backward(net: DenseNet, x: np.ndarray, upstream: np.ndarray) -> Gradients:
    """Exact reverse-mode gradients for upstream = dL/d(output).

    For batched ``x``/``upstream`` the parameter gradients are summed over
    the batch; ``wrt_input`` keeps the batch axis.
    """
    _, inputs = _forward_trace(net, x)
    d_w = [np.empty(0)] * len(net.weights)
    d_b = [np.empty(0)] * len(net.biases)
    delta = np.asarray(upstream, dtype=float)
    for i in range(len(net.weights) - 1, -1, -1):
        a_in = inputs[i]
        if i != len(net.weights) - 1:
            # ReLU mask of this layer's own output
            pre = _affine(a_in, net.weights[i], net.biases[i])
            delta = delta * (pre > 0.0)
        if delta.ndim == 1:
            d_w[i] = np.outer(delta, a_in)
            d_b[i] = delta.copy()
        else:
            d_w[i] = delta.T @ a_in
            d_b[i] = delta.sum(axis=0)
        delta = delta @ net.weights[i]
    return Gradients(weights=d_w, biases=d_b, wrt_input=delta)


def adam_step(net: DenseNet, grads: Gradients, adam: AdamState) -> DenseNet:
    """One bias-corrected Adam update, in place; returns the net."""
    adam.step += 1
    t = adam.step
    corr1 = 1.0 - adam.beta1 ** t
    corr2 = 1.0 - adam.beta2 ** t
    for params, gs, ms, vs in ((net.weights, grads.weights, adam.m_w, adam.v_w),
                               (net.biases, grads.biases, adam.m_b, adam.v_b)):
        for p, g, m, v in zip(params, gs, ms, vs):
            m *= adam.beta1
            m += (1.0 - adam.beta1) * g
            v *= adam.beta2
            v += (1.0 - adam.beta2) * g * g
            p -= adam.lr * (m / corr1) / (np.sqrt(v / corr2) + adam.eps)
    return net


def soft_update(target: DenseNet, online: DenseNet, tau: float) -> DenseNet:
    """target <- tau*online + (1-tau)*target, in place."""
    if not (0.0 <= tau <= 1.0):
        raise ValueError("soft_update: tau must lie in [0, 1]")
    for t_arr, o_arr in zip(target.weights + target.biases,
                            online.weights + online.biases):
        t_arr *= 1.0 - tau
        t_arr += tau * o_arr
    return target


def copy_net(net: DenseNet) -> DenseNet:
    return DenseNet(layer_sizes=net.layer_sizes,
                    weights=[w.copy() for w in net.weights],
                    biases=[b.copy() for b in net.biases])


def gradient_check(net: DenseNet, x: np.ndarray, upstream_fn=None,
                   step: float = 1e-5) -> float:
    """Max relative error between backprop and central finite differences.

    Uses the scalar loss L = 0.5*sum(forward(net, x)^2), whose upstream is
    the output itself.
    """
    y = forward(net, x)
    grads = backward(net, x, y)
    worst = 0.0

    def loss() -> float:
        out = forward(net, x)
        return 0.5 * float(np.sum(out * out))

    for params, gs in ((net.weights, grads.weights), (net.biases, grads.biases)):
        for p, g in zip(params, gs):
            flat = p.reshape(-1)
            gflat = np.asarray(g).reshape(-1)
            for idx in range(flat.size):
                orig = flat[idx]
                flat[idx] = orig + step
                up = loss()
                flat[idx] = orig - step
                down = loss()
                flat[idx] = orig
                fd = (up - down) / (2.0 * step)
                denom = max(abs(fd), abs(gflat[idx]), 1e-8)
                worst = max(worst, abs(fd - gflat[idx]) / denom)
    return worst


# ---- serialization ----------------------------------------------------------

CHECKPOINT_VERSION = 1


def net_to_state(net: DenseNet) -> dict:
    return {"layer_sizes": list(net.layer_sizes),
            "weights": [w.tolist() for w in net.weights],
            "biases": [b.tolist() for b in net.biases]}


def net_from_state(state: dict) -> DenseNet:
    return DenseNet(layer_sizes=tuple(state["layer_sizes"]),
                    weights=[np.asarray(w, dtype=float) for w in state["weights"]],
                    biases=[np.asarray(b, dtype=float) for b in state["biases"]])


def adam_to_state(adam: AdamState) -> dict:
    return {"lr": adam.lr, "beta1": adam.beta1, "beta2": adam.beta2,
            "eps": adam.eps, "step": adam.step,
            "m_w": [m.tolist() for m in adam.m_w],
            "v_w": [v.tolist() for v in adam.v_w],
            "m_b": [m.tolist() for m in adam.m_b],
            "v_b": [v.tolist() for v in adam.v_b]}


def adam_from_state(state: dict) -> AdamState:
    return AdamState(lr=state["lr"], beta1=state["beta1"], beta2=state["beta2"],
                     eps=state["eps"], step=state["step"],
                     m_w=[np.asarray(a, dtype=float) for a in state["m_w"]],
                     v_w=[np.asarray(a, dtype=float) for a in state["v_w"]],
                     m_b=[np.asarray(a, dtype=float) for a in state["m_b"]],
                     v_b=[np.asarray(a, dtype=float) for a in state["v_b"]])


def save_net(path, net: DenseNet, adam: AdamState | None = None) -> None:
    """JSON checkpoint; float64 values survive the text round-trip exactly."""
    blob = {"format_version": CHECKPOINT_VERSION, "net": net_to_state(net)}
    if adam is not None:
        blob["adam"] = adam_to_state(adam)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(blob, fh)


def load_net(path) -> tuple[DenseNet, AdamState | None]:
    with open(path, "r", encoding="utf-8") as fh:
        blob = json.load(fh)
    if blob.get("format_version") != CHECKPOINT_VERSION:
        raise ValueError(f"unsupported checkpoint version {blob.get('format_version')!r}")
    net = net_from_state(blob["net"])
    adam = adam_from_state(blob["adam"]) if "adam" in blob else None
    return net, adam
