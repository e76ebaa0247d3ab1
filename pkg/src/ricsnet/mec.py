"""Task offloading model: delays, inference accuracy, driving-safety factor.

An AV splits each perception task by ratio ``rho``: the fraction ``rho`` is
uploaded and processed at the edge, the rest runs on the local CPU.  Local
and edge processing overlap, so the task finishes after the slower branch.
Safety is the achieved inference accuracy per second of completion time:
quicker, more accurate perception means a safer vehicle.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import ComputeConfig

# Delays below this are treated as degenerate (division guard).
DELAY_FLOOR = 1e-6


@dataclass(frozen=True)
class TaskSpec:
    """One perception task: payload bits, CPU cycles, max tolerated delay."""

    data_bits: float
    cpu_cycles: float
    max_delay: float


def draw_task(cfg: ComputeConfig, rng: np.random.Generator) -> TaskSpec:
    """Uniform draw within the configured task ranges."""
    return TaskSpec(data_bits=rng.uniform(cfg.s_min, cfg.s_max),
                    cpu_cycles=rng.uniform(cfg.cycles_min, cfg.cycles_max),
                    max_delay=cfg.max_delay)


def local_delay(rho: float, task: TaskSpec, f_local: float) -> float:
    """Seconds to process the retained fraction on the AV's own CPU."""
    _check_rho(rho)
    if f_local <= 0:
        raise ValueError("local_delay: f_local must be > 0")
    return (1.0 - rho) * task.cpu_cycles / f_local


def offload_delay(rho: float, task: TaskSpec, rate: float, cfg: ComputeConfig,
                  compute_time: float | None = None) -> float:
    """Seconds to upload and process the offloaded fraction at the edge.

    ``compute_time`` is the edge processing term; multi-AV callers pass the
    shared worst cycles/F over all cells (edge batches finish with their
    slowest task), a lone task falls back to its own cycles/F.  Returns
    ``inf`` when offloading is requested over a dead link.
    """
    _check_rho(rho)
    if rho == 0.0:
        return 0.0
    if rate <= 0.0:
        return math.inf
    if compute_time is None:
        compute_time = task.cpu_cycles / cfg.f_mec_per_av
    return rho * (task.data_bits / rate + compute_time)


def avg_accuracy(rho: float, cfg: ComputeConfig) -> float:
    """Accuracy averaged over the split: local inference is discounted."""
    _check_rho(rho)
    return (1.0 - rho) * cfg.accuracy_ratio * cfg.bs_accuracy \
        + rho * cfg.bs_accuracy


def safety_factor(rho: float, task: TaskSpec, rate: float, f_local: float,
                  cfg: ComputeConfig, compute_time: float | None = None) -> float:
    """Accuracy per second of completion time; 0 on dead or degenerate paths.

    Completion time is the slower of the two branches.  A zero return flags
    either an undeliverable offload (dead link with rho > 0) or the
    degenerate all-delays-zero corner; both mean "no usable safety value".
    """
    t_local = local_delay(rho, task, f_local)
    t_off = offload_delay(rho, task, rate, cfg, compute_time)
    if math.isinf(t_off):
        return 0.0
    slower = max(t_local, t_off)
    if slower < DELAY_FLOOR:
        return 0.0
    if cfg.enforce_deadline and slower > task.max_delay:
        return 0.0
    return avg_accuracy(rho, cfg) / slower


def best_offload_ratio(task: TaskSpec, rate: float, f_local: float,
                       cfg: ComputeConfig, compute_time: float | None = None,
                       grid_n: int = 1001) -> tuple[float, float]:
    """Grid search over rho in [0, 1]; returns (best rho, best safety)."""
    if grid_n < 2:
        raise ValueError("best_offload_ratio: grid_n must be >= 2")
    best = (0.0, -math.inf)
    for rho in np.linspace(0.0, 1.0, grid_n):
        s = safety_factor(float(rho), task, rate, f_local, cfg, compute_time)
        if s > best[1]:
            best = (float(rho), s)
    return best


def _check_rho(rho: float) -> None:
    if not (0.0 <= rho <= 1.0):
        raise ValueError("offload ratio must lie in [0, 1]")
