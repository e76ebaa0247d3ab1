"""Command line driver for training, evaluation, sweeps, and exhaustive search.

Subcommands:

* ``train``  - run one seed to convergence and save a run directory
* ``eval``   - greedy or random rollouts from a saved run
* ``sweep``  - train/eval across one swept parameter axis, long-format CSV
* ``oracle`` - exhaustive one-step search on small instances

Sweeps cache finished runs under ``<out dir>/cache/<config hash>-s<seed>`` so
re-running a sweep reuses earlier training.
"""
from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import training
from .config import ConfigError, RunConfig, load_config
from .env import VehicularEnv
from .oracle import exhaustive_joint_search
from .training import (EpisodeStats, evaluate, load_run, metrics_to_csv,
                       random_rollouts, save_run)

# axis name -> override lines for one swept value
SWEEP_AXES = {
    "v2v_count": lambda v: [f"v2v_per_cell={int(float(v))}"],
    "p_u_dbm": lambda v: [f"p_av_dbm={float(v)}"],
    "s_bits": lambda v: [f"s_min={float(v)}", f"s_max={float(v)}"],
    "num_cells": lambda v: [f"num_cells={int(float(v))}"],
    "psi": lambda v: [f"psi={float(v)}"],
}

SWEEP_COLUMNS = ["axis", "value", "seed", "reward", "part1",
                 "per_cell_safety", "part2", "collision_rate", "mean_safety",
                 "mean_v2v_margin"]


def _add_config_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", default=None, help="config file (key = value)")
    p.add_argument("--set", dest="overrides", action="append", default=[],
                   metavar="KEY=VALUE", help="override a config key")


def _load(args) -> RunConfig:
    return load_config(args.config, args.overrides)


def _progress_printer(total: int):
    def cb(stats: EpisodeStats) -> None:
        print(f"episode {stats.episode + 1}/{total}  "
              f"reward {stats.reward:#.4g}  safety {stats.part1:#.4g}  "
              f"shortfall {stats.part2:#.4g}  "
              f"collisions {stats.collision_rate:.2f}  "
              f"eps {stats.epsilon:.3f}")
    return cb


def _mean_row(stats: list[EpisodeStats]) -> dict:
    return {"reward": float(np.mean([s.reward for s in stats])),
            "part1": float(np.mean([s.part1 for s in stats])),
            "part2": float(np.mean([s.part2 for s in stats])),
            "collision_rate": float(np.mean([s.collision_rate for s in stats])),
            "mean_safety": float(np.mean([s.mean_safety for s in stats])),
            "mean_v2v_margin": float(np.mean([s.mean_v2v_margin
                                              for s in stats]))}


def cmd_train(args) -> int:
    config = _load(args)
    seed = config.seeds[0] if args.seed is None else args.seed
    out = args.out or os.path.join("runs", f"{config.run_name}-s{seed}")
    progress = None if args.quiet else _progress_printer(config.train.episodes)
    artifacts = training.train(config, seed, progress)
    save_run(out, artifacts)
    last = artifacts.history[-1]
    print(f"saved run to {out}  (final reward {last.reward:#.4g}, "
          f"safety {last.part1:#.4g})")
    return 0


def cmd_eval(args) -> int:
    artifacts = load_run(args.run)
    env, team = artifacts.env, artifacts.team
    episodes = args.episodes or artifacts.config.train.eval_episodes
    rng = np.random.default_rng([args.seed, 1])
    if args.policy == "greedy":
        stats = evaluate(env, team, rng, episodes)
    else:
        stats = random_rollouts(env, rng, episodes)
    for s in stats:
        print(f"episode {s.episode}  reward {s.reward:#.4g}  "
              f"safety {s.part1:#.4g}  shortfall {s.part2:#.4g}  "
              f"collisions {s.collision_rate:.2f}")
    mean = _mean_row(stats)
    print(f"mean over {episodes} episodes: reward {mean['reward']:#.4g}  "
          f"safety {mean['part1']:#.4g}  shortfall {mean['part2']:#.4g}  "
          f"collisions {mean['collision_rate']:.2f}")
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(metrics_to_csv(stats))
        print(f"wrote {args.out}")
    return 0


def sweep_point(config: RunConfig, seed: int, cache_dir: str,
                eval_episodes: int, quiet: bool = True) -> dict:
    """Train (or load cached) one config+seed, then greedy-evaluate it."""
    run_dir = os.path.join(cache_dir, f"{config.config_hash()}-s{seed}")
    if os.path.exists(os.path.join(run_dir, "team.json")):
        artifacts = load_run(run_dir)
    else:
        progress = None if quiet else _progress_printer(config.train.episodes)
        artifacts = training.train(config, seed, progress)
        save_run(run_dir, artifacts)
    rng = np.random.default_rng([seed, 1])
    stats = evaluate(artifacts.env, artifacts.team, rng, eval_episodes)
    row = _mean_row(stats)
    # total sum-safety is part1; average it over cells for multi-cell sweeps
    row["per_cell_safety"] = row["part1"] / config.topology.num_cells
    return row


def cmd_sweep(args) -> int:
    if args.axis not in SWEEP_AXES:
        raise ConfigError(f"unknown sweep axis {args.axis!r}; "
                          f"choose from {sorted(SWEEP_AXES)}")
    values = [v.strip() for v in args.values.split(",") if v.strip()]
    if not values:
        raise ConfigError("sweep: need at least one value")
    base = _load(args)
    seeds = [int(s) for s in args.seeds.split(",")] if args.seeds \
        else list(base.seeds)
    out = args.out or f"sweep_{args.axis}.csv"
    cache_dir = args.cache or os.path.join(os.path.dirname(out) or ".",
                                           "cache")
    eval_episodes = args.eval_episodes or base.train.eval_episodes

    lines = [",".join(SWEEP_COLUMNS)]
    for value in values:
        for seed in seeds:
            config = load_config(args.config,
                                 list(args.overrides)
                                 + SWEEP_AXES[args.axis](value))
            row = sweep_point(config, seed, cache_dir, eval_episodes,
                              quiet=args.quiet)
            cells = [args.axis, value, str(seed)] + \
                [repr(row[c]) for c in SWEEP_COLUMNS[3:]]
            lines.append(",".join(cells))
            print(f"{args.axis}={value} seed={seed}: "
                  f"reward {row['reward']:#.4g} safety {row['part1']:#.4g}")
    with open(out, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
    print(f"wrote {out}")
    return 0


def cmd_oracle(args) -> int:
    config = _load(args)
    env = VehicularEnv(config)
    seed = config.seeds[0] if args.seed is None else args.seed
    rng = np.random.default_rng(seed)
    rho_grid = np.linspace(0.0, 1.0, args.rho_levels)
    for i in range(args.states):
        state = env.reset(rng, i)
        batches = env.draw_mc_batches(state, rng)
        result = exhaustive_joint_search(env, state, rho_grid=rho_grid,
                                         batches=batches)
        neutral = env.compute_reward(state, env.neutral_action(),
                                     batches=batches)
        rand_vals = [env.compute_reward(state, env.random_action(rng),
                                        batches=batches).reward
                     for _ in range(16)]
        print(f"state {i}: best {result.value:#.6g} "
              f"({result.evaluations} grid evaluations)  "
              f"neutral {neutral.reward:#.6g}  "
              f"random-16 mean {np.mean(rand_vals):#.6g}")
        for c, cell in enumerate(result.cells):
            print(f"  cell {c}: share {cell.share_row.tolist()} "
                  f"rho {[round(r, 3) for r in cell.rho_row.tolist()]} "
                  f"reflect {cell.rics.reflect_idx.tolist()} "
                  f"transmit {cell.rics.transmit_idx.tolist()}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ricsnet",
        description="surface-assisted vehicular network simulator and "
                    "multi-agent trainer")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train one seed and save the run")
    _add_config_args(p)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", default=None, help="run directory")
    p.add_argument("--quiet", action="store_true")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="roll out a saved run")
    p.add_argument("--run", required=True, help="run directory")
    p.add_argument("--episodes", type=int, default=None)
    p.add_argument("--seed", type=int, default=1000)
    p.add_argument("--policy", choices=("greedy", "random"), default="greedy")
    p.add_argument("--out", default=None, help="write episode CSV here")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("sweep", help="train/eval across one parameter axis")
    _add_config_args(p)
    p.add_argument("--axis", required=True, help=",".join(sorted(SWEEP_AXES)))
    p.add_argument("--values", required=True, help="comma-separated values")
    p.add_argument("--seeds", default=None, help="comma-separated seeds")
    p.add_argument("--eval-episodes", type=int, default=None)
    p.add_argument("--out", default=None, help="long-format CSV path")
    p.add_argument("--cache", default=None, help="run cache directory")
    p.add_argument("--quiet", action="store_true", default=True)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("oracle", help="exhaustive one-step search (small only)")
    _add_config_args(p)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--states", type=int, default=3)
    p.add_argument("--rho-levels", type=int, default=11)
    p.set_defaults(func=cmd_oracle)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
