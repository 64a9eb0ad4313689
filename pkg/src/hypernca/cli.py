"""Command-line entry points: train, eval, metamorph, inspect.

All file outputs (checkpoints, CSV logs, PGM images) are written by the
coordinator process only. Worker-count resolution order: --workers flag,
then run.workers in the config, then the HYPERNCA_WORKERS environment
variable, then 1.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
from pathlib import Path

import numpy as np

from . import metamorphosis as meta
from .checkpoint import Checkpoint, load_checkpoint, save_checkpoint
from .config import RunConfig, load_config, parse_config
from .envs import EnvId, morphology, rollout
from .errors import ConfigError, ShapeError
from .evolve import run, write_fitness_csv, write_timing_csv
from .images import write_pgm
from .nca import NcaGenome, develop
from .policy import materialize
from .rng import STREAM_EVAL, derive_seed
from .substrate import readout_channel

EVAL_SEED_BASE = 1000  # default evaluation seeds are EVAL_SEED_BASE + episode index


def _resolve_workers(flag: int | None, config: RunConfig) -> int:
    if flag is not None:
        return flag
    if "run.workers" in config.values:
        return config["run.workers"]
    env = os.environ.get("HYPERNCA_WORKERS")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise ConfigError(f"HYPERNCA_WORKERS must be an integer, got {env!r}") from None
    return 1


def _parse_seeds(text: str) -> list[int]:
    text = text.strip()
    if ":" in text and "," not in text:
        lo, _, hi = text.partition(":")
        return list(range(int(lo), int(hi)))
    return [int(p) for p in text.split(",") if p.strip()]


def cmd_train(args) -> int:
    config = load_config(args.config)
    workers = _resolve_workers(args.workers, config)
    if workers < 1:
        raise ConfigError("worker count must be >= 1")
    out = Path(args.out if args.out else "runs/" + config.task_name)
    out.mkdir(parents=True, exist_ok=True)

    task = config.task()
    result = run(task, config.es_settings(), config["run.master_seed"], workers=workers)

    write_fitness_csv(result.history, out / "fitness.csv")
    write_timing_csv(result.history, out / "generations.csv")
    generation = len(result.history) - 1
    save_checkpoint(out / "best.ckpt", Checkpoint(
        config_text=config.canonical_text, genome=result.best_genome,
        best_fitness=result.best_fitness, generation=generation,
        es_state=result.final_state))
    save_checkpoint(out / "mean.ckpt", Checkpoint(
        config_text=config.canonical_text, genome=result.mean_solution,
        best_fitness=result.mean_solution_fitness, generation=generation,
        es_state=None))
    status = "target reached" if result.target_reached else "budget exhausted"
    print(f"{config.task_name}: best fitness {result.best_fitness:.6g} "
          f"after {len(result.history)} generations ({status}, "
          f"{len(result.reset_generations)} resets)")
    print(f"outputs in {out}")
    return 0


def _policy_from_checkpoint(ckpt: Checkpoint):
    config = parse_config(ckpt.config_text)
    if config.genome_kind == "direct":
        raise ConfigError("checkpoint holds a direct genome, not a policy")
    return config, config.codec().grow(ckpt.genome)


def cmd_eval(args) -> int:
    ckpt = load_checkpoint(args.checkpoint)
    config, policy = _policy_from_checkpoint(ckpt)
    env_spec = config.env_spec()
    if args.seeds:
        seeds = _parse_seeds(args.seeds)
        if args.episodes is not None:
            seeds = seeds[:args.episodes]
    else:
        n = args.episodes if args.episodes is not None else 100
        seeds = [EVAL_SEED_BASE + i for i in range(n)]
    morph = morphology("M1") if env_spec.env_id is EnvId.PLANAR_WALKER else None

    rewards, steps = [], []
    trajectory = [] if args.trajectory else None
    for i, s in enumerate(seeds):
        spec = type(env_spec)(env_spec.env_id, env_seed=s, max_steps=env_spec.max_steps)
        traj = trajectory if (i == 0 and trajectory is not None) else None
        r, n = rollout(spec, policy, morph, trajectory=traj)
        rewards.append(r)
        steps.append(n)
    rewards_arr = np.array(rewards)

    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "eval.csv", "w", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(["episode", "seed", "reward", "steps"])
            for i, (s, r, n) in enumerate(zip(seeds, rewards, steps)):
                writer.writerow([i, s, repr(r), n])
    if args.trajectory:
        with open(args.trajectory, "w", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(["t"] + [f"obs{i}" for i in range(env_spec.obs_dim)]
                            + ["action", "reward"])
            for t, obs, action, reward in trajectory:
                act = action if np.isscalar(action) else " ".join(repr(a) for a in action)
                writer.writerow([t] + [repr(float(o)) for o in obs] + [act, repr(reward)])

    mean, std = float(rewards_arr.mean()), float(rewards_arr.std())
    print(f"{mean:.2f} ± {std:.2f} over {len(seeds)} episodes "
          f"(min {rewards_arr.min():.2f}, max {rewards_arr.max():.2f})")
    return 0


def cmd_metamorph(args) -> int:
    ckpt = load_checkpoint(args.checkpoint)
    config = parse_config(ckpt.config_text)
    if config.task_name != "walker_meta":
        raise ConfigError("checkpoint was not trained with run.task = walker_meta")
    out = Path(args.out if args.out else "metamorph")
    out.mkdir(parents=True, exist_ok=True)

    codec = config.codec()
    schedule = config.schedule()
    genome = NcaGenome(codec.nca_config, ckpt.genome)
    seed_sub = codec.seed_substrate()
    env_spec = config.env_spec()

    result = meta.cross_evaluate(genome, seed_sub, schedule, env_spec, codec.policy_spec)
    with open(out / "cross_eval.csv", "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["policy"] + [f"on_{m}" for m in result.morph_ids])
        for i, row in enumerate(result.matrix):
            writer.writerow([result.morph_ids[i]] + [repr(v) for v in row])

    _, snapshots = meta.staged_develop(genome, seed_sub, schedule, codec.policy_spec,
                                       record_snapshots=True)
    vectors = [materialize(readout_channel(s), codec.policy_spec).flat()
               for s in snapshots]
    trajectory = meta.pca_trajectory(vectors)
    cumulative = schedule.cumulative_steps
    with open(out / "pca.csv", "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["step", "morphology", "x", "y", "z"])
        for step, point in enumerate(trajectory.points):
            if step == 0:
                label = "seed"
            else:
                stage = next(i for i, c in enumerate(cumulative) if step <= c)
                label = schedule.stages[stage].morph_id
            writer.writerow([step, label] + [repr(v) for v in point])

    print(f"cross-evaluation matrix ({result.diagonal_dominant_rows}/"
          f"{len(result.morph_ids)} diagonal-dominant rows):")
    print(result.matrix)
    print(f"PCA explained variance: {trajectory.explained_variance} "
          f"of total {trajectory.total_variance:.6g}")
    print(f"outputs in {out}")
    return 0


def cmd_inspect(args) -> int:
    ckpt = load_checkpoint(args.checkpoint)
    config = parse_config(ckpt.config_text)
    if config.genome_kind != "nca":
        raise ConfigError("inspect needs an NCA genome checkpoint")
    out = Path(args.out if args.out else "inspect")
    out.mkdir(parents=True, exist_ok=True)

    codec = config.codec()
    steps = args.steps if args.steps is not None else codec.dev_steps
    genome = NcaGenome(codec.nca_config, ckpt.genome)
    _, snapshots = develop(codec.seed_substrate(), genome, steps, record_snapshots=True)

    with open(out / "norms.csv", "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["step", "layer", "min", "max"])
        for step, sub in enumerate(snapshots):
            policy = materialize(readout_channel(sub), codec.policy_spec)
            for layer, matrix in enumerate(policy.weights):
                lo, hi = write_pgm(out / f"weights_step{step:03d}_layer{layer}.pgm",
                                   matrix)
                writer.writerow([step, layer, repr(lo), repr(hi)])
    print(f"wrote {len(snapshots)} steps x {codec.policy_spec.num_matrices} layers to {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hypernca",
        description="Grow neural-network policies with an evolved neural cellular automaton.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="evolve a genome on a task")
    p_train.add_argument("--config", required=True, help="run configuration file")
    p_train.add_argument("--workers", type=int, default=None, help="evaluation processes")
    p_train.add_argument("--out", default=None, help="output directory")
    p_train.set_defaults(func=cmd_train)

    p_eval = sub.add_parser("eval", help="evaluate a checkpoint over seeded episodes")
    p_eval.add_argument("--checkpoint", required=True)
    p_eval.add_argument("--episodes", type=int, default=None)
    p_eval.add_argument("--seeds", default=None,
                        help="comma list or lo:hi range of env seeds")
    p_eval.add_argument("--out", default=None, help="directory for eval.csv")
    p_eval.add_argument("--trajectory", default=None,
                        help="CSV path for the first episode's per-step dump")
    p_eval.set_defaults(func=cmd_eval)

    p_meta = sub.add_parser("metamorph", help="cross-evaluate a staged checkpoint")
    p_meta.add_argument("--checkpoint", required=True)
    p_meta.add_argument("--out", default=None)
    p_meta.set_defaults(func=cmd_metamorph)

    p_inspect = sub.add_parser("inspect", help="export weight-matrix images per step")
    p_inspect.add_argument("--checkpoint", required=True)
    p_inspect.add_argument("--steps", type=int, default=None)
    p_inspect.add_argument("--out", default=None)
    p_inspect.set_defaults(func=cmd_inspect)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ShapeError, FileNotFoundError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
