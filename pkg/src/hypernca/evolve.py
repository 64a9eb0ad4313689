"""The evolution loop: ask, evaluate in parallel, tell, repeat.

Population evaluation fans out over a process pool; results are gathered
by genome index, and the distribution update is order-independent, so a
run is a pure function of (task, settings, master seed) for any worker
count. Failed or non-finite evaluations receive a large negative floor
fitness so ranking stays defined.

Per-generation logs come in two flavors: `fitness_rows` (deterministic
columns only, byte-stable across reruns and worker counts) and
`timing_rows` (adds wall-clock milliseconds).
"""

from __future__ import annotations

import csv
import math
import multiprocessing
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .cmaes import EsState, EvalRecord, ask, init_state, tell
from .errors import ConfigError
from .rng import STREAM_ASK, derive_seed

FITNESS_FLOOR = -1e6

FITNESS_COLUMNS = ("generation", "best_fitness", "mean_fitness", "sigma",
                   "best_ever", "mean_solution_fitness", "reset")
TIMING_COLUMNS = FITNESS_COLUMNS + ("wallclock_ms",)


@dataclass(frozen=True)
class EarlyStopRule:
    check_generation: int = 200
    mean_fitness_floor: float = -math.inf

    def __post_init__(self) -> None:
        if self.check_generation < 1:
            raise ConfigError("early-stop check generation must be >= 1")


@dataclass(frozen=True)
class EsSettings:
    population: int = 64
    sigma0: float = 0.1
    max_generations: int = 300
    target_fitness: Optional[float] = None
    early_stop: Optional[EarlyStopRule] = None


@dataclass
class GenerationStats:
    generation: int
    best_fitness: float
    mean_fitness: float
    sigma: float
    best_ever: float
    mean_solution_fitness: float
    reset: bool
    wallclock_ms: float


@dataclass
class RunResult:
    best_genome: np.ndarray = field(repr=False)
    best_fitness: float
    mean_solution: np.ndarray = field(repr=False)
    mean_solution_fitness: float
    history: list[GenerationStats]
    reset_generations: list[int]
    target_reached: bool
    final_state: EsState


_WORKER_TASK = None


def _init_worker(task) -> None:
    global _WORKER_TASK
    _WORKER_TASK = task


def _eval_indexed(args) -> tuple[int, float, int, bool]:
    index, genome = args
    return _eval_one(_WORKER_TASK, index, genome)


def _eval_one(task, index: int, genome: np.ndarray) -> tuple[int, float, int, bool]:
    try:
        fitness, steps = task.evaluate(genome)
    except Exception:
        return index, FITNESS_FLOOR, 0, True
    if not math.isfinite(fitness):
        return index, FITNESS_FLOOR, steps, True
    return index, float(fitness), steps, False


def _evaluate_population(task, genomes: np.ndarray, pool, env_seed: int
                         ) -> list[EvalRecord]:
    jobs = list(enumerate(genomes))
    if pool is None:
        raw = [_eval_one(task, i, g) for i, g in jobs]
    else:
        raw = pool.map(_eval_indexed, jobs)
    return [EvalRecord(index=i, fitness=f, steps=s, env_seed=env_seed, failed=bad)
            for i, f, s, bad in raw]


def run(task, settings: EsSettings, master_seed: int, workers: int = 1,
        on_generation=None) -> RunResult:
    """Evolve the task's genome; returns best genome and history.

    `on_generation(stats, state, best_genome)` is called after every
    generation (checkpoint hook).
    """
    if workers < 1:
        raise ConfigError("workers must be >= 1")
    mean0 = task.mean0
    state = init_state(mean0, settings.sigma0, settings.population)
    env_seed = getattr(getattr(task, "env", None), "env_seed", 0)

    best_genome = np.array(mean0, copy=True)
    best_fitness = -math.inf
    best_mean = np.array(mean0, copy=True)
    best_mean_fitness = -math.inf
    history: list[GenerationStats] = []
    resets: list[int] = []
    target_reached = False
    gens_since_reset = 0

    pool = None
    try:
        if workers > 1:
            ctx = multiprocessing.get_context("fork")
            pool = ctx.Pool(workers, initializer=_init_worker, initargs=(task,))
        for gen in range(settings.max_generations):
            t0 = time.perf_counter()
            genomes = ask(state, settings.population, derive_seed(master_seed, STREAM_ASK, gen))
            records = _evaluate_population(task, genomes, pool, env_seed)
            fitnesses = np.array([r.fitness for r in records])
            gen_best_idx = int(np.argmax(fitnesses))
            if fitnesses[gen_best_idx] > best_fitness:
                best_fitness = float(fitnesses[gen_best_idx])
                best_genome = genomes[records[gen_best_idx].index].copy()
            state = tell(state, records)
            gens_since_reset += 1

            _, mean_fit, _, _ = _eval_one(task, 0, state.mean)
            if mean_fit > best_mean_fitness:
                best_mean_fitness = mean_fit
                best_mean = state.mean.copy()

            reset_now = False
            rule = settings.early_stop
            if (rule is not None and gens_since_reset % rule.check_generation == 0
                    and float(np.mean(fitnesses)) < rule.mean_fitness_floor):
                reset_now = True

            stats = GenerationStats(
                generation=gen,
                best_fitness=float(fitnesses[gen_best_idx]),
                mean_fitness=float(np.mean(fitnesses)),
                sigma=state.sigma,
                best_ever=best_fitness,
                mean_solution_fitness=mean_fit,
                reset=reset_now,
                wallclock_ms=(time.perf_counter() - t0) * 1e3,
            )
            history.append(stats)
            if on_generation is not None:
                on_generation(stats, state, best_genome)

            if settings.target_fitness is not None and best_fitness >= settings.target_fitness:
                target_reached = True
                break
            if reset_now:
                resets.append(gen)
                state = init_state(mean0, settings.sigma0, settings.population)
                gens_since_reset = 0
    finally:
        if pool is not None:
            pool.close()
            pool.join()

    return RunResult(best_genome=best_genome, best_fitness=best_fitness,
                     mean_solution=best_mean, mean_solution_fitness=best_mean_fitness,
                     history=history, reset_generations=resets,
                     target_reached=target_reached, final_state=state)


def _row(stats: GenerationStats) -> list:
    return [stats.generation, repr(stats.best_fitness), repr(stats.mean_fitness),
            repr(stats.sigma), repr(stats.best_ever),
            repr(stats.mean_solution_fitness), int(stats.reset)]


def write_fitness_csv(history: list[GenerationStats], path) -> None:
    """Deterministic per-generation log (no timing columns)."""
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(FITNESS_COLUMNS)
        for stats in history:
            writer.writerow(_row(stats))


def write_timing_csv(history: list[GenerationStats], path) -> None:
    """Per-generation log including wall-clock milliseconds."""
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(TIMING_COLUMNS)
        for stats in history:
            writer.writerow(_row(stats) + [f"{stats.wallclock_ms:.3f}"])
