"""Fitness tasks the optimizer can run.

Every task is a picklable dataclass with a `dimension`, an initial
distribution mean, and an `evaluate(genome) -> (fitness, steps)` method
that is a pure function, so population evaluation can fan out across
worker processes without ordering concerns.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Union

import numpy as np

from . import metamorphosis as meta
from .codec import LinearHyperCodec, NcaPolicyCodec
from .envs import EnvSpec, rollout
from .nca import NcaGenome
from .rng import STREAM_EVAL, derive_seed


@dataclass(frozen=True)
class SphereTask:
    """Debug objective: f(x) = -||x||^2, maximized at the origin."""

    dimension: int
    mean0_value: float = 1.0

    @property
    def mean0(self) -> np.ndarray:
        return np.full(self.dimension, self.mean0_value)

    def evaluate(self, genome: np.ndarray) -> tuple[float, int]:
        return -float(np.dot(genome, genome)), 0


@dataclass(frozen=True)
class RosenbrockTask:
    """Debug objective: negated Rosenbrock valley, maximized at all-ones."""

    dimension: int
    mean0_value: float = 0.0

    @property
    def mean0(self) -> np.ndarray:
        return np.full(self.dimension, self.mean0_value)

    def evaluate(self, genome: np.ndarray) -> tuple[float, int]:
        x = np.asarray(genome)
        val = np.sum(100.0 * (x[1:] - x[:-1] ** 2) ** 2 + (1.0 - x[:-1]) ** 2)
        return -float(val), 0


@dataclass(frozen=True)
class PolicyTask:
    """Grow a policy from the genome and run it on an environment.

    Fitness is the mean return over `episodes` episodes; episode k uses
    env seed derive_seed(env_seed, STREAM_EVAL, k) when episodes > 1, and
    exactly `env_seed` when episodes == 1 (one fixed deterministic
    episode, the default).
    """

    codec: Union[NcaPolicyCodec, LinearHyperCodec]
    env: EnvSpec
    episodes: int = 1
    morph_id: str = "M1"

    @property
    def dimension(self) -> int:
        return self.codec.genome_length

    @property
    def mean0(self) -> np.ndarray:
        return np.zeros(self.dimension)

    def episode_seeds(self) -> list[int]:
        if self.episodes == 1:
            return [self.env.env_seed]
        return [derive_seed(self.env.env_seed, STREAM_EVAL, k)
                for k in range(self.episodes)]

    def evaluate(self, genome: np.ndarray) -> tuple[float, int]:
        policy = self.codec.grow(genome)
        from .envs import EnvId, morphology
        morph = morphology(self.morph_id) if self.env.env_id is EnvId.PLANAR_WALKER else None
        total, steps = 0.0, 0
        for s in self.episode_seeds():
            reward, n = rollout(replace(self.env, env_seed=s), policy, morph)
            total += reward
            steps += n
        return total / self.episodes, steps


@dataclass(frozen=True)
class MetamorphosisTask:
    """Joint staged objective: sum of stage rewards across morphologies."""

    codec: NcaPolicyCodec  # dev_steps unused; the schedule drives development
    schedule: meta.StageSchedule
    env: EnvSpec

    @property
    def dimension(self) -> int:
        return self.codec.genome_length

    @property
    def mean0(self) -> np.ndarray:
        return np.zeros(self.dimension)

    def evaluate(self, genome: np.ndarray) -> tuple[float, int]:
        g = NcaGenome(self.codec.nca_config, np.asarray(genome, dtype=np.float64))
        fitness = meta.fitness_multi(g, self.codec.seed_substrate(), self.schedule,
                                     self.env, self.codec.policy_spec)
        return fitness, 0
