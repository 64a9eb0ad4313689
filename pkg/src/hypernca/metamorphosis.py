"""Staged development of one genome across damaged morphologies.

The same rule keeps developing the same substrate: the stage-1 policy is
read out after the first block of steps, then development continues from
that grown substrate (never from the seed again) for each later stage.
All morphing information lives in the genome; nothing is learned during
episodes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import nca, substrate
from .envs import EnvSpec, MorphologySpec, morphology, rollout
from .errors import ConfigError, ShapeError
from .policy import Policy, PolicySpec, materialize


@dataclass(frozen=True)
class Stage:
    morph_id: str
    steps: int


@dataclass(frozen=True)
class StageSchedule:
    stages: tuple[Stage, ...]

    def __post_init__(self) -> None:
        if not self.stages:
            raise ConfigError("schedule needs at least one stage")
        if any(s.steps < 1 for s in self.stages):
            raise ConfigError("stage steps must be positive")
        ids = [s.morph_id for s in self.stages]
        if len(set(ids)) != len(ids):
            raise ConfigError("stage morphologies must be distinct")

    @property
    def cumulative_steps(self) -> tuple[int, ...]:
        total, out = 0, []
        for s in self.stages:
            total += s.steps
            out.append(total)
        return tuple(out)

    @property
    def total_steps(self) -> int:
        return self.cumulative_steps[-1]


def default_schedule() -> StageSchedule:
    return StageSchedule((Stage("M1", 10), Stage("M2", 20), Stage("M3", 20)))


def staged_develop(genome: nca.NcaGenome, seed: substrate.Substrate,
                   schedule: StageSchedule, policy_spec: PolicySpec,
                   record_snapshots: bool = False):
    """One policy per stage, read out from the chained substrate.

    Returns (policies, snapshots); snapshots covers every developmental
    step including the seed (total_steps + 1 substrates) when requested,
    otherwise just the per-stage substrates.
    """
    policies: list[Policy] = []
    snapshots: list[substrate.Substrate] = [seed] if record_snapshots else []
    current = seed
    for stage in schedule.stages:
        if record_snapshots:
            current, steps = nca.develop(current, genome, stage.steps,
                                         record_snapshots=True)
            snapshots.extend(steps[1:])
        else:
            current = nca.develop(current, genome, stage.steps)
            snapshots.append(current)
        policies.append(materialize(substrate.readout_channel(current), policy_spec))
    return policies, snapshots


def fitness_multi(genome: nca.NcaGenome, seed: substrate.Substrate,
                  schedule: StageSchedule, env_spec: EnvSpec,
                  policy_spec: PolicySpec) -> float:
    """Joint objective: sum of each stage policy's reward on its own body."""
    policies, _ = staged_develop(genome, seed, schedule, policy_spec)
    total = 0.0
    for stage, policy in zip(schedule.stages, policies):
        reward, _ = rollout(env_spec, policy, morphology(stage.morph_id))
        total += reward
    return total


@dataclass(frozen=True)
class CrossEvalResult:
    matrix: np.ndarray = field(repr=False)  # [i, j] = stage-i policy on morphology j
    morph_ids: tuple[str, ...]
    diagonal_dominant_rows: int


def cross_evaluate(genome: nca.NcaGenome, seed: substrate.Substrate,
                   schedule: StageSchedule, env_spec: EnvSpec,
                   policy_spec: PolicySpec,
                   morphs: Optional[Sequence[MorphologySpec]] = None) -> CrossEvalResult:
    """Every stage policy evaluated on every morphology."""
    policies, _ = staged_develop(genome, seed, schedule, policy_spec)
    if morphs is None:
        morphs = [morphology(s.morph_id) for s in schedule.stages]
    n = len(policies)
    matrix = np.zeros((n, len(morphs)))
    for i, policy in enumerate(policies):
        for j, morph in enumerate(morphs):
            matrix[i, j], _ = rollout(env_spec, policy, morph)
    dominant = sum(
        1 for i in range(n)
        if all(matrix[i, i] >= matrix[i, j] for j in range(len(morphs)) if j != i)
    )
    return CrossEvalResult(matrix=matrix,
                           morph_ids=tuple(s.morph_id for s in schedule.stages),
                           diagonal_dominant_rows=dominant)


@dataclass(frozen=True)
class PcaTrajectory:
    points: np.ndarray = field(repr=False)             # (n, 3)
    explained_variance: np.ndarray = field(repr=False)  # (3,)
    total_variance: float


def pca_trajectory(snapshots: Sequence[np.ndarray]) -> PcaTrajectory:
    """Project weight-vector snapshots onto their top-3 principal components.

    Components are computed from the Gram matrix when there are fewer
    snapshots than dimensions (and from the covariance otherwise); the
    sign convention makes each component's largest-magnitude loading
    positive, so trajectories reproduce across runs.
    """
    if len(snapshots) < 2:
        raise ShapeError("need at least 2 snapshots")
    x = np.asarray(snapshots, dtype=np.float64)
    if x.ndim != 2:
        raise ShapeError("snapshots must share one flat dimension")
    n, d = x.shape
    centered = x - x.mean(axis=0)
    denom = n - 1
    total_var = float(np.sum(centered ** 2)) / denom

    if n <= d:
        gram = centered @ centered.T
        eigvals, u = np.linalg.eigh(gram)
        order = np.argsort(eigvals)[::-1]
        eigvals, u = eigvals[order], u[:, order]
        components = []
        for k in range(min(3, len(eigvals))):
            if eigvals[k] <= 1e-12 * max(1.0, abs(eigvals[0])):
                break
            components.append(centered.T @ u[:, k] / np.sqrt(eigvals[k]))
        variances = eigvals / denom
    else:
        cov = centered.T @ centered / denom
        eigvals, v = np.linalg.eigh(cov)
        order = np.argsort(eigvals)[::-1]
        eigvals, v = eigvals[order], v[:, order]
        components = [v[:, k] for k in range(min(3, d)) if eigvals[k] > 1e-12]
        variances = eigvals

    points = np.zeros((n, 3))
    explained = np.zeros(3)
    for k, comp in enumerate(components[:3]):
        peak = np.argmax(np.abs(comp))
        if comp[peak] < 0:
            comp = -comp
        points[:, k] = centered @ comp
        explained[k] = variances[k]
    return PcaTrajectory(points=points, explained_variance=explained,
                         total_variance=total_var)
