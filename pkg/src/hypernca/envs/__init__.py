"""Deterministic, dependency-free RL environments.

Three tasks: cart-pole (discrete smoke task), a 2D lander with shaped
rewards, and a planar four-leg walker with morphology variants. Every
rollout is a pure function of (EnvSpec, MorphologySpec, policy weights):
the env seed freezes all procedural content and no randomness is drawn
after reset.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from ..errors import ConfigError
from ..policy import ActionMode, Policy, forward


class EnvId(Enum):
    CARTPOLE = "cartpole"
    LANDER2D = "lander"
    PLANAR_WALKER = "walker"


_ENV_DIMS = {
    # id: (obs_dim, action_dim, action_mode, default max_steps)
    EnvId.CARTPOLE: (4, 2, ActionMode.DISCRETE, 500),
    EnvId.LANDER2D: (8, 4, ActionMode.DISCRETE, 500),
    EnvId.PLANAR_WALKER: (28, 8, ActionMode.CONTINUOUS, 1000),
}


@dataclass(frozen=True)
class EnvSpec:
    env_id: EnvId
    env_seed: int = 0
    max_steps: int = 0  # 0 = task default

    def __post_init__(self) -> None:
        if self.max_steps == 0:
            object.__setattr__(self, "max_steps", _ENV_DIMS[self.env_id][3])
        if self.max_steps < 1:
            raise ConfigError("max_steps must be positive")

    @property
    def obs_dim(self) -> int:
        return _ENV_DIMS[self.env_id][0]

    @property
    def action_dim(self) -> int:
        return _ENV_DIMS[self.env_id][1]

    @property
    def action_mode(self) -> ActionMode:
        return _ENV_DIMS[self.env_id][2]


@dataclass(frozen=True)
class MorphologySpec:
    """A walker body variant: per-leg length scales and actuator switches."""

    morph_id: str
    leg_scales: tuple[float, float, float, float]
    actuators_enabled: tuple[bool, ...]  # 8 flags, leg-major (hip, knee)

    def __post_init__(self) -> None:
        if len(self.actuators_enabled) != 8:
            raise ConfigError("walker has 8 actuators")
        if any(not (0.0 <= s <= 1.0) for s in self.leg_scales):
            raise ConfigError("leg scales must lie in [0, 1]")


# Legs 0,1 are the front pair, 2,3 the back pair.
MORPHOLOGIES = {
    "M1": MorphologySpec("M1", (1.0, 1.0, 1.0, 1.0), (True,) * 8),
    "M2": MorphologySpec("M2", (0.5, 1.0, 0.5, 1.0), (True,) * 8),
    "M3": MorphologySpec("M3", (0.5, 0.5, 1.0, 1.0), (True,) * 8),
}


def morphology(morph_id: str) -> MorphologySpec:
    try:
        return MORPHOLOGIES[morph_id]
    except KeyError:
        raise ConfigError(f"unknown morphology {morph_id!r}") from None


@dataclass(frozen=True)
class StepResult:
    observation: np.ndarray
    reward: float
    done: bool


def make_env(spec: EnvSpec, morph: Optional[MorphologySpec] = None):
    """Instantiate the environment behind a spec."""
    if morph is not None and spec.env_id is not EnvId.PLANAR_WALKER:
        raise ConfigError("morphology variants only apply to the walker")
    if spec.env_id is EnvId.CARTPOLE:
        from .cartpole import CartPole
        return CartPole(spec)
    if spec.env_id is EnvId.LANDER2D:
        from .lander import Lander2D
        return Lander2D(spec)
    from .walker import PlanarWalker
    return PlanarWalker(spec, morph if morph is not None else MORPHOLOGIES["M1"])


def rollout(spec: EnvSpec, policy: Policy, morph: Optional[MorphologySpec] = None,
            max_steps: Optional[int] = None, trajectory: Optional[list] = None
            ) -> tuple[float, int]:
    """One deterministic episode; returns (total reward, steps taken).

    If `trajectory` is a list, (t, obs, action, reward) tuples are appended
    per step.
    """
    if policy.spec.obs_dim != spec.obs_dim or policy.spec.action_dim != spec.action_dim:
        raise ConfigError(
            f"policy dims ({policy.spec.obs_dim}, {policy.spec.action_dim}) do not "
            f"match env dims ({spec.obs_dim}, {spec.action_dim})"
        )
    env = make_env(spec, morph)
    obs = env.reset()
    limit = spec.max_steps if max_steps is None else min(max_steps, spec.max_steps)
    total = 0.0
    steps = 0
    for t in range(limit):
        action = forward(policy, obs)
        result = env.step(action)
        total += result.reward
        steps += 1
        if trajectory is not None:
            trajectory.append((t, obs, action, result.reward))
        obs = result.observation
        if result.done:
            break
    return total, steps
