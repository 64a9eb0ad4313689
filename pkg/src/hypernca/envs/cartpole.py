"""Classic cart-pole balancing, scalar-math implementation.

Discrete actions push the cart left (0) or right (1); +1 reward per step
until the pole tips past 12 degrees, the cart leaves the track, or the
step cap is reached. Initial state is uniform in (-0.05, 0.05)^4 drawn
from the env seed.
"""

from __future__ import annotations

import math

import numpy as np

from ..errors import EpisodeContractError
from ..rng import generator
from . import EnvSpec, StepResult

GRAVITY = 9.8
CART_MASS = 1.0
POLE_MASS = 0.1
TOTAL_MASS = CART_MASS + POLE_MASS
POLE_HALF_LENGTH = 0.5
POLE_MASS_LENGTH = POLE_MASS * POLE_HALF_LENGTH
FORCE_MAG = 10.0
DT = 0.02
X_LIMIT = 2.4
THETA_LIMIT = 12.0 * math.pi / 180.0


class CartPole:
    def __init__(self, spec: EnvSpec):
        self.spec = spec
        self._state = None
        self._steps = 0
        self._done = True

    def reset(self) -> np.ndarray:
        rng = generator(self.spec.env_seed)
        self._state = list(rng.uniform(-0.05, 0.05, size=4))
        self._steps = 0
        self._done = False
        return np.array(self._state)

    def step(self, action: int) -> StepResult:
        if self._done:
            raise EpisodeContractError("step() called on a finished episode")
        if action not in (0, 1):
            raise EpisodeContractError(f"cart-pole action must be 0 or 1, got {action!r}")
        x, x_dot, theta, theta_dot = self._state
        force = FORCE_MAG if action == 1 else -FORCE_MAG
        cos_t = math.cos(theta)
        sin_t = math.sin(theta)
        temp = (force + POLE_MASS_LENGTH * theta_dot ** 2 * sin_t) / TOTAL_MASS
        theta_acc = (GRAVITY * sin_t - cos_t * temp) / (
            POLE_HALF_LENGTH * (4.0 / 3.0 - POLE_MASS * cos_t ** 2 / TOTAL_MASS)
        )
        x_acc = temp - POLE_MASS_LENGTH * theta_acc * cos_t / TOTAL_MASS
        x += DT * x_dot
        x_dot += DT * x_acc
        theta += DT * theta_dot
        theta_dot += DT * theta_acc
        self._state = [x, x_dot, theta, theta_dot]
        self._steps += 1
        failed = abs(x) > X_LIMIT or abs(theta) > THETA_LIMIT
        self._done = failed or self._steps >= self.spec.max_steps
        return StepResult(np.array(self._state), 1.0, self._done)
