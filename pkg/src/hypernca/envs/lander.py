"""2D lander on procedurally generated terrain.

A rigid body with two landing legs descends onto a flat pad at the center
of a seed-generated heightfield. Four discrete actions: noop, left
thruster, main engine, right thruster. Rewards follow the familiar
shaped scheme: a potential over (distance to pad, speed, tilt, leg
contacts), -0.3 per main-engine frame, -0.03 per side-thruster frame,
-100 on crash, +100 on coming to rest. Physics is semi-implicit Euler at
50 Hz; legs are spring-damper contacts, hull contact is a crash.

`reward_breakdown` exposes the accounting identity: fuel terms are
computed as frame-count times per-frame cost.
"""

from __future__ import annotations

import math

import numpy as np

from ..errors import EpisodeContractError
from ..rng import derive_seed, generator
from . import EnvSpec, StepResult

DT = 0.02  # 50 Hz
GRAVITY = 1.62
MASS = 1.0
INERTIA = 0.05

MAIN_ACCEL = 4.0
SIDE_ACCEL = 0.6
SIDE_SPIN = 0.8

MAIN_COST = -0.3
SIDE_COST = -0.03
CRASH_REWARD = -100.0
REST_REWARD = 100.0
LEG_BONUS = 10.0

WORLD_HALF_WIDTH = 1.1
CEILING = 1.6
PAD_HALF_WIDTH = 0.2
PAD_HEIGHT = 0.25
TERRAIN_KNOTS = 11
TERRAIN_MAX_BUMP = 0.35
_TERRAIN_STREAM = 0x7E44A1

SPAWN_X = 0.0
SPAWN_Y = 1.3
SPAWN_SPEED = 0.15

HULL_RADIUS = 0.07
LEG_OFFSETS = ((-0.09, -0.14), (0.09, -0.14))  # body frame
LEG_SPRING = 60.0
LEG_DAMP = 8.0
FRICTION = 0.7
SLIP_SPEED = 0.1

TILT_LIMIT = math.pi / 2
REST_SPEED = 0.05
REST_OMEGA = 0.1
REST_FRAMES = 10

NOOP, LEFT, MAIN, RIGHT = 0, 1, 2, 3


def terrain_heights(env_seed: int) -> np.ndarray:
    """Knot heights over [-1, 1]; the pad knots are flattened to PAD_HEIGHT."""
    rng = generator(derive_seed(env_seed, _TERRAIN_STREAM))
    xs = np.linspace(-1.0, 1.0, TERRAIN_KNOTS)
    heights = PAD_HEIGHT + rng.uniform(0.0, TERRAIN_MAX_BUMP, TERRAIN_KNOTS)
    heights[np.abs(xs) <= PAD_HALF_WIDTH + 1e-9] = PAD_HEIGHT
    return heights


class Lander2D:
    def __init__(self, spec: EnvSpec):
        self.spec = spec
        self._knot_x = np.linspace(-1.0, 1.0, TERRAIN_KNOTS)
        self._knot_h = terrain_heights(spec.env_seed)
        self._done = True
        self.reward_breakdown: dict[str, float] = {}

    def terrain_at(self, x: float) -> float:
        return float(np.interp(x, self._knot_x, self._knot_h))

    def reset(self) -> np.ndarray:
        rng = generator(derive_seed(self.spec.env_seed, _TERRAIN_STREAM, 1))
        self._x = SPAWN_X
        self._y = SPAWN_Y
        self._vx = float(rng.uniform(-1.0, 1.0)) * SPAWN_SPEED
        self._vy = float(rng.uniform(-1.0, 1.0)) * SPAWN_SPEED
        self._theta = 0.0
        self._omega = 0.0
        self._contacts = [False, False]
        self._steps = 0
        self._rest_counter = 0
        self._main_frames = 0
        self._side_frames = 0
        self._shaping_total = 0.0
        self._terminal = 0.0
        self._done = False
        self._prev_potential = self._potential()
        return self._observe()

    def _leg_world(self, i: int) -> tuple[float, float]:
        ox, oy = LEG_OFFSETS[i]
        c, s = math.cos(self._theta), math.sin(self._theta)
        return self._x + c * ox - s * oy, self._y + s * ox + c * oy

    def _potential(self) -> float:
        dist = math.hypot(self._x, self._y - PAD_HEIGHT)
        speed = math.hypot(self._vx, self._vy)
        legs = LEG_BONUS * (self._contacts[0] + self._contacts[1])
        return -100.0 * dist - 100.0 * speed - 100.0 * abs(self._theta) + legs

    def _observe(self) -> np.ndarray:
        return np.array([
            self._x, self._y - PAD_HEIGHT, self._vx, self._vy,
            self._theta, self._omega,
            1.0 if self._contacts[0] else 0.0,
            1.0 if self._contacts[1] else 0.0,
        ])

    def step(self, action: int) -> StepResult:
        if self._done:
            raise EpisodeContractError("step() called on a finished episode")
        if action not in (NOOP, LEFT, MAIN, RIGHT):
            raise EpisodeContractError(f"lander action must be in 0..3, got {action!r}")

        c, s = math.cos(self._theta), math.sin(self._theta)
        ax, ay = 0.0, -GRAVITY
        alpha = 0.0
        fuel = 0.0
        if action == MAIN:
            ax += -s * MAIN_ACCEL
            ay += c * MAIN_ACCEL
            self._main_frames += 1
            fuel = MAIN_COST
        elif action == LEFT:
            ax += c * SIDE_ACCEL
            ay += s * SIDE_ACCEL
            alpha += SIDE_SPIN
            self._side_frames += 1
            fuel = SIDE_COST
        elif action == RIGHT:
            ax += -c * SIDE_ACCEL
            ay += -s * SIDE_ACCEL
            alpha -= SIDE_SPIN
            self._side_frames += 1
            fuel = SIDE_COST

        # Leg spring-damper contacts.
        contacts = [False, False]
        for i in range(2):
            px, py = self._leg_world(i)
            pen = self.terrain_at(px) - py
            if pen <= 0.0:
                continue
            contacts[i] = True
            rx, ry = px - self._x, py - self._y
            leg_vy = self._vy + self._omega * rx
            leg_vx = self._vx - self._omega * ry
            normal = LEG_SPRING * pen - LEG_DAMP * leg_vy
            if normal < 0.0:
                normal = 0.0
            fric = -FRICTION * normal * math.tanh(leg_vx / SLIP_SPEED)
            ax += fric / MASS
            ay += normal / MASS
            alpha += (rx * normal - ry * fric) / INERTIA
        self._contacts = contacts

        self._vx += DT * ax
        self._vy += DT * ay
        self._x += DT * self._vx
        self._y += DT * self._vy
        self._omega += DT * alpha
        self._theta += DT * self._omega
        self._steps += 1

        crashed = (
            self._y - HULL_RADIUS < self.terrain_at(self._x)
            or abs(self._theta) > TILT_LIMIT
            or abs(self._x) > WORLD_HALF_WIDTH
            or self._y > CEILING
        )
        at_rest = False
        if not crashed:
            settled = (contacts[0] and contacts[1]
                       and abs(self._vx) <= REST_SPEED
                       and abs(self._vy) <= REST_SPEED
                       and abs(self._omega) <= REST_OMEGA)
            self._rest_counter = self._rest_counter + 1 if settled else 0
            at_rest = self._rest_counter >= REST_FRAMES

        potential = self._potential()
        shaping = potential - self._prev_potential
        self._prev_potential = potential
        self._shaping_total += shaping

        reward = shaping + fuel
        if crashed:
            reward += CRASH_REWARD
            self._terminal = CRASH_REWARD
        elif at_rest:
            reward += REST_REWARD
            self._terminal = REST_REWARD

        self._done = crashed or at_rest or self._steps >= self.spec.max_steps
        if self._done:
            self.reward_breakdown = {
                "shaping": self._shaping_total,
                "fuel_main": self._main_frames * MAIN_COST,
                "fuel_side": self._side_frames * SIDE_COST,
                "legs": LEG_BONUS * (self._contacts[0] + self._contacts[1]),
                "terminal": self._terminal,
            }
        return StepResult(self._observe(), reward, self._done)
