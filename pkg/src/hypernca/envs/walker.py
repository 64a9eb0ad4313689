"""Planar four-leg walker with damaged-morphology variants.

The torso is a rigid body in the x-y plane; each of the four legs is a
massless two-segment chain (hip and knee joints) driven by torque
commands against a spring-damper that pulls the joint back to its rest
pose. Feet are point contacts on flat ground: a normal spring-damper
plus smooth Coulomb friction, applied to the torso at the foot position
and reflected onto the joints through the chain Jacobian. Morphology
variants scale leg segment lengths and can disable actuators (disabled
actuators ignore their torque command; the passive spring stays).

Reward per control step is the torso's forward displacement, so episode
reward telescopes to final x minus initial x. Dynamics contain no
randomness: a rollout is a pure function of (morphology, policy).
"""

from __future__ import annotations

import math

import numpy as np

from ..errors import EpisodeContractError
from . import EnvSpec, MorphologySpec, StepResult

DT = 0.01
GRAVITY = 9.81
TORSO_MASS = 1.0
TORSO_INERTIA = 0.08

HIP_X = (0.25, 0.25, -0.25, -0.25)  # legs 0,1 front; 2,3 back
SEGMENT = 0.24                      # per-segment length at scale 1

JOINT_INERTIA = 0.004
JOINT_SPRING = 1.2
JOINT_DAMP = 0.12
TORQUE_GAIN = 1.4
JOINT_LIMIT = 1.2

GROUND_SPRING = 400.0
GROUND_DAMP = 12.0
FRICTION = 1.0
SLIP_SPEED = 0.05

STAND_HEIGHT = 2 * SEGMENT
FALL_HEIGHT = 0.15
FALL_ANGLE = math.pi / 2


class PlanarWalker:
    def __init__(self, spec: EnvSpec, morph: MorphologySpec):
        self.spec = spec
        self.morph = morph
        self.leg_lengths = tuple(SEGMENT * s for s in morph.leg_scales)
        self._done = True

    def reset(self) -> np.ndarray:
        self._x = 0.0
        self._y = STAND_HEIGHT
        self._theta = 0.0
        self._vx = 0.0
        self._vy = 0.0
        self._omega = 0.0
        self._q = [[0.0, 0.0] for _ in range(4)]
        self._dq = [[0.0, 0.0] for _ in range(4)]
        self._contacts = [False] * 4
        self._prev_feet = [self._foot(i) for i in range(4)]
        self._steps = 0
        self._done = False
        return self._observe()

    def _foot(self, i: int) -> tuple[float, float]:
        seg = self.leg_lengths[i]
        hip = HIP_X[i]
        c, s = math.cos(self._theta), math.sin(self._theta)
        hx = self._x + c * hip
        hy = self._y + s * hip
        a1 = self._theta + self._q[i][0]
        a2 = a1 + self._q[i][1]
        fx = hx + seg * math.sin(a1) + seg * math.sin(a2)
        fy = hy - seg * math.cos(a1) - seg * math.cos(a2)
        return fx, fy

    def _observe(self) -> np.ndarray:
        obs = [self._y, math.sin(self._theta), math.cos(self._theta),
               self._vx, self._vy, self._omega]
        for i in range(4):
            obs.extend(self._q[i])
        for i in range(4):
            obs.extend(self._dq[i])
        obs.extend(1.0 if c else 0.0 for c in self._contacts)
        obs.extend((0.0, 0.0))  # pad to 28
        return np.array(obs)

    def step(self, action) -> StepResult:
        if self._done:
            raise EpisodeContractError("step() called on a finished episode")
        act = np.asarray(action, dtype=np.float64)
        if act.shape != (8,):
            raise EpisodeContractError(f"walker action must have 8 entries, got {act.shape}")

        x_before = self._x
        fx_total, fy_total = 0.0, -TORSO_MASS * GRAVITY
        torque_total = 0.0
        joint_torque = [[0.0, 0.0] for _ in range(4)]
        contacts = [False] * 4

        for i in range(4):
            seg = self.leg_lengths[i]
            foot_x, foot_y = self._foot(i)
            prev_x, prev_y = self._prev_feet[i]
            self._prev_feet[i] = (foot_x, foot_y)
            if foot_y >= 0.0:
                continue
            contacts[i] = True
            vfx = (foot_x - prev_x) / DT
            vfy = (foot_y - prev_y) / DT
            normal = -GROUND_SPRING * foot_y - GROUND_DAMP * vfy
            if normal < 0.0:
                continue
            fric = -FRICTION * normal * math.tanh(vfx / SLIP_SPEED)
            fx_total += fric
            fy_total += normal
            torque_total += (foot_x - self._x) * normal - (foot_y - self._y) * fric
            # Jacobian-transpose load on the chain joints.
            a1 = self._theta + self._q[i][0]
            a2 = a1 + self._q[i][1]
            j2x, j2y = seg * math.cos(a2), seg * math.sin(a2)
            j1x, j1y = seg * math.cos(a1) + j2x, seg * math.sin(a1) + j2y
            joint_torque[i][0] = j1x * fric + j1y * normal
            joint_torque[i][1] = j2x * fric + j2y * normal
        self._contacts = contacts

        for i in range(4):
            for j in range(2):
                cmd = act[2 * i + j] if self.morph.actuators_enabled[2 * i + j] else 0.0
                q, dq = self._q[i][j], self._dq[i][j]
                acc = (TORQUE_GAIN * cmd + joint_torque[i][j]
                       - JOINT_SPRING * q - JOINT_DAMP * dq) / JOINT_INERTIA
                dq += DT * acc
                q += DT * dq
                if q > JOINT_LIMIT:
                    q, dq = JOINT_LIMIT, 0.0
                elif q < -JOINT_LIMIT:
                    q, dq = -JOINT_LIMIT, 0.0
                self._q[i][j], self._dq[i][j] = q, dq

        self._vx += DT * fx_total / TORSO_MASS
        self._vy += DT * fy_total / TORSO_MASS
        self._omega += DT * torque_total / TORSO_INERTIA
        self._x += DT * self._vx
        self._y += DT * self._vy
        self._theta += DT * self._omega
        self._steps += 1

        fell = self._y < FALL_HEIGHT or abs(self._theta) > FALL_ANGLE
        self._done = fell or self._steps >= self.spec.max_steps
        return StepResult(self._observe(), self._x - x_before, self._done)
