"""Feedforward policies materialized from the substrate read-out channel.

Policies are bias-free tanh networks. Each weight matrix is the top-left
n_i x n_(i+1) block of its layer slice; substrate cells outside that
block never enter the policy.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np

from .errors import NumericError, ShapeError


class ActionMode(Enum):
    CONTINUOUS = "continuous"  # tanh output vector
    DISCRETE = "discrete"      # argmax over outputs, ties to lowest index


@dataclass(frozen=True)
class PolicySpec:
    layer_sizes: tuple[int, ...]
    action_mode: ActionMode

    def __post_init__(self) -> None:
        if len(self.layer_sizes) < 2:
            raise ShapeError("a policy needs an input size and at least one layer")
        if any(n < 1 for n in self.layer_sizes):
            raise ShapeError("layer sizes must be positive")
        object.__setattr__(self, "layer_sizes", tuple(int(n) for n in self.layer_sizes))

    @property
    def num_matrices(self) -> int:
        return len(self.layer_sizes) - 1

    @property
    def param_count(self) -> int:
        ns = self.layer_sizes
        return sum(ns[i] * ns[i + 1] for i in range(len(ns) - 1))

    @property
    def obs_dim(self) -> int:
        return self.layer_sizes[0]

    @property
    def action_dim(self) -> int:
        return self.layer_sizes[-1]


@dataclass(frozen=True)
class Policy:
    spec: PolicySpec
    weights: tuple[np.ndarray, ...] = field(repr=False)

    def __post_init__(self) -> None:
        ns = self.spec.layer_sizes
        if len(self.weights) != self.spec.num_matrices:
            raise ShapeError("weight matrix count does not match spec")
        for i, w in enumerate(self.weights):
            if w.shape != (ns[i], ns[i + 1]):
                raise ShapeError(
                    f"matrix {i} has shape {w.shape}, expected {(ns[i], ns[i + 1])}"
                )
            if not np.all(np.isfinite(w)):
                raise NumericError(f"matrix {i} contains non-finite weights")

    def flat(self) -> np.ndarray:
        """All weights as one vector, matrices in layer order, row-major."""
        return np.concatenate([w.reshape(-1) for w in self.weights])


def materialize(readout: np.ndarray, spec: PolicySpec) -> Policy:
    """Cut the policy's weight matrices out of a (L, W, W) read-out slice."""
    ns = spec.layer_sizes
    if readout.ndim != 3 or readout.shape[0] != spec.num_matrices:
        raise ShapeError(
            f"read-out has {readout.shape} slices, policy needs {spec.num_matrices}"
        )
    w = readout.shape[1]
    if readout.shape[2] != w or w < max(ns):
        raise ShapeError(f"read-out face {readout.shape[1:]} too small for layers {ns}")
    mats = tuple(readout[i, :ns[i], :ns[i + 1]].copy()
                 for i in range(spec.num_matrices))
    return Policy(spec, mats)


def from_flat(values: np.ndarray, spec: PolicySpec) -> Policy:
    """Build a policy from a flat parameter vector (layer order, row-major)."""
    if values.ndim != 1 or len(values) != spec.param_count:
        raise ShapeError(f"need {spec.param_count} values, got {values.shape}")
    ns = spec.layer_sizes
    mats = []
    pos = 0
    for i in range(spec.num_matrices):
        n = ns[i] * ns[i + 1]
        mats.append(values[pos:pos + n].reshape(ns[i], ns[i + 1]).copy())
        pos += n
    return Policy(spec, tuple(mats))


def forward(policy: Policy, obs: Sequence[float]):
    """Evaluate the policy: tanh after every matrix, no biases.

    Continuous mode returns the output vector; discrete mode returns the
    argmax index (ties resolve to the lowest index).
    """
    h = np.asarray(obs, dtype=np.float64)
    if h.shape != (policy.spec.obs_dim,):
        raise ShapeError(
            f"observation has shape {h.shape}, policy expects ({policy.spec.obs_dim},)"
        )
    if not np.all(np.isfinite(h)):
        raise NumericError("non-finite observation")
    for w in policy.weights:
        h = np.tanh(h @ w)
    if policy.spec.action_mode is ActionMode.DISCRETE:
        return int(np.argmax(h))
    return h
