"""The developmental substrate: a [C, L, W, W] grid of real-valued cells.

The grid has one layer slice per policy weight matrix and a square W x W
face sized to the widest policy layer. Channel 0 is the read-out channel;
the remaining channels are free hidden state for the developmental rule.
Memory layout is row-major [c, l, i, j] so flattened substrates are
portable across machines.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from .errors import ShapeError
from .rng import generator


@dataclass(frozen=True)
class SubstrateShape:
    channels: int
    layers: int
    width: int

    def __post_init__(self) -> None:
        for name in ("channels", "layers", "width"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or v < 1:
                raise ShapeError(f"substrate {name} must be a positive integer, got {v!r}")

    @property
    def cell_count(self) -> int:
        return self.channels * self.layers * self.width * self.width

    def dims(self) -> tuple[int, int, int, int]:
        return (self.channels, self.layers, self.width, self.width)


class SeedMode(Enum):
    UNIFORM_RANDOM = "uniform"
    CENTER_IMPULSE = "impulse"


@dataclass(frozen=True)
class SeedSpec:
    """How the initial substrate is filled.

    UNIFORM_RANDOM draws every cell i.i.d. from the open interval (-1, 1)
    using `rng_seed`; CENTER_IMPULSE places `value` at the single cell
    [0, L//2, W//2, W//2] and zero elsewhere.
    """

    mode: SeedMode
    rng_seed: int = 0
    value: float = 1.0

    @classmethod
    def uniform(cls, rng_seed: int) -> "SeedSpec":
        return cls(SeedMode.UNIFORM_RANDOM, rng_seed=rng_seed)

    @classmethod
    def impulse(cls, value: float) -> "SeedSpec":
        return cls(SeedMode.CENTER_IMPULSE, value=value)


@dataclass(frozen=True)
class Substrate:
    shape: SubstrateShape
    cells: np.ndarray  # float64, shape (C, L, W, W), row-major

    def __post_init__(self) -> None:
        if self.cells.shape != self.shape.dims():
            raise ShapeError(
                f"cell array shape {self.cells.shape} does not match {self.shape.dims()}"
            )

    @property
    def flat(self) -> np.ndarray:
        """The cells as a length C*L*W*W row-major vector (read-only view)."""
        v = self.cells.reshape(-1)
        v.flags.writeable = False
        return v


def shape_for_policy(layer_sizes: Sequence[int], channels: int) -> SubstrateShape:
    """Substrate shape for a policy given as [n0 (input), n1, ..., nk].

    One layer slice per weight matrix; the face is sized to the widest
    policy layer so every matrix fits in its slice.
    """
    if len(layer_sizes) < 2:
        raise ShapeError("layer_sizes needs an input size and at least one output size")
    for n in layer_sizes:
        if not isinstance(n, (int, np.integer)) or n < 1:
            raise ShapeError(f"layer sizes must be positive integers, got {n!r}")
    return SubstrateShape(channels=int(channels), layers=len(layer_sizes) - 1,
                          width=int(max(layer_sizes)))


def seed(shape: SubstrateShape, spec: SeedSpec) -> Substrate:
    """Create the initial substrate for a developmental run."""
    c, l, w, _ = shape.dims()
    if spec.mode is SeedMode.CENTER_IMPULSE:
        cells = np.zeros(shape.dims(), dtype=np.float64)
        cells[0, l // 2, w // 2, w // 2] = float(spec.value)
        return Substrate(shape, cells)

    rng = generator(spec.rng_seed)
    cells = rng.uniform(-1.0, 1.0, size=shape.dims())
    # numpy's uniform is half-open; redraw the (measure-zero) boundary hits
    # so values are strictly inside (-1, 1).
    edge = np.abs(cells) >= 1.0
    while np.any(edge):
        cells[edge] = rng.uniform(-1.0, 1.0, size=int(edge.sum()))
        edge = np.abs(cells) >= 1.0
    return Substrate(shape, cells)


def readout_channel(s: Substrate) -> np.ndarray:
    """Copy of the channel-0 slice, shape (L, W, W)."""
    return s.cells[0].copy()
