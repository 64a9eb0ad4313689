"""The neural cellular automaton transition rule and its genome.

The rule is a stack of 3x3x3 convolutions over the substrate volume
(zero padding 1, tanh after each conv) followed by a per-cell dense layer
mapping the hidden features back to the substrate channels. Every cell is
updated synchronously by the same rule. In residual mode the tanh of the
dense output is added to the current state; in replace mode it becomes
the new state.

Genome layout (row-major, in order):
  conv 0 kernel  (H, C, 3, 3, 3)   then bias (H,) if use_bias
  conv i kernel  (H, H, 3, 3, 3)   then bias (H,) if use_bias, for i >= 1
  dense weights  (C, H)            then bias (C,) if use_bias
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import ConfigError, NumericError, ShapeError
from .substrate import Substrate

_KERNEL = 3
_OFFSETS = [(dz, dy, dx) for dz in range(_KERNEL) for dy in range(_KERNEL)
            for dx in range(_KERNEL)]


class UpdateMode(Enum):
    RESIDUAL = "residual"
    REPLACE = "replace"


@dataclass(frozen=True)
class NcaConfig:
    channels: int
    hidden_channels: int
    conv_layers: int = 1
    use_bias: bool = False
    update_mode: UpdateMode = UpdateMode.RESIDUAL

    def __post_init__(self) -> None:
        if self.channels < 1 or self.hidden_channels < 1 or self.conv_layers < 1:
            raise ConfigError("channels, hidden_channels and conv_layers must be >= 1")


def param_count(config: NcaConfig) -> int:
    """Number of genome entries the rule consumes."""
    c, h = config.channels, config.hidden_channels
    n = 27 * c * h + (h if config.use_bias else 0)
    for _ in range(config.conv_layers - 1):
        n += 27 * h * h + (h if config.use_bias else 0)
    n += h * c + (c if config.use_bias else 0)
    return n


@dataclass(frozen=True)
class NcaGenome:
    config: NcaConfig
    params: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        expected = param_count(self.config)
        if self.params.ndim != 1 or len(self.params) != expected:
            raise ShapeError(
                f"genome length {self.params.shape} does not match "
                f"param_count(config) = {expected}"
            )
        if not np.all(np.isfinite(self.params)):
            raise NumericError("genome contains non-finite parameters")


def _unpack(genome: NcaGenome):
    """Slice the flat parameter vector into kernels, dense weights, biases."""
    cfg = genome.config
    c, h = cfg.channels, cfg.hidden_channels
    p = np.asarray(genome.params, dtype=np.float64)
    pos = 0
    convs = []
    c_in = c
    for _ in range(cfg.conv_layers):
        k = p[pos:pos + 27 * c_in * h].reshape(h, c_in, 3, 3, 3)
        pos += 27 * c_in * h
        if cfg.use_bias:
            b = p[pos:pos + h]
            pos += h
        else:
            b = None
        convs.append((k, b))
        c_in = h
    dense = p[pos:pos + h * c].reshape(c, h)
    pos += h * c
    dense_b = None
    if cfg.use_bias:
        dense_b = p[pos:pos + c]
        pos += c
    return convs, dense, dense_b


def _conv3d(x: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    """3x3x3 convolution with zero padding 1 over the (L, W, W) volume.

    x: (C_in, L, W, W); kernel: (C_out, C_in, 3, 3, 3) -> (C_out, L, W, W).
    """
    c_in, l, w, _ = x.shape
    padded = np.zeros((c_in, l + 2, w + 2, w + 2), dtype=np.float64)
    padded[:, 1:-1, 1:-1, 1:-1] = x
    out = np.zeros((kernel.shape[0], l, w, w), dtype=np.float64)
    for dz, dy, dx in _OFFSETS:
        patch = padded[:, dz:dz + l, dy:dy + w, dx:dx + w]
        out += np.einsum("oc,clij->olij", kernel[:, :, dz, dy, dx], patch)
    return out


def step(s: Substrate, genome: NcaGenome) -> Substrate:
    """One synchronous update of every cell."""
    if genome.config.channels != s.shape.channels:
        raise ConfigError(
            f"genome expects {genome.config.channels} channels, "
            f"substrate has {s.shape.channels}"
        )
    convs, dense, dense_b = _unpack(genome)
    feat = s.cells
    for kernel, bias in convs:
        feat = _conv3d(feat, kernel)
        if bias is not None:
            feat += bias[:, None, None, None]
        feat = np.tanh(feat)
    out = np.einsum("ch,hlij->clij", dense, feat)
    if dense_b is not None:
        out += dense_b[:, None, None, None]
    delta = np.tanh(out)
    if genome.config.update_mode is UpdateMode.RESIDUAL:
        cells = s.cells + delta
    else:
        cells = delta
    if not np.all(np.isfinite(cells)):
        raise NumericError("NCA update produced non-finite cell values")
    return Substrate(s.shape, cells)


def develop(s0: Substrate, genome: NcaGenome, steps: int,
            record_snapshots: bool = False):
    """Apply `step` `steps` times; optionally keep every intermediate state.

    Returns the final substrate, or (final, snapshots) with steps + 1
    entries including the seed when record_snapshots is set.
    """
    if steps < 0:
        raise ConfigError("developmental steps must be >= 0")
    s = s0
    snapshots = [s0] if record_snapshots else None
    for i in range(steps):
        try:
            s = step(s, genome)
        except NumericError as e:
            raise NumericError(f"{e} (developmental step {i})") from e
        if record_snapshots:
            snapshots.append(s)
    if record_snapshots:
        return s, snapshots
    return s
