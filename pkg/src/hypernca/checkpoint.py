"""Binary checkpoints with bit-exact round-trips.

Layout (all little-endian):

    magic   b"HNCA"
    u32     format version (currently 1)
    u32     config byte length, then UTF-8 canonical config text
    f64     best fitness
    u32     generation
    u32     genome length, then genome float64 array
    u8      optimizer-state flag (0/1); if 1:
            u32 dim, u32 population, f64 sigma, u32 generation,
            f64[dim] mean, f64[dim] p_sigma, f64[dim] p_c, f64[dim*dim] cov
    u32     CRC-32 of every preceding byte

Strategy constants are recomputed from (dim, population) on load.
"""

from __future__ import annotations

import struct
import zlib
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .cmaes import EsState, init_state
from .errors import ConfigError

MAGIC = b"HNCA"
VERSION = 1


@dataclass(frozen=True)
class Checkpoint:
    config_text: str
    genome: np.ndarray = field(repr=False)
    best_fitness: float
    generation: int
    es_state: Optional[EsState] = field(default=None, repr=False)


def _pack_f64(a: np.ndarray) -> bytes:
    return np.ascontiguousarray(a, dtype="<f8").tobytes()


def serialize(ckpt: Checkpoint) -> bytes:
    config_bytes = ckpt.config_text.encode("utf-8")
    parts = [
        MAGIC,
        struct.pack("<I", VERSION),
        struct.pack("<I", len(config_bytes)), config_bytes,
        struct.pack("<d", float(ckpt.best_fitness)),
        struct.pack("<I", int(ckpt.generation)),
        struct.pack("<I", len(ckpt.genome)), _pack_f64(ckpt.genome),
    ]
    state = ckpt.es_state
    if state is None:
        parts.append(struct.pack("<B", 0))
    else:
        parts.append(struct.pack("<B", 1))
        parts.append(struct.pack("<IIdI", state.dim, state.population,
                                 state.sigma, state.generation))
        parts.extend(_pack_f64(a) for a in
                     (state.mean, state.p_sigma, state.p_c, state.cov))
    body = b"".join(parts)
    return body + struct.pack("<I", zlib.crc32(body))


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise ConfigError("checkpoint truncated")
        out = self.data[self.pos:self.pos + n]
        self.pos += n
        return out

    def unpack(self, fmt: str):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))

    def f64(self, count: int) -> np.ndarray:
        return np.frombuffer(self.take(8 * count), dtype="<f8").astype(np.float64)


def deserialize(data: bytes) -> Checkpoint:
    if len(data) < 4 or zlib.crc32(data[:-4]) != struct.unpack("<I", data[-4:])[0]:
        raise ConfigError("checkpoint checksum mismatch (corrupt file)")
    r = _Reader(data[:-4])
    if r.take(4) != MAGIC:
        raise ConfigError("not a checkpoint file (bad magic)")
    (version,) = r.unpack("<I")
    if version != VERSION:
        raise ConfigError(f"unsupported checkpoint version {version}")
    (config_len,) = r.unpack("<I")
    config_text = r.take(config_len).decode("utf-8")
    (best_fitness,) = r.unpack("<d")
    (generation,) = r.unpack("<I")
    (genome_len,) = r.unpack("<I")
    genome = r.f64(genome_len)
    (flag,) = r.unpack("<B")
    state = None
    if flag:
        dim, population, sigma, state_gen = r.unpack("<IIdI")
        mean = r.f64(dim)
        p_sigma = r.f64(dim)
        p_c = r.f64(dim)
        cov = r.f64(dim * dim).reshape(dim, dim)
        base = init_state(mean, sigma, population)
        state = EsState(**{**base.__dict__,
                           "mean": mean, "sigma": sigma, "cov": cov,
                           "p_sigma": p_sigma, "p_c": p_c,
                           "generation": state_gen,
                           "pending": None, "eig": None})
    if r.pos != len(r.data):
        raise ConfigError("checkpoint has trailing bytes")
    return Checkpoint(config_text=config_text, genome=genome,
                      best_fitness=best_fitness, generation=generation,
                      es_state=state)


def save_checkpoint(path, ckpt: Checkpoint) -> None:
    with open(path, "wb") as f:
        f.write(serialize(ckpt))


def load_checkpoint(path) -> Checkpoint:
    with open(path, "rb") as f:
        return deserialize(f.read())
