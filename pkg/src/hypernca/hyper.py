"""Linear hypernetwork baseline.

A genome holds N embeddings of dimension E plus one shared E x M generator
matrix. Each embedding is pushed through the generator and the N chunks of
length M = T / N are concatenated into the target parameter vector. No
bias, no nonlinearity.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, NumericError, ShapeError


@dataclass(frozen=True)
class LinearHyperConfig:
    num_embeddings: int
    embedding_dim: int
    target_param_count: int

    def __post_init__(self) -> None:
        if self.num_embeddings < 1 or self.embedding_dim < 1 or self.target_param_count < 1:
            raise ConfigError("hypernetwork sizes must be positive")
        if self.target_param_count % self.num_embeddings != 0:
            raise ConfigError(
                f"num_embeddings {self.num_embeddings} must divide "
                f"target_param_count {self.target_param_count}"
            )

    @property
    def chunk_size(self) -> int:
        return self.target_param_count // self.num_embeddings


def baseline_param_count(config: LinearHyperConfig) -> int:
    """N*E embedding entries plus the E*(T/N) generator entries."""
    return (config.num_embeddings * config.embedding_dim
            + config.embedding_dim * config.chunk_size)


@dataclass(frozen=True)
class LinearHyperGenome:
    config: LinearHyperConfig
    params: np.ndarray = field(repr=False)  # embeddings (N, E) then generator (E, M), row-major

    def __post_init__(self) -> None:
        expected = baseline_param_count(self.config)
        if self.params.ndim != 1 or len(self.params) != expected:
            raise ShapeError(f"genome length {self.params.shape}, expected {expected}")
        if not np.all(np.isfinite(self.params)):
            raise NumericError("genome contains non-finite parameters")

    def embeddings(self) -> np.ndarray:
        n, e = self.config.num_embeddings, self.config.embedding_dim
        return self.params[:n * e].reshape(n, e)

    def generator(self) -> np.ndarray:
        n, e = self.config.num_embeddings, self.config.embedding_dim
        return self.params[n * e:].reshape(e, self.config.chunk_size)


def generate(genome: LinearHyperGenome) -> np.ndarray:
    """Concatenated generator outputs: chunk i = embedding_i @ G, length T."""
    out = genome.embeddings() @ genome.generator()
    return out.reshape(-1)
