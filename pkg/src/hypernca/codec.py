"""Genome codecs: how a flat evolved vector becomes policy weights."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import hyper, nca, substrate
from .policy import Policy, PolicySpec, from_flat, materialize


@dataclass(frozen=True)
class NcaPolicyCodec:
    """Grow the policy: seed a substrate, develop it, read out channel 0."""

    nca_config: nca.NcaConfig
    shape: substrate.SubstrateShape
    seed_spec: substrate.SeedSpec
    dev_steps: int
    policy_spec: PolicySpec

    @property
    def genome_length(self) -> int:
        return nca.param_count(self.nca_config)

    def seed_substrate(self) -> substrate.Substrate:
        return substrate.seed(self.shape, self.seed_spec)

    def grow(self, genome: np.ndarray) -> Policy:
        g = nca.NcaGenome(self.nca_config, np.asarray(genome, dtype=np.float64))
        grown = nca.develop(self.seed_substrate(), g, self.dev_steps)
        return materialize(substrate.readout_channel(grown), self.policy_spec)


@dataclass(frozen=True)
class LinearHyperCodec:
    """Generate the policy parameter vector with the linear hypernetwork."""

    config: hyper.LinearHyperConfig
    policy_spec: PolicySpec

    @property
    def genome_length(self) -> int:
        return hyper.baseline_param_count(self.config)

    def grow(self, genome: np.ndarray) -> Policy:
        g = hyper.LinearHyperGenome(self.config, np.asarray(genome, dtype=np.float64))
        return from_flat(hyper.generate(g), self.policy_spec)
