"""Run configuration: flat `key = value` text with dotted sections.

Lines are `key = value`; `#` starts a comment; blank lines are ignored.
`canonical_text` reproduces the configuration with sorted keys and
normalized value formatting, which is the form embedded in checkpoints
(so write -> read -> write is byte-identical). Unknown keys are errors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

from . import metamorphosis as meta
from .codec import LinearHyperCodec, NcaPolicyCodec
from .envs import EnvId, EnvSpec
from .errors import ConfigError
from .evolve import EarlyStopRule, EsSettings
from .hyper import LinearHyperConfig
from .nca import NcaConfig, UpdateMode
from .policy import ActionMode, PolicySpec
from .substrate import SeedSpec, shape_for_policy
from .tasks import MetamorphosisTask, PolicyTask, RosenbrockTask, SphereTask

TASKS = ("cartpole", "lander", "walker", "walker_meta", "sphere", "rosenbrock")
GENOME_KINDS = ("nca", "linear_hyper", "direct")

_ENV_IDS = {"cartpole": EnvId.CARTPOLE, "lander": EnvId.LANDER2D,
            "walker": EnvId.PLANAR_WALKER, "walker_meta": EnvId.PLANAR_WALKER}

# key -> (type tag, default); None default means required-if-relevant.
_KEYS = {
    "run.task": ("choice:" + ",".join(TASKS), None),
    "run.genome": ("choice:" + ",".join(GENOME_KINDS), None),
    "run.master_seed": ("int", 0),
    "run.workers": ("int", 1),
    "es.population": ("int", 64),
    "es.sigma0": ("float", 0.1),
    "es.max_generations": ("int", 300),
    "es.target_fitness": ("float", None),
    "es.early_stop_generation": ("int", None),
    "es.early_stop_floor": ("float", None),
    "nca.channels": ("int", 4),
    "nca.hidden": ("int", 8),
    "nca.conv_layers": ("int", 1),
    "nca.bias": ("bool", False),
    "nca.update": ("choice:residual,replace", "residual"),
    "nca.steps": ("int", 20),
    "seed.mode": ("choice:uniform,impulse", "uniform"),
    "seed.rng": ("int", 0),
    "seed.value": ("float", 1.0),
    "policy.layers": ("ints", None),
    "hyper.embeddings": ("int", 32),
    "hyper.dim": ("int", 8),
    "env.seed": ("int", 0),
    "env.max_steps": ("int", 0),
    "env.episodes": ("int", 1),
    "task.dimension": ("int", 10),
    "task.mean0": ("float", None),
    "meta.schedule": ("stages", "M1:10,M2:20,M3:20"),
}


def _parse_value(key: str, raw: str):
    kind = _KEYS[key][0]
    raw = raw.strip()
    try:
        if kind == "int":
            return int(raw)
        if kind == "float":
            v = float(raw)
            if not math.isfinite(v):
                raise ValueError("must be finite")
            return v
        if kind == "bool":
            if raw.lower() in ("true", "1", "yes"):
                return True
            if raw.lower() in ("false", "0", "no"):
                return False
            raise ValueError("expected true/false")
        if kind == "ints":
            return tuple(int(p) for p in raw.split(",") if p.strip())
        if kind == "stages":
            stages = []
            for part in raw.split(","):
                morph, _, steps = part.strip().partition(":")
                stages.append(meta.Stage(morph, int(steps)))
            return meta.StageSchedule(tuple(stages))
        if kind.startswith("choice:"):
            options = kind[len("choice:"):].split(",")
            if raw not in options:
                raise ValueError(f"expected one of {options}")
            return raw
    except (ValueError, ConfigError) as e:
        raise ConfigError(f"{key}: invalid value {raw!r} ({e})") from None
    raise AssertionError(f"unknown kind {kind}")


def _format_value(key: str, value) -> str:
    kind = _KEYS[key][0]
    if kind == "bool":
        return "true" if value else "false"
    if kind == "ints":
        return ",".join(str(v) for v in value)
    if kind == "stages":
        return ",".join(f"{s.morph_id}:{s.steps}" for s in value.stages)
    if kind == "float":
        return repr(float(value))
    return str(value)


@dataclass(frozen=True)
class RunConfig:
    values: dict = field(repr=False)

    def __getitem__(self, key: str):
        if key in self.values:
            return self.values[key]
        return _KEYS[key][1]

    def has(self, key: str) -> bool:
        return key in self.values or _KEYS[key][1] is not None

    @property
    def canonical_text(self) -> str:
        lines = [f"{k} = {_format_value(k, self.values[k])}"
                 for k in sorted(self.values)]
        return "\n".join(lines) + "\n"

    # -- derived objects -------------------------------------------------

    @property
    def task_name(self) -> str:
        return self["run.task"]

    @property
    def genome_kind(self) -> str:
        return self["run.genome"]

    def env_spec(self) -> EnvSpec:
        return EnvSpec(_ENV_IDS[self.task_name], env_seed=self["env.seed"],
                       max_steps=self["env.max_steps"])

    def policy_spec(self) -> PolicySpec:
        layers = self["policy.layers"]
        if layers is None:
            raise ConfigError("policy.layers is required for environment tasks")
        env = self.env_spec()
        if layers[0] != env.obs_dim or layers[-1] != env.action_dim:
            raise ConfigError(
                f"policy.layers {list(layers)} must start at obs dim {env.obs_dim} "
                f"and end at action dim {env.action_dim}"
            )
        return PolicySpec(layers, env.action_mode)

    def nca_config(self) -> NcaConfig:
        return NcaConfig(channels=self["nca.channels"],
                         hidden_channels=self["nca.hidden"],
                         conv_layers=self["nca.conv_layers"],
                         use_bias=self["nca.bias"],
                         update_mode=UpdateMode(self["nca.update"]))

    def seed_spec(self) -> SeedSpec:
        if self["seed.mode"] == "impulse":
            return SeedSpec.impulse(self["seed.value"])
        return SeedSpec.uniform(self["seed.rng"])

    def codec(self):
        spec = self.policy_spec()
        if self.genome_kind == "nca":
            shape = shape_for_policy(spec.layer_sizes, self["nca.channels"])
            return NcaPolicyCodec(self.nca_config(), shape, self.seed_spec(),
                                  self["nca.steps"], spec)
        if self.genome_kind == "linear_hyper":
            cfg = LinearHyperConfig(self["hyper.embeddings"], self["hyper.dim"],
                                    spec.param_count)
            return LinearHyperCodec(cfg, spec)
        raise ConfigError("direct genomes have no policy codec")

    def schedule(self) -> meta.StageSchedule:
        return self["meta.schedule"]

    def task(self):
        name = self.task_name
        if name == "sphere":
            mean0 = self["task.mean0"]
            return SphereTask(self["task.dimension"],
                              1.0 if mean0 is None else mean0)
        if name == "rosenbrock":
            mean0 = self["task.mean0"]
            return RosenbrockTask(self["task.dimension"],
                                  0.0 if mean0 is None else mean0)
        if name == "walker_meta":
            if self.genome_kind != "nca":
                raise ConfigError("run.task walker_meta requires run.genome = nca")
            return MetamorphosisTask(self.codec(), self.schedule(), self.env_spec())
        return PolicyTask(self.codec(), self.env_spec(), episodes=self["env.episodes"])

    def es_settings(self) -> EsSettings:
        early = None
        if self["es.early_stop_floor"] is not None:
            gen = self["es.early_stop_generation"]
            early = EarlyStopRule(check_generation=200 if gen is None else gen,
                                  mean_fitness_floor=self["es.early_stop_floor"])
        return EsSettings(population=self["es.population"],
                          sigma0=self["es.sigma0"],
                          max_generations=self["es.max_generations"],
                          target_fitness=self["es.target_fitness"],
                          early_stop=early)

    def validate(self) -> None:
        for key in ("run.task", "run.genome"):
            if key not in self.values:
                raise ConfigError(f"{key} is required")
        if self["es.population"] < 2:
            raise ConfigError("es.population must be >= 2")
        if self["es.sigma0"] <= 0:
            raise ConfigError("es.sigma0 must be positive")
        if self["es.max_generations"] < 1:
            raise ConfigError("es.max_generations must be >= 1")
        if self["run.workers"] < 0:
            raise ConfigError("run.workers must be >= 0")
        if self["nca.steps"] < 0:
            raise ConfigError("nca.steps must be >= 0")
        if self["env.episodes"] < 1:
            raise ConfigError("env.episodes must be >= 1")
        name = self.task_name
        direct = name in ("sphere", "rosenbrock")
        if direct:
            if self.genome_kind != "direct":
                raise ConfigError(f"run.task {name} requires run.genome = direct")
            if self["task.dimension"] < 1:
                raise ConfigError("task.dimension must be >= 1")
        else:
            if self.genome_kind == "direct":
                raise ConfigError("environment tasks need run.genome = nca or linear_hyper")
            self.codec()  # raises on inconsistent shapes
        if name == "walker_meta":
            for stage in self.schedule().stages:
                if stage.morph_id not in ("M1", "M2", "M3"):
                    raise ConfigError(f"meta.schedule: unknown morphology {stage.morph_id!r}")


def parse_config(text: str) -> RunConfig:
    values = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        key, sep, raw = stripped.partition("=")
        key = key.strip()
        if not sep:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        if key not in _KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        values[key] = _parse_value(key, raw)
    config = RunConfig(values)
    config.validate()
    return config


def load_config(path) -> RunConfig:
    with open(path, "r", encoding="utf-8") as f:
        return parse_config(f.read())
