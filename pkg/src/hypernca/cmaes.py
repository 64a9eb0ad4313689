"""Covariance matrix adaptation evolution strategy, written from scratch.

Standard (mu/mu_w, lambda) formulation: positive log-rank recombination
weights over the top half of the population, cumulative step-size
adaptation, and rank-one plus rank-mu covariance updates. The package
maximizes fitness throughout (RL rewards), so ranking is by descending
fitness.

`ask` caches the sampled population and the eigendecomposition it used
inside the state; `tell` consumes them. `tell` canonicalizes evaluation
records by genome index first, so the update is a pure function of the
record multiset: any evaluation completion order produces bit-identical
states.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .errors import ConfigError, NumericError
from .rng import generator

PD_TOLERANCE = 1e-12


@dataclass(frozen=True)
class EvalRecord:
    index: int
    fitness: float
    steps: int = 0
    env_seed: int = 0
    failed: bool = False


@dataclass(frozen=True)
class EsState:
    dim: int
    mean: np.ndarray = field(repr=False)
    sigma: float
    cov: np.ndarray = field(repr=False)
    p_sigma: np.ndarray = field(repr=False)
    p_c: np.ndarray = field(repr=False)
    generation: int
    population: int
    # strategy constants
    weights: np.ndarray = field(repr=False)
    mu: int
    mu_eff: float
    c_sigma: float
    d_sigma: float
    c_c: float
    c_1: float
    c_mu: float
    chi_n: float
    # transient: population sampled by the last ask() and the
    # eigendecomposition of cov it was drawn with
    pending: Optional[np.ndarray] = field(default=None, repr=False, compare=False)
    eig: Optional[tuple] = field(default=None, repr=False, compare=False)


def init_state(mean0: np.ndarray, sigma0: float, population: int) -> EsState:
    """Fresh distribution state with Hansen-style strategy constants."""
    mean = np.asarray(mean0, dtype=np.float64).copy()
    d = len(mean)
    if d < 1:
        raise ConfigError("dimension must be >= 1")
    if sigma0 <= 0:
        raise ConfigError("sigma0 must be positive")
    if population < 2:
        raise ConfigError("population must be >= 2")
    mu = population // 2
    raw = np.log((population + 1) / 2.0) - np.log(np.arange(1, mu + 1))
    weights = raw / raw.sum()
    mu_eff = 1.0 / np.sum(weights ** 2)
    c_sigma = (mu_eff + 2.0) / (d + mu_eff + 5.0)
    d_sigma = 1.0 + 2.0 * max(0.0, math.sqrt((mu_eff - 1.0) / (d + 1.0)) - 1.0) + c_sigma
    c_c = (4.0 + mu_eff / d) / (d + 4.0 + 2.0 * mu_eff / d)
    c_1 = 2.0 / ((d + 1.3) ** 2 + mu_eff)
    c_mu = min(1.0 - c_1, 2.0 * (mu_eff - 2.0 + 1.0 / mu_eff) / ((d + 2.0) ** 2 + mu_eff))
    chi_n = math.sqrt(d) * (1.0 - 1.0 / (4.0 * d) + 1.0 / (21.0 * d * d))
    return EsState(
        dim=d, mean=mean, sigma=float(sigma0), cov=np.eye(d),
        p_sigma=np.zeros(d), p_c=np.zeros(d), generation=0,
        population=population, weights=weights, mu=mu, mu_eff=float(mu_eff),
        c_sigma=c_sigma, d_sigma=d_sigma, c_c=c_c, c_1=c_1, c_mu=c_mu,
        chi_n=chi_n,
    )


def _decompose(cov: np.ndarray):
    """Eigendecomposition of the covariance; rejects non-PD matrices."""
    eigvals, basis = np.linalg.eigh(cov)
    if eigvals[0] <= PD_TOLERANCE * max(1.0, eigvals[-1]):
        raise NumericError(
            f"covariance lost positive definiteness (min eigenvalue {eigvals[0]:.3e})"
        )
    return eigvals, basis


def ask(state: EsState, population: int, seed: int) -> np.ndarray:
    """Sample `population` candidates: x_i = mean + sigma * B D z_i.

    Deterministic in (state, seed). The sample and the decomposition are
    cached on the state for the matching tell().
    """
    if population != state.population:
        raise ConfigError(
            f"ask population {population} does not match state population {state.population}"
        )
    eigvals, basis = _decompose(state.cov)
    scale = np.sqrt(eigvals)
    rng = generator(seed)
    z = rng.standard_normal((population, state.dim))
    samples = state.mean + state.sigma * (z * scale) @ basis.T
    object.__setattr__(state, "pending", samples)
    object.__setattr__(state, "eig", (eigvals, basis))
    return samples


def tell(state: EsState, evals: Sequence[EvalRecord]) -> EsState:
    """Standard CMA-ES distribution update from ranked fitness records."""
    if state.pending is None:
        raise ConfigError("tell() called without a matching ask()")
    lam = state.population
    if len(evals) != lam:
        raise ConfigError(f"need {lam} evaluation records, got {len(evals)}")
    indices = np.array([r.index for r in evals])
    if sorted(indices.tolist()) != list(range(lam)):
        raise ConfigError("evaluation records must cover genome indices 0..lam-1 exactly")
    fitness = np.empty(lam)
    fitness[indices] = [r.fitness for r in evals]
    if not np.all(np.isfinite(fitness)):
        raise NumericError("non-finite fitness passed to tell()")

    d, mu = state.dim, state.mu
    samples = state.pending
    # Rank by descending fitness; ties break toward the lower genome index.
    order = np.lexsort((np.arange(lam), -fitness))
    selected = samples[order[:mu]]

    mean_old = state.mean
    y = (selected - mean_old) / state.sigma
    y_w = state.weights @ y
    mean_new = mean_old + state.sigma * y_w

    eigvals, basis = state.eig if state.eig is not None else _decompose(state.cov)
    inv_sqrt_y_w = basis @ ((basis.T @ y_w) / np.sqrt(eigvals))

    c_s, c_c = state.c_sigma, state.c_c
    p_sigma = (1.0 - c_s) * state.p_sigma + math.sqrt(
        c_s * (2.0 - c_s) * state.mu_eff) * inv_sqrt_y_w
    gen = state.generation + 1
    ps_norm = float(np.linalg.norm(p_sigma))
    hsig = ps_norm / math.sqrt(1.0 - (1.0 - c_s) ** (2 * gen)) < (
        1.4 + 2.0 / (d + 1.0)) * state.chi_n
    p_c = (1.0 - c_c) * state.p_c + (
        math.sqrt(c_c * (2.0 - c_c) * state.mu_eff) * y_w if hsig else 0.0)

    rank_mu = np.einsum("k,ki,kj->ij", state.weights, y, y)
    hsig_fix = (1.0 - hsig) * c_c * (2.0 - c_c)
    cov = ((1.0 - state.c_1 - state.c_mu) * state.cov
           + state.c_1 * (np.outer(p_c, p_c) + hsig_fix * state.cov)
           + state.c_mu * rank_mu)
    cov = (cov + cov.T) / 2.0

    sigma = state.sigma * math.exp(
        (c_s / state.d_sigma) * (ps_norm / state.chi_n - 1.0))
    if not (np.isfinite(sigma) and sigma > 0):
        raise NumericError(f"step size degenerated to {sigma!r}")

    return replace(state, mean=mean_new, sigma=sigma, cov=cov,
                   p_sigma=p_sigma, p_c=p_c, generation=gen,
                   pending=None, eig=None)
