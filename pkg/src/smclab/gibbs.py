"""Data-augmentation Gibbs sampler for the conjugate mixture posterior.

The offline gold standard the sequential filters are compared against.
Alternates the two exact conditionals: allocations given parameters
(independent categorical draws proportional to weight times Gaussian
likelihood) and parameters given allocations (the same Dirichlet/NIG
conditionals the filters use for their parameter refresh).

No identifiability constraint is imposed on the labels; comparisons
against other methods must therefore use label-symmetric functionals.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .dataset import Dataset
from .engine import categorical_rows
from .errors import ValidationError
from .mixture import MixtureModelSpec, sample_params_batch

__all__ = ["GibbsConfig", "GibbsDraws", "gibbs_mixture"]

_LOG_2PI = float(np.log(2.0 * np.pi))


@dataclass(frozen=True)
class GibbsConfig:
    iterations: int
    burn_in: int
    seed: int

    def __post_init__(self):
        if self.iterations < 1:
            raise ValidationError(f"iterations must be >= 1, got {self.iterations}")
        if not 0 <= self.burn_in < self.iterations:
            raise ValidationError(
                f"burn_in must satisfy 0 <= burn_in < iterations, got {self.burn_in}"
            )


@dataclass
class GibbsDraws:
    """Post-burn-in draws; allocations use 1-based component labels."""

    weights: np.ndarray
    means: np.ndarray
    variances: np.ndarray
    allocations: np.ndarray

    @property
    def n_draws(self) -> int:
        return int(self.weights.shape[0])


def _stats_from_allocations(y: np.ndarray, z: np.ndarray, K: int):
    counts = np.bincount(z, minlength=K).astype(np.int64)
    sums = np.bincount(z, weights=y, minlength=K)
    sumsqs = np.bincount(z, weights=y * y, minlength=K)
    return counts, sums, sumsqs


def gibbs_mixture(
    spec: MixtureModelSpec,
    data: Dataset,
    cfg: GibbsConfig,
    initial_allocations: Optional[np.ndarray] = None,
) -> GibbsDraws:
    """Run the data-augmentation Gibbs sampler and return post-burn-in draws.

    With an empty dataset the parameter draws are exact prior draws.
    ``initial_allocations`` (1-based) overrides the default start, which
    allocates every observation under a fresh prior parameter draw; passing
    two distant starts is the standard multi-chain agreement check.
    """
    y = data.observations
    T = y.size
    K = spec.K
    rng = np.random.default_rng(cfg.seed)

    if T > 0:
        if initial_allocations is not None:
            z = np.asarray(initial_allocations, dtype=np.int64) - 1
            if z.shape != (T,) or z.min() < 0 or z.max() >= K:
                raise ValidationError("initial_allocations must be T labels in 1..K")
        else:
            w0, mu0, var0 = sample_params_batch(
                np.zeros(K), np.zeros(K), np.zeros(K), spec, rng
            )
            logp = np.log(w0) - 0.5 * (_LOG_2PI + np.log(var0)) - 0.5 * (
                y[:, None] - mu0
            ) ** 2 / var0
            probs = np.exp(logp - logp.max(axis=1, keepdims=True))
            probs /= probs.sum(axis=1, keepdims=True)
            z = categorical_rows(probs, rng.random(T))
    else:
        z = np.zeros(0, dtype=np.int64)

    kept = cfg.iterations - cfg.burn_in
    weights = np.empty((kept, K))
    means = np.empty((kept, K))
    variances = np.empty((kept, K))
    allocations = np.empty((kept, T), dtype=np.int64)

    for it in range(cfg.iterations):
        counts, sums, sumsqs = _stats_from_allocations(y, z, K)
        w, mu, var = sample_params_batch(counts, sums, sumsqs, spec, rng)
        if T > 0:
            logp = np.log(w) - 0.5 * (_LOG_2PI + np.log(var)) - 0.5 * (
                y[:, None] - mu
            ) ** 2 / var
            probs = np.exp(logp - logp.max(axis=1, keepdims=True))
            probs /= probs.sum(axis=1, keepdims=True)
            z = categorical_rows(probs, rng.random(T))
        if it >= cfg.burn_in:
            i = it - cfg.burn_in
            weights[i] = w
            means[i] = mu
            variances[i] = var
            allocations[i] = z + 1
    return GibbsDraws(weights, means, variances, allocations)
