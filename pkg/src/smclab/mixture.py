"""Finite Gaussian mixture with a fully conjugate prior.

Model: y_t | z_t=k ~ Normal(mu_k, var_k), z_t ~ Categorical(weights),
weights ~ Dirichlet(delta, ..., delta), and per component a
Normal-Inverse-Gamma prior: var_k ~ InvGamma(a0, b0),
mu_k | var_k ~ Normal(m0, var_k / kappa0).

Conjugacy makes three things available in closed form, and this module owns
all three:

* the per-component posterior hyperparameters given the running sufficient
  statistics (count, sum, sum of squares) of the observations allocated to
  that component;
* the one-step-ahead predictive density of a new observation given the
  sufficient statistics (a Dirichlet-weighted mixture of Student-t
  posterior predictives), which doubles as the incremental-weight function
  of the fully adapted filter and as the evidence increment;
* the exact marginal likelihood of a whole dataset by summing the
  closed-form allocation-conditional marginals over all K^T allocation
  vectors (guarded; log-sum-exp throughout).

Component indices are 1-based in every public signature (``k=1`` is the
first component); internal arrays are 0-based.  All batched helpers
broadcast over leading axes, so a filter can evaluate N particles' worth
of sufficient statistics in one call.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln, logsumexp

from .dataset import Dataset
from .errors import GuardError, ValidationError

__all__ = [
    "MixtureModelSpec",
    "MixtureParams",
    "MixtureSuffStats",
    "simulate_mixture_data",
    "mixture_predictive_logdensity",
    "update_mixture_suffstats",
    "sample_mixture_params",
    "enumerate_mixture_log_evidence",
    "ENUMERATION_GUARD",
]

#: Hard cap on K**T for exact enumeration of allocation vectors.
ENUMERATION_GUARD = 10**7

_LOG_2PI = float(np.log(2.0 * np.pi))


@dataclass(frozen=True)
class MixtureModelSpec:
    """Component count plus symmetric prior hyperparameters.

    The prior is exchangeable across components by construction: one
    ``dirichlet_weight`` for every mixture weight and one NIG quadruple
    (``nig_m0``, ``nig_kappa0``, ``nig_a0``, ``nig_b0``) for every
    component.
    """

    K: int
    dirichlet_weight: float = 1.0
    nig_m0: float = 0.0
    nig_kappa0: float = 1.0
    nig_a0: float = 2.0
    nig_b0: float = 2.0

    def __post_init__(self):
        if int(self.K) != self.K or self.K < 2:
            raise ValidationError(f"K must be an integer >= 2, got {self.K}")
        for name in ("dirichlet_weight", "nig_kappa0", "nig_a0", "nig_b0"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise ValidationError(f"{name} must be strictly positive, got {value}")
        if not np.isfinite(self.nig_m0):
            raise ValidationError(f"nig_m0 must be finite, got {self.nig_m0}")


@dataclass(frozen=True)
class MixtureParams:
    """One concrete parameter value: weights on the simplex, means, variances."""

    weights: np.ndarray
    means: np.ndarray
    variances: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "weights", np.asarray(self.weights, dtype=float))
        object.__setattr__(self, "means", np.asarray(self.means, dtype=float))
        object.__setattr__(self, "variances", np.asarray(self.variances, dtype=float))
        K = self.weights.size
        if self.means.size != K or self.variances.size != K:
            raise ValidationError("weights, means, variances must share a length")
        if np.any(self.weights < 0):
            raise ValidationError("weights must be nonnegative")
        if abs(float(self.weights.sum()) - 1.0) > 1e-12:
            raise ValidationError(
                f"weights must sum to 1 within 1e-12, got sum {self.weights.sum()!r}"
            )
        if np.any(self.variances <= 0):
            raise ValidationError("variances must be strictly positive")

    @property
    def K(self) -> int:
        return int(self.weights.size)


@dataclass(frozen=True)
class MixtureSuffStats:
    """Per-component running statistics (count, sum, sum of squares).

    Invariants: counts are nonnegative and sum to the number of absorbed
    observations; ``sumsq_k >= sum_k**2 / count_k`` whenever ``count_k > 0``
    (Cauchy-Schwarz).
    """

    counts: np.ndarray
    sums: np.ndarray
    sumsqs: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "counts", np.asarray(self.counts, dtype=np.int64))
        object.__setattr__(self, "sums", np.asarray(self.sums, dtype=float))
        object.__setattr__(self, "sumsqs", np.asarray(self.sumsqs, dtype=float))
        K = self.counts.size
        if self.sums.size != K or self.sumsqs.size != K:
            raise ValidationError("counts, sums, sumsqs must share a length")
        if np.any(self.counts < 0):
            raise ValidationError("counts must be nonnegative")
        pos = self.counts > 0
        if np.any(pos):
            bound = self.sums[pos] ** 2 / self.counts[pos]
            if np.any(self.sumsqs[pos] < bound - 1e-9 * np.maximum(1.0, bound)):
                raise ValidationError("sum of squares violates Cauchy-Schwarz bound")

    @classmethod
    def empty(cls, K: int) -> "MixtureSuffStats":
        return cls(np.zeros(K, dtype=np.int64), np.zeros(K), np.zeros(K))

    @property
    def K(self) -> int:
        return int(self.counts.size)

    @property
    def total_count(self) -> int:
        return int(self.counts.sum())


def simulate_mixture_data(
    spec: MixtureModelSpec, params: MixtureParams, T: int, seed: int
) -> Dataset:
    """Draw T observations from the mixture at the given parameter value.

    Ground truth carries the parameters and the 1-based allocation
    sequence.  Identical arguments reproduce the identical dataset
    bit-for-bit.
    """
    if params.K != spec.K:
        raise ValidationError(f"params have K={params.K}, spec has K={spec.K}")
    if T < 1:
        raise ValidationError(f"T must be >= 1, got {T}")
    rng = np.random.default_rng(seed)
    cum = np.cumsum(params.weights)
    cum[-1] = 1.0
    z = np.searchsorted(cum, rng.random(T), side="right")
    y = params.means[z] + np.sqrt(params.variances[z]) * rng.standard_normal(T)
    return Dataset(
        observations=y,
        true_params=params,
        true_allocations=z + 1,
    )


# ---------------------------------------------------------------------------
# Conjugate machinery (batched; trailing axis indexes components)
# ---------------------------------------------------------------------------

def posterior_nig_params(counts, sums, sumsqs, spec: MixtureModelSpec):
    """Posterior NIG hyperparameters (m_n, kappa_n, a_n, b_n) per component.

    Accepts arrays of any matching shape whose last axis indexes
    components; entries with count 0 collapse to the prior without any
    0/0 evaluation.
    """
    n = np.asarray(counts, dtype=float)
    s = np.asarray(sums, dtype=float)
    q = np.asarray(sumsqs, dtype=float)
    kappa_n = spec.nig_kappa0 + n
    m_n = (spec.nig_kappa0 * spec.nig_m0 + s) / kappa_n
    a_n = spec.nig_a0 + 0.5 * n
    pos = n > 0
    ybar = np.where(pos, s / np.where(pos, n, 1.0), 0.0)
    within = q - s * ybar  # = q - s^2/n when n > 0, else 0
    shift = spec.nig_kappa0 * n * (ybar - spec.nig_m0) ** 2 / (2.0 * kappa_n)
    b_n = spec.nig_b0 + 0.5 * within + shift
    return m_n, kappa_n, a_n, b_n


def _student_t_logpdf(y, df, loc, scale):
    z = (y - loc) / scale
    return (
        gammaln(0.5 * (df + 1.0))
        - gammaln(0.5 * df)
        - 0.5 * np.log(df * np.pi)
        - np.log(scale)
        - 0.5 * (df + 1.0) * np.log1p(z * z / df)
    )


def component_logpredictive(y, counts, sums, sumsqs, spec: MixtureModelSpec):
    """log p(y | component k's posterior), per component (batched)."""
    m_n, kappa_n, a_n, b_n = posterior_nig_params(counts, sums, sumsqs, spec)
    scale = np.sqrt(b_n * (kappa_n + 1.0) / (a_n * kappa_n))
    return _student_t_logpdf(y, 2.0 * a_n, m_n, scale)


def allocation_logprior(counts, spec: MixtureModelSpec):
    """log P(next allocation = k | counts) = log (n_k + delta) - log (n + K delta)."""
    n = np.asarray(counts, dtype=float)
    total = n.sum(axis=-1, keepdims=True)
    return np.log(n + spec.dirichlet_weight) - np.log(
        total + spec.K * spec.dirichlet_weight
    )


def logsumexp_rows(logp: np.ndarray) -> np.ndarray:
    """Row-wise log-sum-exp, lean enough for the filter hot loop.

    Rows of all -inf reduce to -inf (a dead particle, diagnosed upstream).
    """
    m = np.max(logp, axis=-1)
    finite = np.isfinite(m)
    safe = np.where(finite, m, 0.0)
    with np.errstate(invalid="ignore"):
        out = safe + np.log(
            np.exp(logp - safe[..., None]).sum(axis=-1)
        )
    return np.where(finite, out, -np.inf)


def predictive_logdensity_batch(y, counts, sums, sumsqs, spec: MixtureModelSpec):
    """log p(y | suff stats) for stacked statistics; reduces the last axis."""
    logp = allocation_logprior(counts, spec) + component_logpredictive(
        y, counts, sums, sumsqs, spec
    )
    return logsumexp_rows(logp)


def mixture_predictive_logdensity(
    y: float, stats: MixtureSuffStats, spec: MixtureModelSpec
) -> float:
    """Log one-step-ahead predictive density of y given sufficient statistics.

    This is the Dirichlet-multinomial allocation probability times the
    Student-t posterior predictive of each component, combined with
    log-sum-exp.
    """
    if stats.K != spec.K:
        raise ValidationError(f"stats have K={stats.K}, spec has K={spec.K}")
    return float(
        predictive_logdensity_batch(y, stats.counts, stats.sums, stats.sumsqs, spec)
    )


def update_mixture_suffstats(stats: MixtureSuffStats, y: float, k: int) -> MixtureSuffStats:
    """Absorb one observation into component k (1-based); other components untouched."""
    if not 1 <= k <= stats.K:
        raise IndexError(f"component index must be in 1..{stats.K}, got {k}")
    counts = stats.counts.copy()
    sums = stats.sums.copy()
    sumsqs = stats.sumsqs.copy()
    counts[k - 1] += 1
    sums[k - 1] += y
    sumsqs[k - 1] += y * y
    return MixtureSuffStats(counts, sums, sumsqs)


def sample_params_batch(counts, sums, sumsqs, spec: MixtureModelSpec, rng):
    """Draw (weights, means, variances) from the conjugate posterior, batched.

    Input arrays share a shape ``(..., K)``; the outputs do too.  With all
    counts zero this is an exact prior draw.
    """
    n = np.asarray(counts, dtype=float)
    m_n, kappa_n, a_n, b_n = posterior_nig_params(n, sums, sumsqs, spec)
    gam = rng.standard_gamma(spec.dirichlet_weight + n)
    weights = gam / gam.sum(axis=-1, keepdims=True)
    variances = b_n / rng.standard_gamma(a_n)
    means = rng.normal(m_n, np.sqrt(variances / kappa_n))
    return weights, means, variances


def sample_mixture_params(
    stats: MixtureSuffStats, spec: MixtureModelSpec, rng: np.random.Generator
) -> MixtureParams:
    """Draw one parameter value from the posterior given sufficient statistics."""
    if stats.K != spec.K:
        raise ValidationError(f"stats have K={stats.K}, spec has K={spec.K}")
    weights, means, variances = sample_params_batch(
        stats.counts, stats.sums, stats.sumsqs, spec, rng
    )
    return MixtureParams(weights, means, variances)


# ---------------------------------------------------------------------------
# Exact evidence by allocation enumeration
# ---------------------------------------------------------------------------

def _component_log_marginal(counts, sums, sumsqs, spec: MixtureModelSpec):
    """Closed-form log marginal of the observations absorbed by one component."""
    n = np.asarray(counts, dtype=float)
    _, kappa_n, a_n, b_n = posterior_nig_params(counts, sums, sumsqs, spec)
    return (
        -0.5 * n * _LOG_2PI
        + 0.5 * (np.log(spec.nig_kappa0) - np.log(kappa_n))
        + gammaln(a_n)
        - gammaln(spec.nig_a0)
        + spec.nig_a0 * np.log(spec.nig_b0)
        - a_n * np.log(b_n)
    )


def _allocation_log_mass(counts, spec: MixtureModelSpec):
    """Dirichlet-multinomial log mass of an allocation vector given its counts."""
    n = np.asarray(counts, dtype=float)
    T = n.sum(axis=-1)
    Kd = spec.K * spec.dirichlet_weight
    return (
        gammaln(Kd)
        - gammaln(Kd + T)
        + np.sum(gammaln(spec.dirichlet_weight + n) - gammaln(spec.dirichlet_weight), axis=-1)
    )


def _allocation_block(K: int, T: int, start: int, stop: int) -> np.ndarray:
    """Allocation vectors ``start..stop-1`` in base-K, as a (stop-start, T) int array."""
    codes = np.arange(start, stop, dtype=np.int64)
    block = np.empty((codes.size, T), dtype=np.int64)
    for t in range(T - 1, -1, -1):
        block[:, t] = codes % K
        codes //= K
    return block


def enumerate_mixture_log_evidence(spec: MixtureModelSpec, data: Dataset) -> float:
    """Exact log evidence log p(y_1..y_T) by summing over all K^T allocations.

    Each allocation term is the Dirichlet-multinomial mass of the
    allocation vector times the closed-form NIG marginal of each
    component's assigned observations; the sum is done with log-sum-exp.
    Refuses when K^T exceeds :data:`ENUMERATION_GUARD`.
    """
    y = data.observations
    T = y.size
    if T < 1:
        raise ValidationError("enumeration needs at least one observation")
    total = spec.K ** T
    if total > ENUMERATION_GUARD:
        raise GuardError(
            f"K^T = {spec.K}^{T} = {total} exceeds the enumeration guard {ENUMERATION_GUARD}"
        )
    chunk = 1 << 14
    log_terms = []
    eye = np.eye(spec.K)
    for start in range(0, total, chunk):
        block = _allocation_block(spec.K, T, start, min(start + chunk, total))
        onehot = eye[block]  # (B, T, K)
        counts = onehot.sum(axis=1)
        sums = np.einsum("t,btk->bk", y, onehot)
        sumsqs = np.einsum("t,btk->bk", y * y, onehot)
        log_like = _component_log_marginal(counts, sums, sumsqs, spec).sum(axis=-1)
        log_terms.append(_allocation_log_mass(counts, spec) + log_like)
    return float(logsumexp(np.concatenate(log_terms)))
