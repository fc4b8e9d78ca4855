"""The three sequential algorithms under study.

* ``run_pl_mixture``: the fully adapted sufficient-statistic filter on the
  conjugate Gaussian mixture.  Each step weights particles by the one-step
  predictive density of the new observation given their statistics,
  resamples with those weights (every step by default), draws the new
  allocation from its conditional posterior, folds it into the statistics,
  and redraws the static parameters from the conjugate posterior.
* ``run_storvik_mixture``: the propagate-first ordering of the same state
  payload.  Allocations are drawn from the particle's current parameter
  draw, particles are weighted by the observation likelihood under that
  draw, resampling fires on an ESS trigger by default, and parameters are
  refreshed from the updated statistics.
* ``run_bootstrap_locallevel``: the standard propagate-from-prior /
  weight-by-likelihood / resample-on-trigger filter on the local level
  model, additionally carrying the running additive path functional.

Every run owns two independent RNG substreams derived from its seed: one
for particle dynamics (propagation, allocation draws, resampling) and one
for parameter refreshes.  Keeping parameter draws off the dynamics stream
makes the label-exchangeability of the mixture filters exactly testable
and is harmless otherwise.

Evidence bookkeeping is identical in all three: the per-step increment is
the log of the weighted mean of incremental weights under the running
normalized weights, recorded before any resampling, and the total log
evidence is the exact sum of increments.
"""

from __future__ import annotations

import enum
import time
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .dataset import Dataset
from .diagnostics import DiagnosticTrace
from .engine import (
    Genealogy,
    ParticleSet,
    categorical_rows,
    ess as compute_ess,
    normalize_log_weights,
    unique_count,
)
from .errors import DegenerateWeightsError, ValidationError
from .local_level import LocalLevelSpec
from .mixture import (
    MixtureModelSpec,
    allocation_logprior,
    component_logpredictive,
    logsumexp_rows,
    sample_params_batch,
)
from .resampling import ResampleScheme, resample

__all__ = [
    "FilterKind",
    "ResamplePolicy",
    "RunResult",
    "MixturePayload",
    "LocalLevelPayload",
    "run_pl_mixture",
    "run_storvik_mixture",
    "run_bootstrap_locallevel",
]

_LOG_2PI = float(np.log(2.0 * np.pi))


class FilterKind(str, enum.Enum):
    BOOTSTRAP = "bootstrap"
    PARTICLE_LEARNING = "particle_learning"
    STORVIK = "storvik"


@dataclass(frozen=True)
class ResamplePolicy:
    """When and how to resample: scheme plus trigger.

    ``trigger`` is ``"always"`` (every step) or ``"ess"`` (fire when the
    effective sample size drops below ``ess_fraction * N``).
    """

    scheme: ResampleScheme = ResampleScheme.SYSTEMATIC
    trigger: str = "ess"
    ess_fraction: float = 0.5

    def __post_init__(self):
        object.__setattr__(self, "scheme", ResampleScheme(self.scheme))
        if self.trigger not in ("always", "ess"):
            raise ValidationError(f"trigger must be 'always' or 'ess', got {self.trigger!r}")
        if not 0.0 < self.ess_fraction <= 1.0:
            raise ValidationError(f"ess_fraction must be in (0, 1], got {self.ess_fraction}")

    def should_resample(self, current_ess: float, n_particles: int) -> bool:
        if self.trigger == "always":
            return True
        return current_ess < self.ess_fraction * n_particles


PL_DEFAULT_POLICY = ResamplePolicy(trigger="always")
ADAPTIVE_DEFAULT_POLICY = ResamplePolicy(trigger="ess", ess_fraction=0.5)


@dataclass
class MixturePayload:
    """Per-particle state of the mixture filters: statistics + parameter draw."""

    counts: np.ndarray
    sums: np.ndarray
    sumsqs: np.ndarray
    weights: np.ndarray
    means: np.ndarray
    variances: np.ndarray


@dataclass
class LocalLevelPayload:
    """Per-particle state of the local level filter: level + running functional."""

    states: np.ndarray
    path_functional: np.ndarray


@dataclass
class RunResult:
    """One filter run: diagnostics, final population, total evidence."""

    trace: DiagnosticTrace
    final_particles: ParticleSet
    log_evidence: float
    seed: int
    wall_time: float


class _WeightLedger:
    """Running normalized log-weights and per-step evidence increments.

    While the weights are uniform (start of run, after each resampling) the
    increment is the plain log-mean of the incremental weights, computed
    without the -log N round trip so that an all-equal increment vector
    yields the common value bit-exactly.
    """

    def __init__(self, n: int):
        self._log_n = float(np.log(n))
        self._uniform = True
        self.log_w = np.full(n, -self._log_n)

    def absorb(self, log_inc: np.ndarray):
        """Fold incremental log-weights in; return (weights, increment)."""
        if self._uniform:
            weights, increment = normalize_log_weights(log_inc)
            self.log_w = log_inc - increment - self._log_n
        else:
            combined = self.log_w + log_inc
            weights, log_mean = normalize_log_weights(combined)
            increment = log_mean + self._log_n  # = logsumexp(log_w + log_inc)
            self.log_w = combined - increment
        self._uniform = False
        return weights, float(increment)

    def reset_uniform(self) -> None:
        self.log_w.fill(-self._log_n)
        self._uniform = True


def _validate_run_args(N: int, T: int) -> None:
    if N < 2:
        raise ValidationError(f"particle count must be >= 2, got {N}")
    if T < 1:
        raise ValidationError("need at least one observation")


def _spawn_streams(seed: int):
    move_ss, param_ss = np.random.SeedSequence(seed).spawn(2)
    return np.random.default_rng(move_ss), np.random.default_rng(param_ss)


def _suffstat_rows(counts, sums, sumsqs) -> np.ndarray:
    return np.concatenate([counts.astype(float), sums, sumsqs], axis=1)


def _partial_trace(t, ess_tr, inc_tr, anc_tr, suff_tr=None, path_tr=None, mean_tr=None):
    return DiagnosticTrace(
        ess=ess_tr[:t].copy(),
        log_evidence_increments=inc_tr[:t].copy(),
        distinct_ancestors_from_1=anc_tr[:t].copy(),
        distinct_suffstats=None if suff_tr is None else suff_tr[:t].copy(),
        path_functional=None if path_tr is None else path_tr[:t].copy(),
        filtered_mean=None if mean_tr is None else mean_tr[:t].copy(),
    )


def run_pl_mixture(
    spec: MixtureModelSpec,
    data: Dataset,
    N: int,
    seed: int,
    policy: ResamplePolicy = PL_DEFAULT_POLICY,
    component_order: Optional[Sequence[int]] = None,
) -> RunResult:
    """Fully adapted sufficient-statistic filter on the conjugate mixture.

    ``component_order`` fixes the evaluation order of components in the
    allocation draw (1-based labels).  The prior is exchangeable, so any
    fixed permutation must leave the evidence and all degeneracy
    diagnostics unchanged; exposing the order makes that property directly
    testable.
    """
    y = data.observations
    T = y.size
    _validate_run_args(N, T)
    K = spec.K
    order0 = None
    if component_order is not None:
        order0 = np.asarray(component_order, dtype=np.int64) - 1
        if sorted(order0.tolist()) != list(range(K)):
            raise ValidationError(f"component_order must be a permutation of 1..{K}")
    rng_move, rng_param = _spawn_streams(seed)
    start = time.perf_counter()

    counts = np.zeros((N, K), dtype=np.int64)
    sums = np.zeros((N, K))
    sumsqs = np.zeros((N, K))
    par_w, par_mu, par_var = sample_params_batch(counts, sums, sumsqs, spec, rng_param)

    genealogy = Genealogy(N)
    ledger = _WeightLedger(N)
    rows = np.arange(N)
    root1 = None
    ess_tr = np.empty(T)
    inc_tr = np.empty(T)
    anc_tr = np.empty(T, dtype=np.int64)
    suff_tr = np.empty(T, dtype=np.int64)

    for t in range(T):
        yt = y[t]
        logpk = allocation_logprior(counts, spec) + component_logpredictive(
            yt, counts, sums, sumsqs, spec
        )
        log_inc = logsumexp_rows(logpk)
        try:
            weights, increment = ledger.absorb(log_inc)
        except DegenerateWeightsError as err:
            err.trace = _partial_trace(t, ess_tr, inc_tr, anc_tr, suff_tr)
            raise
        ess_t = compute_ess(weights)

        if policy.should_resample(ess_t, N):
            ancestors = resample(weights, N, policy.scheme, rng_move)
            genealogy.append(t + 1, ancestors)
            counts = counts[ancestors]
            sums = sums[ancestors]
            sumsqs = sumsqs[ancestors]
            logpk = logpk[ancestors]
            ledger.reset_uniform()
            if root1 is not None:
                root1 = root1[ancestors]

        # allocation from its conditional posterior given inherited stats and y
        if order0 is not None:
            logpk = logpk[:, order0]
        probs = np.exp(logpk - logsumexp_rows(logpk)[:, None])
        slot = categorical_rows(probs, rng_move.random(N))
        z = order0[slot] if order0 is not None else slot
        counts[rows, z] += 1
        sums[rows, z] += yt
        sumsqs[rows, z] += yt * yt

        par_w, par_mu, par_var = sample_params_batch(counts, sums, sumsqs, spec, rng_param)

        if root1 is None:
            root1 = np.arange(N, dtype=np.int64)
        genealogy.horizon = max(genealogy.horizon, t + 1)
        ess_tr[t] = ess_t
        inc_tr[t] = increment
        anc_tr[t] = np.unique(root1).size
        suff_tr[t] = unique_count(_suffstat_rows(counts, sums, sumsqs))

    trace = DiagnosticTrace(
        ess=ess_tr,
        log_evidence_increments=inc_tr,
        distinct_ancestors_from_1=anc_tr,
        distinct_suffstats=suff_tr,
    )
    particles = ParticleSet(
        n_particles=N,
        payload=MixturePayload(counts, sums, sumsqs, par_w, par_mu, par_var),
        log_weights=ledger.log_w,
        genealogy=genealogy,
        t=T,
    )
    return RunResult(
        trace=trace,
        final_particles=particles,
        log_evidence=float(inc_tr.sum()),
        seed=seed,
        wall_time=time.perf_counter() - start,
    )


def run_storvik_mixture(
    spec: MixtureModelSpec,
    data: Dataset,
    N: int,
    seed: int,
    policy: ResamplePolicy = ADAPTIVE_DEFAULT_POLICY,
) -> RunResult:
    """Propagate-first sufficient-statistic filter on the conjugate mixture.

    The allocation is drawn from the particle's current parameter draw (the
    parameter-conditioned transition), the particle is weighted by the
    observation likelihood under that draw, and parameters are refreshed
    from the updated statistics after the resampling decision.
    """
    y = data.observations
    T = y.size
    _validate_run_args(N, T)
    K = spec.K
    rng_move, rng_param = _spawn_streams(seed)
    start = time.perf_counter()

    counts = np.zeros((N, K), dtype=np.int64)
    sums = np.zeros((N, K))
    sumsqs = np.zeros((N, K))
    par_w, par_mu, par_var = sample_params_batch(counts, sums, sumsqs, spec, rng_param)

    genealogy = Genealogy(N)
    ledger = _WeightLedger(N)
    rows = np.arange(N)
    root1 = None
    ess_tr = np.empty(T)
    inc_tr = np.empty(T)
    anc_tr = np.empty(T, dtype=np.int64)
    suff_tr = np.empty(T, dtype=np.int64)

    for t in range(T):
        yt = y[t]
        z = categorical_rows(par_w, rng_move.random(N))
        mu_z = par_mu[rows, z]
        var_z = par_var[rows, z]
        log_inc = -0.5 * (_LOG_2PI + np.log(var_z)) - 0.5 * (yt - mu_z) ** 2 / var_z
        try:
            weights, increment = ledger.absorb(log_inc)
        except DegenerateWeightsError as err:
            err.trace = _partial_trace(t, ess_tr, inc_tr, anc_tr, suff_tr)
            raise
        ess_t = compute_ess(weights)

        counts[rows, z] += 1
        sums[rows, z] += yt
        sumsqs[rows, z] += yt * yt

        if policy.should_resample(ess_t, N):
            ancestors = resample(weights, N, policy.scheme, rng_move)
            genealogy.append(t + 1, ancestors)
            counts = counts[ancestors]
            sums = sums[ancestors]
            sumsqs = sumsqs[ancestors]
            ledger.reset_uniform()
            if root1 is not None:
                root1 = root1[ancestors]

        par_w, par_mu, par_var = sample_params_batch(counts, sums, sumsqs, spec, rng_param)

        if root1 is None:
            root1 = np.arange(N, dtype=np.int64)
        genealogy.horizon = max(genealogy.horizon, t + 1)
        ess_tr[t] = ess_t
        inc_tr[t] = increment
        anc_tr[t] = np.unique(root1).size
        suff_tr[t] = unique_count(_suffstat_rows(counts, sums, sumsqs))

    trace = DiagnosticTrace(
        ess=ess_tr,
        log_evidence_increments=inc_tr,
        distinct_ancestors_from_1=anc_tr,
        distinct_suffstats=suff_tr,
    )
    particles = ParticleSet(
        n_particles=N,
        payload=MixturePayload(counts, sums, sumsqs, par_w, par_mu, par_var),
        log_weights=ledger.log_w,
        genealogy=genealogy,
        t=T,
    )
    return RunResult(
        trace=trace,
        final_particles=particles,
        log_evidence=float(inc_tr.sum()),
        seed=seed,
        wall_time=time.perf_counter() - start,
    )


def run_bootstrap_locallevel(
    spec: LocalLevelSpec,
    data: Dataset,
    N: int,
    seed: int,
    policy: ResamplePolicy = ADAPTIVE_DEFAULT_POLICY,
    path_functional: str = "sum_x",
) -> RunResult:
    """Bootstrap filter on the local level model.

    The per-particle payload carries the running additive functional
    (``sum_x`` for sum of states, ``sum_x2`` for sum of squared states);
    its weighted estimate and the weighted filtered mean are recorded at
    every step from the pre-resampling weights.
    """
    obs_var, state_var = spec.require_fixed_variances("run_bootstrap_locallevel")
    y = data.observations
    T = y.size
    _validate_run_args(N, T)
    if path_functional not in ("sum_x", "sum_x2"):
        raise ValidationError(
            f"path_functional must be 'sum_x' or 'sum_x2', got {path_functional!r}"
        )
    rng_move, _ = _spawn_streams(seed)
    start = time.perf_counter()

    state_sd = float(np.sqrt(state_var))
    x = np.empty(N)
    running = np.zeros(N)
    genealogy = Genealogy(N)
    ledger = _WeightLedger(N)
    root1 = None
    ess_tr = np.empty(T)
    inc_tr = np.empty(T)
    anc_tr = np.empty(T, dtype=np.int64)
    path_tr = np.empty(T)
    mean_tr = np.empty(T)

    for t in range(T):
        if t == 0:
            x = rng_move.normal(spec.init_mean, np.sqrt(spec.init_var), N)
        else:
            x = x + state_sd * rng_move.standard_normal(N)
        running = running + (x if path_functional == "sum_x" else x * x)

        with np.errstate(over="ignore"):  # -inf log-weight is a diagnosed state
            log_inc = -0.5 * (_LOG_2PI + np.log(obs_var)) - 0.5 * (y[t] - x) ** 2 / obs_var
        try:
            weights, increment = ledger.absorb(log_inc)
        except DegenerateWeightsError as err:
            err.trace = _partial_trace(t, ess_tr, inc_tr, anc_tr, path_tr=path_tr, mean_tr=mean_tr)
            raise
        ess_t = compute_ess(weights)
        mean_tr[t] = float(np.sum(weights * x))
        path_tr[t] = float(np.sum(weights * running))

        if policy.should_resample(ess_t, N):
            ancestors = resample(weights, N, policy.scheme, rng_move)
            genealogy.append(t + 1, ancestors)
            x = x[ancestors]
            running = running[ancestors]
            ledger.reset_uniform()
            if root1 is not None:
                root1 = root1[ancestors]

        if root1 is None:
            root1 = np.arange(N, dtype=np.int64)
        genealogy.horizon = max(genealogy.horizon, t + 1)
        ess_tr[t] = ess_t
        inc_tr[t] = increment
        anc_tr[t] = np.unique(root1).size

    trace = DiagnosticTrace(
        ess=ess_tr,
        log_evidence_increments=inc_tr,
        distinct_ancestors_from_1=anc_tr,
        path_functional=path_tr,
        filtered_mean=mean_tr,
    )
    particles = ParticleSet(
        n_particles=N,
        payload=LocalLevelPayload(states=x, path_functional=running),
        log_weights=ledger.log_w,
        genealogy=genealogy,
        t=T,
    )
    return RunResult(
        trace=trace,
        final_particles=particles,
        log_evidence=float(inc_tr.sum()),
        seed=seed,
        wall_time=time.perf_counter() - start,
    )
