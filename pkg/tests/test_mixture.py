"""Mixture model family: conjugate machinery against independent oracles."""

import numpy as np
import pytest
from scipy import integrate, stats

from smclab import (
    Dataset,
    GuardError,
    MixtureModelSpec,
    MixtureParams,
    MixtureSuffStats,
    ValidationError,
    enumerate_mixture_log_evidence,
    mixture_predictive_logdensity,
    sample_mixture_params,
    simulate_mixture_data,
    update_mixture_suffstats,
)
from smclab.mixture import (
    allocation_logprior,
    component_logpredictive,
    predictive_logdensity_batch,
    sample_params_batch,
)

SPEC = MixtureModelSpec(K=2, dirichlet_weight=1.0, nig_m0=0.0, nig_kappa0=1.0, nig_a0=2.0, nig_b0=2.0)


def toy_dataset():
    params = MixtureParams([0.5, 0.5], [0.0, 3.0], [1.0, 1.0])
    return simulate_mixture_data(SPEC, params, 5, 20100603)


# ---------------------------------------------------------------------------
# simulate_mixture_data
# ---------------------------------------------------------------------------

def test_simulate_degenerate_weights_all_component_one():
    params = MixtureParams([1.0, 0.0], [0.0, 5.0], [1.0, 1.0])
    ds = simulate_mixture_data(SPEC, params, 3, 7)
    assert np.all(ds.true_allocations == 1)


def test_simulate_vanishing_noise_pins_observations():
    params = MixtureParams([0.5, 0.5], [0.0, 5.0], [1e-12, 1e-12])
    ds = simulate_mixture_data(SPEC, params, 50, 11)
    near0 = np.abs(ds.observations) < 1e-4
    near5 = np.abs(ds.observations - 5.0) < 1e-4
    assert np.all(near0 | near5)


def test_simulate_law_of_large_numbers():
    params = MixtureParams([0.3, 0.7], [0.0, 3.0], [1.0, 1.0])
    ds = simulate_mixture_data(SPEC, params, 10000, 13)
    y = ds.observations
    se = y.std(ddof=1) / np.sqrt(y.size)
    assert abs(y.mean() - 2.1) < 3 * se


def test_simulate_reproducible_and_validates():
    params = MixtureParams([0.3, 0.7], [0.0, 3.0], [1.0, 1.0])
    a = simulate_mixture_data(SPEC, params, 20, 5)
    b = simulate_mixture_data(SPEC, params, 20, 5)
    assert np.array_equal(a.observations, b.observations)
    assert np.array_equal(a.true_allocations, b.true_allocations)
    with pytest.raises(ValidationError):
        MixtureParams([0.6, 0.6], [0.0, 1.0], [1.0, 1.0])


# ---------------------------------------------------------------------------
# mixture_predictive_logdensity
# ---------------------------------------------------------------------------

def test_predictive_empty_stats_collapses_to_single_component():
    # symmetric prior: the mixture of identical components is one component
    prior_scale = np.sqrt(SPEC.nig_b0 * (SPEC.nig_kappa0 + 1) / (SPEC.nig_a0 * SPEC.nig_kappa0))
    for y in (-2.0, 0.0, 1.7):
        got = mixture_predictive_logdensity(y, MixtureSuffStats.empty(2), SPEC)
        want = stats.t.logpdf(y, 2 * SPEC.nig_a0, loc=SPEC.nig_m0, scale=prior_scale)
        assert got == pytest.approx(want, abs=1e-12)


def test_predictive_mode_at_prior_mean():
    empty = MixtureSuffStats.empty(2)
    at_mean = mixture_predictive_logdensity(SPEC.nig_m0, empty, SPEC)
    away = mixture_predictive_logdensity(SPEC.nig_m0 + 10.0, empty, SPEC)
    assert at_mean > away


def test_predictive_matches_quadrature_oracle():
    # Oracle: numerical integration of Normal(y; mu, var) against the NIG
    # posterior of each component, mixed with the allocation probabilities.
    stats_ = MixtureSuffStats([3, 0], [3.0, 0.0], [5.0, 0.0])
    y = 1.0

    def nig_posterior(n, s, q):
        kn = SPEC.nig_kappa0 + n
        mn = (SPEC.nig_kappa0 * SPEC.nig_m0 + s) / kn
        an = SPEC.nig_a0 + n / 2
        bn = SPEC.nig_b0
        if n > 0:
            bn = bn + 0.5 * (q - s * s / n) + SPEC.nig_kappa0 * n * (s / n - SPEC.nig_m0) ** 2 / (2 * kn)
        return mn, kn, an, bn

    def component_density(n, s, q):
        mn, kn, an, bn = nig_posterior(n, s, q)

        def over_mu(var):
            f = lambda mu: (
                stats.norm.pdf(y, mu, np.sqrt(var))
                * stats.norm.pdf(mu, mn, np.sqrt(var / kn))
                * stats.invgamma.pdf(var, an, scale=bn)
            )
            half = 12 * (np.sqrt(var / kn) + np.sqrt(var))
            value, _ = integrate.quad(f, mn - half, mn + half, limit=200)
            return value

        value, _ = integrate.quad(over_mu, 1e-9, np.inf, limit=400)
        return value

    p1 = component_density(3, 3.0, 5.0)
    p2 = component_density(0, 0.0, 0.0)
    oracle = np.log((4 / 5) * p1 + (1 / 5) * p2)
    assert oracle == pytest.approx(-1.1651422762326356, abs=1e-8)  # frozen oracle value
    got = mixture_predictive_logdensity(y, stats_, SPEC)
    assert got == pytest.approx(oracle, abs=1e-4)


def test_predictive_integrates_to_one():
    grid = np.linspace(-60.0, 60.0, 240001)
    for stats_ in (
        MixtureSuffStats.empty(2),
        MixtureSuffStats([3, 0], [3.0, 0.0], [5.0, 0.0]),
        MixtureSuffStats([4, 2], [-1.0, 7.0], [3.0, 26.0]),
    ):
        dens = np.exp(
            predictive_logdensity_batch(
                grid[:, None], stats_.counts, stats_.sums, stats_.sumsqs, SPEC
            )
        )
        assert np.trapezoid(dens, grid) == pytest.approx(1.0, abs=1e-4)


# ---------------------------------------------------------------------------
# update_mixture_suffstats
# ---------------------------------------------------------------------------

def test_update_arithmetic():
    stats_ = MixtureSuffStats([1, 0], [3.0, 0.0], [9.0, 0.0])
    got = update_mixture_suffstats(stats_, 2.0, 1)
    assert got.counts.tolist() == [2, 0]
    assert got.sums.tolist() == [5.0, 0.0]
    assert got.sumsqs.tolist() == [13.0, 0.0]


def test_update_zero_observation_second_component():
    got = update_mixture_suffstats(MixtureSuffStats.empty(2), 0.0, 2)
    assert got.counts.tolist() == [0, 1]
    assert got.sums.tolist() == [0.0, 0.0]
    assert got.sumsqs.tolist() == [0.0, 0.0]


def test_update_commutes_and_keeps_invariants():
    a = update_mixture_suffstats(update_mixture_suffstats(MixtureSuffStats.empty(2), 1.0, 1), -1.0, 1)
    b = update_mixture_suffstats(update_mixture_suffstats(MixtureSuffStats.empty(2), -1.0, 1), 1.0, 1)
    for got in (a, b):
        assert got.counts.tolist() == [2, 0]
        assert got.sums[0] == 0.0
        assert got.sumsqs[0] == 2.0
    assert a.total_count == 2


def test_update_out_of_range_component():
    with pytest.raises(IndexError):
        update_mixture_suffstats(MixtureSuffStats.empty(2), 1.0, 3)
    with pytest.raises(IndexError):
        update_mixture_suffstats(MixtureSuffStats.empty(2), 1.0, 0)


def test_bookkeeping_invariants_along_random_walk():
    rng = np.random.default_rng(3)
    stats_ = MixtureSuffStats.empty(2)
    for i in range(200):
        stats_ = update_mixture_suffstats(stats_, float(rng.normal()), int(rng.integers(1, 3)))
        assert stats_.total_count == i + 1
        pos = stats_.counts > 0
        assert np.all(
            stats_.sumsqs[pos] >= stats_.sums[pos] ** 2 / stats_.counts[pos] - 1e-12
        )


# ---------------------------------------------------------------------------
# sample_mixture_params
# ---------------------------------------------------------------------------

def test_prior_recovery_of_component_means():
    rng = np.random.default_rng(21)
    n = 10**5
    _, means, _ = sample_params_batch(
        np.zeros((n, 2)), np.zeros((n, 2)), np.zeros((n, 2)), SPEC, rng
    )
    # prior mu | var ~ Normal(m0, var); var ~ IG(2, 2) => sd of mu = sqrt(E var) = sqrt(2)
    se = means[:, 0].std(ddof=1) / np.sqrt(n)
    assert abs(means[:, 0].mean() - SPEC.nig_m0) < 3 * se


def test_posterior_concentration_tolerance_from_closed_form():
    # n=1e6 observations, sample mean 4, sample variance 1
    n = 10**6
    s = 4.0 * n
    q = n * (1.0 + 16.0)
    stats_ = MixtureSuffStats([n, 0], [s, 0.0], [q, 0.0])
    rng = np.random.default_rng(8)
    draws = np.array(
        [sample_mixture_params(stats_, SPEC, rng).means[0] for _ in range(2000)]
    )
    # closed-form posterior sd of mu_1 is ~1e-3, so 0.05 is a 50-sigma band
    inside = np.abs(draws - 4.0) < 0.05
    assert inside.mean() >= 0.99


def test_component_permutation_symmetry_of_draws():
    stats_a = MixtureSuffStats([5, 1], [10.0, -2.0], [25.0, 5.0])
    stats_b = MixtureSuffStats([1, 5], [-2.0, 10.0], [5.0, 25.0])
    n = 10**5
    rng_a = np.random.default_rng(4)
    rng_b = np.random.default_rng(5)
    _, ma, va = sample_params_batch(
        np.tile(stats_a.counts, (n, 1)), np.tile(stats_a.sums, (n, 1)),
        np.tile(stats_a.sumsqs, (n, 1)), SPEC, rng_a,
    )
    _, mb, vb = sample_params_batch(
        np.tile(stats_b.counts, (n, 1)), np.tile(stats_b.sums, (n, 1)),
        np.tile(stats_b.sumsqs, (n, 1)), SPEC, rng_b,
    )
    qs = [10, 25, 50, 75, 90]
    for col in (0, 1):
        qa = np.percentile(ma[:, col], qs)
        qb = np.percentile(mb[:, 1 - col], qs)
        assert np.allclose(qa, qb, atol=0.05)
        assert np.allclose(
            np.percentile(va[:, col], qs), np.percentile(vb[:, 1 - col], qs), rtol=0.05
        )


# ---------------------------------------------------------------------------
# enumerate_mixture_log_evidence
# ---------------------------------------------------------------------------

def test_enumeration_single_observation_reduces_to_predictive():
    ds = Dataset(observations=np.array([0.7]))
    assert enumerate_mixture_log_evidence(SPEC, ds) == pytest.approx(
        mixture_predictive_logdensity(0.7, MixtureSuffStats.empty(2), SPEC), abs=1e-12
    )


def test_enumeration_invariant_under_observation_order():
    ds = toy_dataset()
    forward = enumerate_mixture_log_evidence(SPEC, ds)
    backward = enumerate_mixture_log_evidence(
        SPEC, Dataset(observations=ds.observations[::-1].copy())
    )
    assert forward == pytest.approx(backward, abs=1e-10)


def test_enumeration_against_prior_importance_sampling():
    ds = toy_dataset()
    enum = enumerate_mixture_log_evidence(SPEC, ds)
    rng = np.random.default_rng(99)
    m = 10**6
    w, mu, var = sample_params_batch(
        np.zeros((m, 2)), np.zeros((m, 2)), np.zeros((m, 2)), SPEC, rng
    )
    loglik = np.zeros(m)
    for yt in ds.observations:
        comp = np.log(w) - 0.5 * np.log(2 * np.pi * var) - 0.5 * (yt - mu) ** 2 / var
        top = comp.max(axis=1)
        loglik += top + np.log(np.exp(comp - top[:, None]).sum(axis=1))
    shift = loglik.max()
    linear = np.exp(loglik - shift)
    se = linear.std(ddof=1) / np.sqrt(m)
    assert abs(linear.mean() - np.exp(enum - shift)) < 3 * se


def test_enumeration_telescopes_through_predictive_increments():
    # Exact forward filter over allocation prefixes: the sum of
    # predictive-style increments must reproduce the one-shot enumeration.
    ds = toy_dataset()
    y = ds.observations
    K = SPEC.K
    counts = np.zeros((1, K))
    sums = np.zeros((1, K))
    sumsqs = np.zeros((1, K))
    log_joint = np.zeros(1)
    total = 0.0
    for yt in y:
        from scipy.special import logsumexp

        log_post = log_joint - logsumexp(log_joint)
        pred = predictive_logdensity_batch(yt, counts, sums, sumsqs, SPEC)
        total += logsumexp(log_post + pred)
        # branch every prefix on the next allocation
        step = allocation_logprior(counts, SPEC) + component_logpredictive(
            yt, counts, sums, sumsqs, SPEC
        )
        log_joint = (log_joint[:, None] + step).reshape(-1)
        base_counts = np.repeat(counts, K, axis=0)
        base_sums = np.repeat(sums, K, axis=0)
        base_sumsqs = np.repeat(sumsqs, K, axis=0)
        which = np.tile(np.arange(K), counts.shape[0])
        rows = np.arange(base_counts.shape[0])
        base_counts[rows, which] += 1
        base_sums[rows, which] += yt
        base_sumsqs[rows, which] += yt * yt
        counts, sums, sumsqs = base_counts, base_sums, base_sumsqs
    assert total == pytest.approx(enumerate_mixture_log_evidence(SPEC, ds), abs=1e-10)


def test_enumeration_guard_names_the_bound():
    ds = Dataset(observations=np.zeros(24))
    with pytest.raises(GuardError, match="10000000"):
        enumerate_mixture_log_evidence(SPEC, ds)
