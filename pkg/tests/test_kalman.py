"""Filtered and smoothed moments against dense Gaussian conditioning."""

import numpy as np
import pytest
from scipy import stats

from smclab import (
    Dataset,
    LocalLevelSpec,
    kalman_filter_moments,
    kalman_log_evidence,
    kalman_smoother_moments,
)

Y5 = np.array([0.5, -0.3, 1.2, 0.8, -1.0])
SPEC5 = LocalLevelSpec(obs_var=1.0, state_var=0.5, init_mean=0.0, init_var=1.0)


def _state_cov(T, p0, state_var):
    idx = np.arange(T)
    return p0 + state_var * np.minimum(idx[:, None], idx[None, :])


def test_uninformative_observations_keep_prior_mean():
    spec = LocalLevelSpec(obs_var=1e12, state_var=0.5, init_mean=0.7, init_var=1.0)
    ds = Dataset(observations=np.array([5.0, -3.0, 8.0, 2.0]))
    moments = kalman_filter_moments(spec, ds)
    assert np.all(np.abs(moments.means - 0.7) < 1e-3)


def test_perfect_observations_track_data():
    spec = LocalLevelSpec(obs_var=1e-12, state_var=0.5, init_mean=0.0, init_var=1.0)
    ds = Dataset(observations=Y5)
    moments = kalman_filter_moments(spec, ds)
    assert np.all(np.abs(moments.means - Y5) < 1e-3)


def test_filtered_moments_match_dense_conditioning():
    T = Y5.size
    S = _state_cov(T, 1.0, 0.5)
    moments = kalman_filter_moments(SPEC5, Dataset(observations=Y5))
    for t in range(T):
        St = S[: t + 1, : t + 1] + np.eye(t + 1)
        gain = np.linalg.solve(St, Y5[: t + 1])
        mean = S[t, : t + 1] @ gain
        var = S[t, t] - S[t, : t + 1] @ np.linalg.solve(St, S[: t + 1, t])
        assert moments.means[t] == pytest.approx(mean, abs=1e-10)
        assert moments.variances[t] == pytest.approx(var, abs=1e-10)


def test_smoothed_equals_filtered_at_single_step():
    ds = Dataset(observations=np.array([0.9]))
    filt = kalman_filter_moments(SPEC5, ds)
    smooth = kalman_smoother_moments(SPEC5, ds)
    assert smooth.means[0] == pytest.approx(filt.means[0], abs=1e-12)
    assert smooth.variances[0] == pytest.approx(filt.variances[0], abs=1e-12)


def test_huge_state_noise_decouples_time_steps():
    spec = LocalLevelSpec(obs_var=1.0, state_var=1e12, init_mean=0.0, init_var=1.0)
    ds = Dataset(observations=Y5)
    filt = kalman_filter_moments(spec, ds)
    smooth = kalman_smoother_moments(spec, ds)
    tol = 1e-3 * np.maximum(np.abs(Y5), 1.0)
    assert np.all(np.abs(smooth.means - filt.means) < tol)


def test_smoothed_moments_match_dense_conditioning():
    T = Y5.size
    S = _state_cov(T, 1.0, 0.5)
    obs_cov = S + np.eye(T)
    mean = S @ np.linalg.solve(obs_cov, Y5)
    cov = S - S @ np.linalg.solve(obs_cov, S)
    smooth = kalman_smoother_moments(SPEC5, Dataset(observations=Y5))
    assert np.allclose(smooth.means, mean, atol=1e-10)
    assert np.allclose(smooth.variances, np.diag(cov), atol=1e-10)
    # frozen oracle values for the smoothed means
    assert np.allclose(
        mean,
        [0.22597656249999998, 0.2019531249999998, 0.4289062499999996,
         0.2703124999999999, -0.15312500000000007],
        atol=1e-12,
    )


def test_smoothed_variance_never_exceeds_filtered():
    rng = np.random.default_rng(6)
    for _ in range(5):
        y = rng.normal(size=30)
        filt = kalman_filter_moments(SPEC5, Dataset(observations=y))
        smooth = kalman_smoother_moments(SPEC5, Dataset(observations=y))
        assert np.all(smooth.variances <= filt.variances + 1e-12)


def test_moments_reconstruct_the_evidence():
    # prediction decomposition: sum of log N(y_t; predicted mean, predicted var + obs var)
    moments = kalman_filter_moments(SPEC5, Dataset(observations=Y5))
    rebuilt = stats.norm.logpdf(
        Y5, loc=moments.predicted_means,
        scale=np.sqrt(moments.predicted_variances + SPEC5.obs_var),
    ).sum()
    assert rebuilt == pytest.approx(
        kalman_log_evidence(SPEC5, Dataset(observations=Y5)), abs=1e-10
    )
