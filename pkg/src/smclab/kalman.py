"""Exact Kalman recursions for the local level model.

These are the gold standards the particle runs are judged against: the
prediction-error decomposition of the log evidence, the filtered moments,
and the fixed-interval (RTS) smoothed moments.  All three share the
package-wide timing convention (x_1 ~ Normal(m0, P0), first innovation
between t=1 and t=2).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import Dataset
from .errors import ValidationError
from .local_level import LocalLevelSpec

__all__ = [
    "KalmanMoments",
    "kalman_log_evidence",
    "kalman_filter_moments",
    "kalman_smoother_moments",
]

_LOG_2PI = float(np.log(2.0 * np.pi))


@dataclass(frozen=True)
class KalmanMoments:
    """Per-time-step means and variances, plus prediction bookkeeping."""

    means: np.ndarray
    variances: np.ndarray
    predicted_means: np.ndarray
    predicted_variances: np.ndarray


def _forward_pass(spec: LocalLevelSpec, data: Dataset):
    obs_var, state_var = spec.require_fixed_variances("Kalman recursion")
    y = data.observations
    T = y.size
    if T < 1:
        raise ValidationError("Kalman recursion needs at least one observation")
    m_pred = np.empty(T)
    p_pred = np.empty(T)
    m_filt = np.empty(T)
    p_filt = np.empty(T)
    loglik = 0.0
    m, p = spec.init_mean, spec.init_var
    for t in range(T):
        if t > 0:
            p = p + state_var
        m_pred[t], p_pred[t] = m, p
        s = p + obs_var
        resid = y[t] - m
        loglik += -0.5 * (_LOG_2PI + np.log(s) + resid * resid / s)
        gain = p / s
        m = m + gain * resid
        p = p * (1.0 - gain)
        m_filt[t], p_filt[t] = m, p
    moments = KalmanMoments(m_filt, p_filt, m_pred, p_pred)
    return float(loglik), moments


def kalman_log_evidence(spec: LocalLevelSpec, data: Dataset) -> float:
    """Exact log p(y_1..y_T): sum of log Normal(y_t; predicted mean, S_t)."""
    loglik, _ = _forward_pass(spec, data)
    return loglik


def kalman_filter_moments(spec: LocalLevelSpec, data: Dataset) -> KalmanMoments:
    """Filtered mean and variance of x_t given y_1..y_t, for every t."""
    _, moments = _forward_pass(spec, data)
    return moments


def kalman_smoother_moments(spec: LocalLevelSpec, data: Dataset) -> KalmanMoments:
    """Smoothed mean and variance of x_t given the full series y_1..y_T.

    Fixed-interval backward recursion over the filtered moments.  The sum
    of the smoothed means is the exact value of the additive path
    functional E[sum_t x_t | y_1..y_T].
    """
    _, filt = _forward_pass(spec, data)
    T = filt.means.size
    m_s = filt.means.copy()
    p_s = filt.variances.copy()
    for t in range(T - 2, -1, -1):
        # predicted quantities at t+1 given time-t information
        p_next_pred = filt.predicted_variances[t + 1]
        m_next_pred = filt.predicted_means[t + 1]
        gain = filt.variances[t] / p_next_pred if p_next_pred > 0 else 0.0
        m_s[t] = filt.means[t] + gain * (m_s[t + 1] - m_next_pred)
        p_s[t] = filt.variances[t] + gain * gain * (p_s[t + 1] - p_next_pred)
    return KalmanMoments(m_s, p_s, filt.predicted_means, filt.predicted_variances)
