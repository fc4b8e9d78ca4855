"""The four classic resampling schemes, all unbiased.

Each scheme maps normalized weights to an ancestor-index vector.
Conventions fixed for reproducibility:

* categorical inversion uses cumulative sums with a strict ``<``
  comparison (the chosen index for a point u is the smallest i with
  u < cum_i), and the final cumulative entry is forced to exactly 1.0 so
  the last index is always reachable;
* systematic draws one u ~ Uniform[0, 1/N) and uses the points u + j/N;
* stratified draws one uniform per stratum, points (j + u_j)/N;
* residual assigns floor(N w_i) copies deterministically and fills the
  remainder by multinomial on the residual weights.

Systematic output counts are always floor(N w_i) or ceil(N w_i).
"""

from __future__ import annotations

import enum

import numpy as np

from .errors import ValidationError

__all__ = ["ResampleScheme", "resample"]


class ResampleScheme(str, enum.Enum):
    MULTINOMIAL = "multinomial"
    RESIDUAL = "residual"
    SYSTEMATIC = "systematic"
    STRATIFIED = "stratified"


def _checked_cumulative(weights: np.ndarray) -> np.ndarray:
    w = np.asarray(weights, dtype=float)
    if w.ndim != 1 or w.size == 0:
        raise ValidationError("weights must be a nonempty 1-d vector")
    if np.any(w < 0) or not np.all(np.isfinite(w)):
        raise ValidationError("weights must be finite and nonnegative")
    total = w.sum()
    if abs(total - 1.0) > 1e-8:
        raise ValidationError(f"weights must be normalized; sum is {total!r}")
    cum = np.cumsum(w)
    cum[-1] = 1.0
    return cum


def _invert(cum: np.ndarray, points: np.ndarray) -> np.ndarray:
    # smallest i with point < cum[i]
    return np.searchsorted(cum, points, side="right").astype(np.int64)


def _multinomial(cum: np.ndarray, n_out: int, rng: np.random.Generator) -> np.ndarray:
    return _invert(cum, rng.random(n_out))


def _systematic(cum: np.ndarray, n_out: int, rng: np.random.Generator) -> np.ndarray:
    u = rng.random() / n_out
    points = u + np.arange(n_out) / n_out
    return _invert(cum, points)


def _stratified(cum: np.ndarray, n_out: int, rng: np.random.Generator) -> np.ndarray:
    points = (np.arange(n_out) + rng.random(n_out)) / n_out
    return _invert(cum, points)


def _residual(weights: np.ndarray, n_out: int, rng: np.random.Generator) -> np.ndarray:
    scaled = n_out * np.asarray(weights, dtype=float)
    copies = np.floor(scaled).astype(np.int64)
    ancestors = np.repeat(np.arange(weights.size, dtype=np.int64), copies)
    n_rest = n_out - int(copies.sum())
    if n_rest > 0:
        residual = scaled - copies
        residual /= residual.sum()
        cum = np.cumsum(residual)
        cum[-1] = 1.0
        ancestors = np.concatenate([ancestors, _invert(cum, rng.random(n_rest))])
    return ancestors


def resample(
    weights: np.ndarray,
    n_out: int,
    scheme: ResampleScheme,
    rng: np.random.Generator,
) -> np.ndarray:
    """Draw ``n_out`` ancestor indices from normalized weights.

    Every scheme satisfies E[#offspring of particle i] = n_out * w_i.
    Raises :class:`ValidationError` when the weights are not normalized
    to within 1e-8.
    """
    if n_out < 1:
        raise ValidationError(f"n_out must be >= 1, got {n_out}")
    scheme = ResampleScheme(scheme)
    if scheme is ResampleScheme.RESIDUAL:
        w = np.asarray(weights, dtype=float)
        _checked_cumulative(w)  # validation only
        return _residual(w, n_out, rng)
    cum = _checked_cumulative(weights)
    if scheme is ResampleScheme.MULTINOMIAL:
        return _multinomial(cum, n_out, rng)
    if scheme is ResampleScheme.SYSTEMATIC:
        return _systematic(cum, n_out, rng)
    return _stratified(cum, n_out, rng)
