"""Model-agnostic particle machinery.

Log-weight bookkeeping (everything stays in log space until the last
moment), effective sample size, exact distinct-value counting, and the
genealogy: one ancestor-index vector recorded per resampling event, kept
in full so any particle's ancestral line can be reconstructed exactly.

Weight reductions use numpy's fixed deterministic summation order, so a
seeded run reproduces bit-for-bit.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, List, Tuple

import numpy as np

from .errors import DegenerateWeightsError, ValidationError

__all__ = [
    "normalize_log_weights",
    "ess",
    "unique_count",
    "categorical_rows",
    "Genealogy",
    "ParticleSet",
]


def normalize_log_weights(log_weights: np.ndarray) -> Tuple[np.ndarray, float]:
    """Normalize unnormalized log weights.

    Returns ``(weights, log_mean)`` where ``weights`` are linear-scale and
    sum to 1, and ``log_mean = logsumexp(log_weights) - log N`` is the
    evidence increment when the inputs are incremental weights over a
    uniformly weighted population.  Adding a constant c to every input
    leaves ``weights`` unchanged and shifts ``log_mean`` by exactly c.

    Raises :class:`DegenerateWeightsError` when no entry is finite.
    """
    lw = np.asarray(log_weights, dtype=float)
    if lw.size == 0:
        raise ValidationError("cannot normalize an empty weight vector")
    m = np.max(lw)
    if not np.isfinite(m):
        raise DegenerateWeightsError("all log-weights are -inf: particle population died")
    shifted = np.exp(lw - m)
    total = shifted.sum()
    weights = shifted / total
    # total/size is exactly 1.0 for equal weights, making log_mean exact there
    log_mean = m + np.log(total / lw.size)
    return weights, float(log_mean)


def ess(normalized_weights: np.ndarray) -> float:
    """Effective sample size 1 / sum(w_i^2) of normalized weights."""
    w = np.asarray(normalized_weights, dtype=float)
    return float(1.0 / np.sum(w * w))


def categorical_rows(probs: np.ndarray, u: np.ndarray) -> np.ndarray:
    """One inverse-CDF categorical draw per row.

    ``probs`` rows must sum to 1; the chosen index for a uniform u is the
    smallest k with u < cumsum(probs)[k], and the final cumulative entry is
    forced to exactly 1.0 so the last index is always reachable.
    """
    cum = np.cumsum(probs, axis=1)
    cum[:, -1] = 1.0
    return (cum <= u[:, None]).sum(axis=1)


def unique_count(values) -> int:
    """Number of distinct entries under exact byte-level equality.

    Accepts a 2-d array (rows are compared), a 1-d array (scalars are
    compared), or any iterable of hashables.  Byte-level comparison is
    deliberate: coalesced particles are bit-identical copies, and epsilon
    closeness must not conflate near-duplicates with true copies.
    """
    if isinstance(values, np.ndarray):
        arr = np.ascontiguousarray(values)
        if arr.ndim == 1:
            arr = arr.reshape(-1, 1)
        if arr.ndim != 2:
            raise ValidationError("unique_count expects a 1-d or 2-d array")
        if arr.shape[0] == 0:
            return 0
        rowbytes = arr.view(np.dtype((np.void, arr.dtype.itemsize * arr.shape[1])))
        return int(np.unique(rowbytes).size)
    return len(set(values))


@dataclass
class Genealogy:
    """Full record of resampling events: (time step, ancestor indices).

    ``horizon`` is the largest time step the recording covers (a step with
    no resampling still extends the horizon).
    """

    n_particles: int
    events: List[Tuple[int, np.ndarray]] = field(default_factory=list)
    horizon: int = 0

    def append(self, t: int, ancestors: np.ndarray) -> None:
        ancestors = np.asarray(ancestors, dtype=np.int64)
        if ancestors.min(initial=0) < 0 or ancestors.max(initial=0) >= self.n_particles:
            raise ValidationError("ancestor indices out of range")
        self.events.append((int(t), ancestors))
        self.horizon = max(self.horizon, int(t))

    def __len__(self) -> int:
        return len(self.events)


@dataclass
class ParticleSet:
    """Weighted population at one point in time.

    ``payload`` is the algorithm-owned per-particle state (sufficient
    statistics, latent state, parameter draw, running functionals);
    ``log_weights`` are kept normalized (logsumexp == 0).
    """

    n_particles: int
    payload: Any
    log_weights: np.ndarray
    genealogy: Genealogy
    t: int

    def validate(self) -> None:
        if self.log_weights.shape != (self.n_particles,):
            raise ValidationError("log_weights must have one entry per particle")
        total = np.exp(self.log_weights).sum()
        if abs(total - 1.0) > 1e-10:
            raise ValidationError(f"normalized log-weights sum to {total!r}, not 1")
        for t_event, ancestors in self.genealogy.events:
            if ancestors.shape != (self.n_particles,):
                raise ValidationError(f"genealogy event at t={t_event} has wrong length")

    def normalized_weights(self) -> np.ndarray:
        return np.exp(self.log_weights)
