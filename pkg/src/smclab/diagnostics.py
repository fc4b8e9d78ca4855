"""Degeneracy measurements over run traces and genealogies.

The three quantities this package exists to measure:

* ancestral coalescence: how many distinct time-s ancestors the time-t
  population still has (composition of the recorded ancestor vectors);
* distinct sufficient statistics: how many distinct per-particle
  conjugate statistics survive at each step of a mixture run;
* additive path functionals: the weighted estimate of sum_{s<=t} x_s on
  the local level model, whose across-replication variance growth is the
  canonical symptom of path degeneracy.

Plus the across-replication dispersion report used by the experiment
harness.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence

import numpy as np

from .engine import Genealogy, ParticleSet
from .errors import ValidationError

__all__ = [
    "CurveStats",
    "DiagnosticTrace",
    "ReplicationReport",
    "distinct_ancestors",
    "path_functional_estimate",
    "replication_report",
]


@dataclass
class DiagnosticTrace:
    """Per-time-step record of one filter run.

    ``distinct_suffstats`` is populated for mixture runs only;
    ``path_functional`` and ``filtered_mean`` for local level runs only
    (``filtered_mean`` is an in-memory extra, never serialized).
    """

    ess: np.ndarray
    log_evidence_increments: np.ndarray
    distinct_ancestors_from_1: np.ndarray
    distinct_suffstats: Optional[np.ndarray] = None
    path_functional: Optional[np.ndarray] = None
    filtered_mean: Optional[np.ndarray] = None

    @property
    def T(self) -> int:
        return int(self.ess.size)

    def validate(self, n_particles: int) -> None:
        T = self.T
        for name in ("log_evidence_increments", "distinct_ancestors_from_1"):
            if getattr(self, name).shape != (T,):
                raise ValidationError(f"trace field {name} must have length {T}")
        for name in ("distinct_suffstats", "path_functional", "filtered_mean"):
            value = getattr(self, name)
            if value is not None and value.shape != (T,):
                raise ValidationError(f"trace field {name} must have length {T}")
        if np.any(self.ess < 1.0 - 1e-9) or np.any(self.ess > n_particles * (1 + 1e-9)):
            raise ValidationError("ess out of range [1, N]")
        counts = self.distinct_ancestors_from_1
        if np.any(counts < 1) or np.any(counts > n_particles):
            raise ValidationError("distinct ancestor counts out of range [1, N]")
        if np.any(np.diff(counts) > 0):
            raise ValidationError("distinct_ancestors_from_1 must be non-increasing")
        if self.distinct_suffstats is not None:
            d = self.distinct_suffstats
            if np.any(d < 1) or np.any(d > n_particles):
                raise ValidationError("distinct suffstat counts out of range [1, N]")


def distinct_ancestors(genealogy: Genealogy, t: int, s: int) -> int:
    """Distinct time-s ancestors of the time-t population.

    Composes the ancestor vectors of every resampling event with time u in
    (s, t], latest first.  Equals N when no resampling occurred in (s, t].
    """
    if s > t:
        raise IndexError(f"need s <= t, got s={s} > t={t}")
    if s < 0 or (genealogy.horizon and t > genealogy.horizon):
        raise IndexError(
            f"times must lie in [0, {genealogy.horizon}], got s={s}, t={t}"
        )
    roots = np.arange(genealogy.n_particles, dtype=np.int64)
    for u, ancestors in sorted(genealogy.events, key=lambda e: e[0], reverse=True):
        if s < u <= t:
            roots = ancestors[roots]
    return int(np.unique(roots).size)


def path_functional_estimate(particles: ParticleSet) -> float:
    """Weighted average of the per-particle running additive functional."""
    payload = particles.payload
    running = getattr(payload, "path_functional", None)
    if running is None:
        raise ValidationError(
            "particle payload does not carry a running path functional"
        )
    return float(np.sum(particles.normalized_weights() * running))


@dataclass
class CurveStats:
    """Across-replication quartiles of one per-time-step diagnostic."""

    median: np.ndarray
    q25: np.ndarray
    q75: np.ndarray


@dataclass
class ReplicationReport:
    """Across-run dispersion of a panel of identically configured runs."""

    R: int
    log_evidence_per_rep: np.ndarray
    log_evidence_mean: float
    log_evidence_sd: float
    log_evidence_se: float
    curves: Dict[str, CurveStats] = field(default_factory=dict)
    path_functional_var: Optional[np.ndarray] = None


def _curve_stats(stack: np.ndarray) -> CurveStats:
    q25, med, q75 = np.percentile(stack, [25.0, 50.0, 75.0], axis=0)
    return CurveStats(median=med, q25=q25, q75=q75)


def replication_report(results: Sequence) -> ReplicationReport:
    """Summarize R >= 2 runs that differ only by seed.

    Raises :class:`ValidationError` when the panel is structurally mixed
    (different horizons, particle counts, or trace columns).
    """
    if len(results) < 2:
        raise ValidationError("replication report needs at least 2 runs")
    first = results[0]
    T = first.trace.T
    N = first.final_particles.n_particles
    mix_cols = first.trace.distinct_suffstats is not None
    path_cols = first.trace.path_functional is not None
    for r in results[1:]:
        if r.trace.T != T or r.final_particles.n_particles != N:
            raise ValidationError("runs in a panel must share horizon and particle count")
        if (r.trace.distinct_suffstats is not None) != mix_cols or (
            r.trace.path_functional is not None
        ) != path_cols:
            raise ValidationError("runs in a panel must share trace columns")

    evidences = np.asarray([r.log_evidence for r in results], dtype=float)
    R = len(results)
    sd = float(np.std(evidences, ddof=1))
    report = ReplicationReport(
        R=R,
        log_evidence_per_rep=evidences,
        log_evidence_mean=float(np.mean(evidences)),
        log_evidence_sd=sd,
        log_evidence_se=sd / float(np.sqrt(R)),
    )
    report.curves["ess"] = _curve_stats(np.stack([r.trace.ess for r in results]))
    report.curves["distinct_ancestors_from_1"] = _curve_stats(
        np.stack([r.trace.distinct_ancestors_from_1 for r in results])
    )
    if mix_cols:
        report.curves["distinct_suffstats"] = _curve_stats(
            np.stack([r.trace.distinct_suffstats for r in results])
        )
    if path_cols:
        stack = np.stack([r.trace.path_functional for r in results])
        report.curves["path_functional"] = _curve_stats(stack)
        report.path_functional_var = np.var(stack, axis=0, ddof=1)
    return report
