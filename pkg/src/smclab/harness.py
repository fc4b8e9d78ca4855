"""Experiment runner: seeded replications, trace CSVs, report JSON.

Replications are embarrassingly parallel; each derives its own seed from
the master seed with a SplitMix64-style finalizer and owns its RNG, so the
emitted bytes never depend on the number of workers.  Results are gathered
and written in replication-index order by a single-threaded writer.

Output files per run:

* ``dataset.csv`` — the data actually filtered (``t,y[,x_true][,z_true]``);
* ``trace_rep####.csv`` — one per replication, columns
  ``rep,t,ess,log_evidence_increment,distinct_ancestors_from_1,
  distinct_suffstats,path_functional`` with empty cells for columns the
  model does not populate;
* ``report.json`` — the replication report: config digest, per-rep and
  aggregated log evidence, exact oracle value when available (or a notice
  when the enumeration guard refuses), quartile curves per diagnostic, and
  for the local level model the across-run variance of the path functional
  plus its exact smoothed target.
"""

from __future__ import annotations

import csv
import json
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import List, Optional

import numpy as np

from .config import ExperimentConfig
from .dataset import Dataset, read_dataset_csv, write_dataset_csv
from .diagnostics import CurveStats, ReplicationReport, replication_report
from .errors import GuardError, ValidationError
from .filters import (
    FilterKind,
    RunResult,
    run_bootstrap_locallevel,
    run_pl_mixture,
    run_storvik_mixture,
)
from .kalman import kalman_log_evidence, kalman_smoother_moments
from .mixture import enumerate_mixture_log_evidence, simulate_mixture_data
from .local_level import simulate_local_level_data

__all__ = ["derive_seed", "resolve_dataset", "run_experiment", "oracle_values"]

_SPLITMIX_GAMMA = 0x9E3779B97F4A7C15
_SPLITMIX_MUL1 = 0xBF58476D1CE4E5B9
_SPLITMIX_MUL2 = 0x94D049BB133111EB
_MASK64 = (1 << 64) - 1


def derive_seed(master_seed: int, replication_index: int) -> int:
    """Mix (master seed, replication index) into an independent 64-bit seed.

    SplitMix64 finalizer: advance the counter by index times the golden
    gamma 0x9E3779B97F4A7C15, then xor-shift/multiply with
    0xBF58476D1CE4E5B9 and 0x94D049BB133111EB.  The finalizer is a
    bijection on 64-bit counters, so distinct indices always give distinct
    seeds for a fixed master seed.
    """
    if replication_index < 0:
        raise ValidationError(f"replication_index must be >= 0, got {replication_index}")
    z = (master_seed + (replication_index + 1) * _SPLITMIX_GAMMA) & _MASK64
    z = ((z ^ (z >> 30)) * _SPLITMIX_MUL1) & _MASK64
    z = ((z ^ (z >> 27)) * _SPLITMIX_MUL2) & _MASK64
    return z ^ (z >> 31)


def resolve_dataset(config: ExperimentConfig, base_dir: Optional[Path] = None) -> Dataset:
    """Materialize the configured dataset (inline, file, or simulation)."""
    ds = config.dataset
    if ds.values is not None:
        return Dataset(observations=np.asarray(ds.values))
    if ds.path is not None:
        path = Path(ds.path)
        if base_dir is not None and not path.is_absolute():
            path = base_dir / path
        return read_dataset_csv(path)
    if config.is_mixture:
        return simulate_mixture_data(
            config.model, ds.simulate_params, ds.simulate_T, ds.simulate_seed
        )
    return simulate_local_level_data(config.model, ds.simulate_T, ds.simulate_seed)


def run_replication(config: ExperimentConfig, data: Dataset, rep_index: int) -> RunResult:
    """One seeded filter run; pure given (config, data, rep_index)."""
    seed = derive_seed(config.master_seed, rep_index)
    if config.algorithm is FilterKind.PARTICLE_LEARNING:
        return run_pl_mixture(config.model, data, config.N, seed, policy=config.policy)
    if config.algorithm is FilterKind.STORVIK:
        return run_storvik_mixture(config.model, data, config.N, seed, policy=config.policy)
    return run_bootstrap_locallevel(
        config.model,
        data,
        config.N,
        seed,
        policy=config.policy,
        path_functional=config.path_functional,
    )


def oracle_values(config: ExperimentConfig, data: Dataset) -> dict:
    """Exact reference values for this configuration, where they exist.

    Returns a dict with ``oracle`` ({name, value} or None), an optional
    ``oracle_notice`` explaining a skipped oracle, and for the local level
    model the exact path-functional target (sum of smoothed means).
    """
    out: dict = {"oracle": None}
    if config.is_mixture:
        try:
            value = enumerate_mixture_log_evidence(config.model, data)
            out["oracle"] = {"name": "enumerate_mixture_log_evidence", "value": value}
        except GuardError as err:
            out["oracle_notice"] = str(err)
    else:
        if config.model.has_fixed_variances:
            out["oracle"] = {
                "name": "kalman_log_evidence",
                "value": kalman_log_evidence(config.model, data),
            }
            smoothed = kalman_smoother_moments(config.model, data)
            if config.path_functional == "sum_x":
                out["path_functional_target"] = float(smoothed.means.sum())
            else:
                out["path_functional_target"] = float(
                    (smoothed.means**2 + smoothed.variances).sum()
                )
        else:
            out["oracle_notice"] = "no exact oracle for unknown-variance local level"
    return out


def _fmt(value: float) -> str:
    return repr(float(value))


def _write_trace_csv(path: Path, rep: int, result: RunResult, mixture: bool) -> None:
    trace = result.trace
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(
            [
                "rep",
                "t",
                "ess",
                "log_evidence_increment",
                "distinct_ancestors_from_1",
                "distinct_suffstats",
                "path_functional",
            ]
        )
        for t in range(trace.T):
            writer.writerow(
                [
                    str(rep),
                    str(t + 1),
                    _fmt(trace.ess[t]),
                    _fmt(trace.log_evidence_increments[t]),
                    str(int(trace.distinct_ancestors_from_1[t])),
                    str(int(trace.distinct_suffstats[t])) if mixture else "",
                    _fmt(trace.path_functional[t]) if not mixture else "",
                ]
            )


def _jsonify(obj):
    if isinstance(obj, dict):
        return {k: _jsonify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonify(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonify(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    return obj


def _report_payload(
    config: ExperimentConfig,
    data: Dataset,
    report: ReplicationReport,
    oracle: dict,
) -> dict:
    curves: dict = {"t": list(range(1, data.T + 1))}
    for name, stats in report.curves.items():
        curves[name] = {
            "median": stats.median,
            "q25": stats.q25,
            "q75": stats.q75,
        }
    if report.path_functional_var is not None:
        curves["path_functional"]["var"] = report.path_functional_var
    payload = {
        "config_digest": config.digest(),
        "algorithm": config.algorithm.value,
        "model": "mixture" if config.is_mixture else "local_level",
        "N": config.N,
        "T": data.T,
        "R": report.R,
        "log_evidence": {
            "per_rep": report.log_evidence_per_rep,
            "mean": report.log_evidence_mean,
            "sd": report.log_evidence_sd,
            "se": report.log_evidence_se,
        },
        "oracle": oracle.get("oracle"),
        "curves": curves,
    }
    if "oracle_notice" in oracle:
        payload["oracle_notice"] = oracle["oracle_notice"]
    if "path_functional_target" in oracle:
        payload["path_functional_target"] = oracle["path_functional_target"]
    return _jsonify(payload)


def _single_run_report(result: RunResult) -> ReplicationReport:
    """Degenerate R=1 report: zero dispersion, curves equal to the one run."""
    trace = result.trace
    report = ReplicationReport(
        R=1,
        log_evidence_per_rep=np.asarray([result.log_evidence]),
        log_evidence_mean=result.log_evidence,
        log_evidence_sd=0.0,
        log_evidence_se=0.0,
    )

    def flat(values):
        return CurveStats(median=values.astype(float), q25=values.astype(float), q75=values.astype(float))

    report.curves["ess"] = flat(trace.ess)
    report.curves["distinct_ancestors_from_1"] = flat(trace.distinct_ancestors_from_1)
    if trace.distinct_suffstats is not None:
        report.curves["distinct_suffstats"] = flat(trace.distinct_suffstats)
    if trace.path_functional is not None:
        report.curves["path_functional"] = flat(trace.path_functional)
        report.path_functional_var = np.zeros(trace.T)
    return report


def _run_indexed(args) -> RunResult:
    config, data, rep = args
    return run_replication(config, data, rep)


def run_experiment(
    config: ExperimentConfig,
    output_dir=None,
    workers: int = 1,
    base_dir: Optional[Path] = None,
) -> Path:
    """Run R seeded replications and write dataset, traces, and report.

    Returns the output directory.  Identical config and master seed produce
    byte-identical outputs for any worker count.
    """
    out = Path(output_dir) if output_dir is not None else None
    if out is None:
        if config.output_dir is None:
            raise ValidationError("no output directory: set config.output_dir or pass one")
        out = Path(config.output_dir)
        if base_dir is not None and not out.is_absolute():
            out = base_dir / out
    out.mkdir(parents=True, exist_ok=True)

    data = resolve_dataset(config, base_dir)
    if data.T < 1:
        raise ValidationError("experiment dataset must have at least one observation")
    write_dataset_csv(data, out / "dataset.csv")

    reps = list(range(config.R))
    if workers > 1 and config.R > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results: List[RunResult] = list(
                pool.map(_run_indexed, [(config, data, r) for r in reps])
            )
    else:
        results = [run_replication(config, data, r) for r in reps]

    mixture = config.is_mixture
    for rep, result in zip(reps, results):
        result.trace.validate(config.N)
        _write_trace_csv(out / f"trace_rep{rep:04d}.csv", rep, result, mixture)

    oracle = oracle_values(config, data) if config.baselines else {"oracle": None}
    if config.R >= 2:
        report = replication_report(results)
    else:
        report = _single_run_report(results[0])
    payload = _report_payload(config, data, report, oracle)
    (out / "report.json").write_text(
        json.dumps(payload, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )
    return out
