"""Readers for the experiment runner's emitted files.

Two schemas, validated strictly with errors that name the offending
column or key:

* trace CSV: columns ``rep,t,ess,log_evidence_increment,
  distinct_ancestors_from_1,distinct_suffstats,path_functional`` with
  empty cells where a column does not apply;
* report JSON: ``config_digest``, ``R``, ``log_evidence`` (per_rep, mean,
  sd, se), ``curves`` (t plus median/q25/q75 per diagnostic), optional
  ``oracle``, ``path_functional_target``, ``N``, ``T``.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np

__all__ = ["SchemaError", "TraceTable", "Report", "read_trace_csv", "read_report_json"]

TRACE_COLUMNS = [
    "rep",
    "t",
    "ess",
    "log_evidence_increment",
    "distinct_ancestors_from_1",
    "distinct_suffstats",
    "path_functional",
]


class SchemaError(ValueError):
    """An input file does not match the documented harness schema."""


@dataclass
class TraceTable:
    path: Path
    rep: np.ndarray
    t: np.ndarray
    ess: np.ndarray
    log_evidence_increment: np.ndarray
    distinct_ancestors_from_1: np.ndarray
    distinct_suffstats: Optional[np.ndarray]
    path_functional: Optional[np.ndarray]


@dataclass
class Report:
    path: Path
    config_digest: str
    R: int
    log_evidence: dict
    curves: dict
    oracle: Optional[dict]
    N: Optional[int]
    T: Optional[int]
    path_functional_target: Optional[float]


def read_trace_csv(path) -> TraceTable:
    path = Path(path)
    with path.open("r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"trace CSV {path}: empty file") from None
        for column in TRACE_COLUMNS:
            if column not in header:
                raise SchemaError(f"trace CSV {path}: missing required column '{column}'")
        index = {name: header.index(name) for name in TRACE_COLUMNS}
        rows: Dict[str, List[str]] = {name: [] for name in TRACE_COLUMNS}
        for line in reader:
            if not line:
                continue
            for name in TRACE_COLUMNS:
                rows[name].append(line[index[name]])
    if not rows["t"]:
        raise SchemaError(f"trace CSV {path}: no data rows")

    def floats(name):
        try:
            return np.array([float(v) for v in rows[name]])
        except ValueError as err:
            raise SchemaError(f"trace CSV {path}: bad value in column '{name}' ({err})") from None

    def optional_floats(name):
        if all(v == "" for v in rows[name]):
            return None
        return floats(name)

    return TraceTable(
        path=path,
        rep=floats("rep").astype(int),
        t=floats("t").astype(int),
        ess=floats("ess"),
        log_evidence_increment=floats("log_evidence_increment"),
        distinct_ancestors_from_1=floats("distinct_ancestors_from_1").astype(int),
        distinct_suffstats=optional_floats("distinct_suffstats"),
        path_functional=optional_floats("path_functional"),
    )


def _require(mapping: dict, dotted: str, path: Path):
    node = mapping
    walked = []
    for key in dotted.split("."):
        walked.append(key)
        if not isinstance(node, dict) or key not in node:
            raise SchemaError(
                f"report JSON {path}: missing required key '{'.'.join(walked)}'"
            )
        node = node[key]
    return node


def read_report_json(path) -> Report:
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as err:
        raise SchemaError(f"report JSON {path}: invalid JSON ({err})") from None
    digest = _require(raw, "config_digest", path)
    R = _require(raw, "R", path)
    log_evidence = _require(raw, "log_evidence", path)
    for key in ("per_rep", "mean", "sd", "se"):
        _require(raw, f"log_evidence.{key}", path)
    curves = _require(raw, "curves", path)
    _require(raw, "curves.t", path)
    for name, curve in curves.items():
        if name == "t":
            continue
        for stat in ("median", "q25", "q75"):
            if stat not in curve:
                raise SchemaError(
                    f"report JSON {path}: missing required key 'curves.{name}.{stat}'"
                )
    return Report(
        path=path,
        config_digest=str(digest),
        R=int(R),
        log_evidence=log_evidence,
        curves=curves,
        oracle=raw.get("oracle"),
        N=raw.get("N"),
        T=raw.get("T"),
        path_functional_target=raw.get("path_functional_target"),
    )
