"""The four paper-style figures, rendered from emitted files only.

Every renderer is pure file-to-file: it reads trace CSVs and/or a report
JSON, draws, and writes a PNG.  Nothing here re-runs a simulation.  Every
figure puts the config digest in its title for provenance, and the PNG
metadata is pinned so identical inputs produce identical bytes.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import List, Sequence, Tuple

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
import numpy as np  # noqa: E402

from .io import Report, SchemaError, TraceTable, read_report_json, read_trace_csv

__all__ = ["FIGURE_KINDS", "FigureSpec", "render", "variance_trend_summary"]

FIGURE_KINDS = ("ess_trace", "ancestor_decay", "evidence_box", "pathvar_growth")

_PNG_METADATA = {"Software": "smclab-plots"}


@dataclass(frozen=True)
class FigureSpec:
    kind: str
    inputs: Tuple[str, ...]
    output: str

    def __post_init__(self):
        if self.kind not in FIGURE_KINDS:
            raise SchemaError(
                f"unknown figure kind {self.kind!r}; expected one of {', '.join(FIGURE_KINDS)}"
            )
        if not self.inputs:
            raise SchemaError("figure needs at least one input file")


def _split_inputs(paths: Sequence[str]) -> Tuple[List[TraceTable], List[Report]]:
    traces, reports = [], []
    for path in paths:
        if str(path).endswith(".json"):
            reports.append(read_report_json(path))
        else:
            traces.append(read_trace_csv(path))
    return traces, reports


def _digest(reports: Sequence[Report]) -> str:
    return reports[0].config_digest[:16] if reports else "unknown"


def _new_axes():
    fig, ax = plt.subplots(figsize=(7.0, 4.2), dpi=120)
    return fig, ax


def _save(fig, output):
    output = Path(output)
    output.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(output, metadata=_PNG_METADATA)
    plt.close(fig)


def _ess_trace(traces, reports, output):
    if not traces:
        raise SchemaError("ess_trace needs at least one trace CSV input")
    fig, ax = _new_axes()
    for table in traces:
        marker = "o" if table.t.size == 1 else None
        ax.plot(table.t, table.ess, alpha=0.6, linewidth=0.9, marker=marker,
                label=f"rep {table.rep[0]}")
    ax.set_xlabel("t")
    ax.set_ylabel("effective sample size")
    ax.set_title(f"ESS trace  [digest {_digest(reports)}]")
    if len(traces) <= 8:
        ax.legend(fontsize=7)
    _save(fig, output)


def _ancestor_decay(traces, reports, output):
    fig, ax = _new_axes()
    drew = False
    for table in traces:
        marker = "o" if table.t.size == 1 else None
        ax.plot(table.t, np.maximum(table.distinct_ancestors_from_1, 1), alpha=0.5,
                linewidth=0.8, marker=marker)
        drew = True
    for report in reports:
        curve = report.curves.get("distinct_ancestors_from_1")
        if curve is None:
            raise SchemaError(
                f"report JSON {report.path}: missing required key "
                "'curves.distinct_ancestors_from_1'"
            )
        t = np.asarray(report.curves["t"])
        ax.plot(t, np.maximum(curve["median"], 1), color="black", linewidth=1.6,
                label="median")
        ax.fill_between(t, np.maximum(curve["q25"], 1), np.maximum(curve["q75"], 1),
                        color="black", alpha=0.15, label="interquartile range")
        drew = True
    if not drew:
        raise SchemaError("ancestor_decay needs a trace CSV or report JSON input")
    ax.set_yscale("log")
    ax.set_xlabel("t")
    ax.set_ylabel("distinct time-1 ancestors")
    ax.set_title(f"Ancestral coalescence  [digest {_digest(reports)}]")
    ax.legend(fontsize=7)
    _save(fig, output)


def _evidence_box(traces, reports, output):
    if not reports:
        raise SchemaError("evidence_box needs at least one report JSON input")
    fig, ax = _new_axes()
    samples = [np.asarray(r.log_evidence["per_rep"], dtype=float) for r in reports]
    labels = [f"N={r.N}" if r.N is not None else r.config_digest[:8] for r in reports]
    ax.boxplot(samples, tick_labels=labels)
    for i, report in enumerate(reports):
        if report.oracle is not None:
            ax.hlines(report.oracle["value"], i + 0.75, i + 1.25,
                      colors="crimson", linestyles="--",
                      label="exact oracle" if i == 0 else None)
    ax.set_ylabel("log evidence across replications")
    ax.set_title(f"Evidence dispersion  [digest {_digest(reports)}]")
    handles, _ = ax.get_legend_handles_labels()
    if handles:
        ax.legend(fontsize=7)
    _save(fig, output)


def variance_trend_summary(report: Report) -> str:
    """Trend annotation for the path-functional variance curve.

    Computed from the report file alone: the variance ratio between the
    final time and the first quarter, and whether the curve is
    predominantly increasing.
    """
    curve = report.curves.get("path_functional")
    if curve is None or "var" not in curve:
        raise SchemaError(
            f"report JSON {report.path}: missing required key 'curves.path_functional.var'"
        )
    var = np.asarray(curve["var"], dtype=float)
    quarter = max(var.size // 4, 1) - 1
    ratio = var[-1] / var[quarter] if var[quarter] > 0 else np.inf
    rising = float(np.mean(np.diff(var) > 0)) if var.size > 1 else 0.0
    return f"var(T)/var(T/4) = {ratio:.2f}; rising steps: {100 * rising:.0f}%"


def _pathvar_growth(traces, reports, output):
    if not reports:
        raise SchemaError("pathvar_growth needs a report JSON input")
    report = reports[0]
    summary = variance_trend_summary(report)
    t = np.asarray(report.curves["t"])
    var = np.asarray(report.curves["path_functional"]["var"], dtype=float)
    fig, ax = _new_axes()
    ax.plot(t, var, linewidth=1.2, marker="o" if t.size == 1 else None)
    ax.set_xlabel("t")
    ax.set_ylabel("across-replication variance of the path functional")
    ax.set_title(f"Path-functional variance growth  [digest {_digest(reports)}]")
    ax.annotate(summary, xy=(0.02, 0.95), xycoords="axes fraction", fontsize=8,
                verticalalignment="top")
    if report.path_functional_target is not None:
        ax.annotate(
            f"exact target of the functional at T: {report.path_functional_target:.3f}",
            xy=(0.02, 0.88), xycoords="axes fraction", fontsize=8,
            verticalalignment="top",
        )
    _save(fig, output)


_RENDERERS = {
    "ess_trace": _ess_trace,
    "ancestor_decay": _ancestor_decay,
    "evidence_box": _evidence_box,
    "pathvar_growth": _pathvar_growth,
}


def render(figure: FigureSpec) -> Path:
    """Render one figure from harness output files; returns the PNG path."""
    traces, reports = _split_inputs(figure.inputs)
    _RENDERERS[figure.kind](traces, reports, figure.output)
    return Path(figure.output)
