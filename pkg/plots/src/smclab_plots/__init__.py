"""Figure rendering for smclab experiment outputs."""

from .figures import FIGURE_KINDS, FigureSpec, render, variance_trend_summary
from .io import Report, SchemaError, TraceTable, read_report_json, read_trace_csv

__version__ = "0.1.0"

__all__ = [
    "FIGURE_KINDS",
    "FigureSpec",
    "Report",
    "SchemaError",
    "TraceTable",
    "read_report_json",
    "read_trace_csv",
    "render",
    "variance_trend_summary",
]
