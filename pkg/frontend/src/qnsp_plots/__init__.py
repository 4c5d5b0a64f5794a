"""Figure rendering for ladder and diagnostics artifacts (CSV/JSON only)."""

from .frames import DiagnosticsFrame, LadderFrame, SchemaError
from .render import render_convergence, render_timeseries

__version__ = "0.1.0"
