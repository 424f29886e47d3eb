"""Figure rendering for specbatch result files (CSV/JSON in, images out)."""

from .figures import (
    render_acceptance,
    render_dynamic,
    render_heatmap,
    render_steptime,
    render_timeline,
    render_uniform,
    sweep_argmin,
)
from .io import SchemaError, load_fit, read_csv

__version__ = "0.1.0"

__all__ = [
    "SchemaError",
    "load_fit",
    "read_csv",
    "render_acceptance",
    "render_dynamic",
    "render_heatmap",
    "render_steptime",
    "render_timeline",
    "render_uniform",
    "sweep_argmin",
]
