"""Figure rendering for splitbell CSV output: sweep curves and sector heatmaps."""

from .figures import FigureSpec, StyleOptions, plot_sectors, plot_sweep
from .io import SchemaError, load_exact, load_sectors, load_sweep

__all__ = [
    "FigureSpec",
    "StyleOptions",
    "SchemaError",
    "load_exact",
    "load_sectors",
    "load_sweep",
    "plot_sectors",
    "plot_sweep",
]

__version__ = "0.1.0"
