"""Static figure rendering for the triple-dot simulator's CSV output."""

__version__ = "0.1.0"

from .io import SchemaError, read_jump_sidecar, read_manifest, read_table
from .plots import (FIGURE_IDS, FigureSpec, analytic_between_detections,
                    plot_figure)

__all__ = [
    "FIGURE_IDS", "FigureSpec", "SchemaError",
    "analytic_between_detections", "plot_figure", "read_jump_sidecar",
    "read_manifest", "read_table",
]
