"""Figure scripts for the constrained-ES simulator's CSV outputs."""

from .csvio import FigureDataError, read_table
from .plots import plot_progress_rate, plot_stationary_delta, plot_trace

__version__ = "0.1.0"
