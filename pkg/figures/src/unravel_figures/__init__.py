"""Figure renderers for the trajectory simulator's CSV outputs.

The renderers draw, they do not compute: every number plotted comes straight
from a delimited file produced by the simulator CLI.
"""

__version__ = "0.1.0"

from .io import EmptyInputError, FigureError, MissingColumnError, Table, read_table
from .render import (
    FIGURES,
    correlation_decay,
    entropy_vs_field,
    entropy_vs_size,
    entropy_vs_time,
    lambda_vs_field,
    nonhermitian_panels,
    phase_diagram,
    unraveling_comparison,
)
