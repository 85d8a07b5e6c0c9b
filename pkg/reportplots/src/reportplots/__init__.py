"""Figure scripts over nullwave run directories.

Everything here is read-only over the documented CSV/JSON files; no
physics is recomputed and no simulation code is imported.
"""

from .figures import FIGURE_KINDS, FigureSpec, render
from .schema import SchemaError

__all__ = ["FIGURE_KINDS", "FigureSpec", "render", "SchemaError"]
