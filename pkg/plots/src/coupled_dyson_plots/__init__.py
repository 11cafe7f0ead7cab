"""Figure rendering for coupled-dyson CSV/JSON artifacts."""

from .figures import RENDERERS, FigureSpec, render

__all__ = ["FigureSpec", "RENDERERS", "render"]
__version__ = "0.1.0"
