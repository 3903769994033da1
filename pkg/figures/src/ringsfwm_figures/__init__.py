"""Presentation layer for ringsfwm CSV grid outputs."""

from .render import FigureJob, GridData, ParseError, load_grid, render

__all__ = ["FigureJob", "GridData", "ParseError", "load_grid", "render"]
__version__ = "0.1.0"
