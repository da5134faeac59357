"""Static figure rendering for metriclap experiment CSV outputs."""

from .render import FigureInfo, PlotSpec, build_figure, render

__version__ = "0.1.0"
