from .render import FigureSpec, PanelSpec, RenderError, load_spec, render

__version__ = "0.1.0"
