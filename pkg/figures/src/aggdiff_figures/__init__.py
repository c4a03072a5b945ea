from .render import (DEGENERACY_BAND, KINDS, FigureSpec, build_figure,
                     read_snapshots, read_trajectory, render)

__all__ = ["DEGENERACY_BAND", "KINDS", "FigureSpec", "build_figure",
           "read_snapshots", "read_trajectory", "render"]
