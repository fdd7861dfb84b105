"""Eigenvalue counting in spectral gaps of radial Schroedinger operators on regular trees."""

from .model import (BandPointError, ConvergenceError, DomainError, GapSpectraError,
                    GapWindow, HALF_LINE, Interval, NearEigenvalueError,
                    NonAdmissibleError, Potential, ScaleParams, TreeParams,
                    make_scale, make_tree, make_window, multiplicity, window_of)

__version__ = "0.1.0"
