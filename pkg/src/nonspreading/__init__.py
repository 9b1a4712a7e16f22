"""Nonspreading wave packets in one dimension.

Construct packets Psi = f(x - d(t)) exp(i (phi1 x + phi0)) for a given
potential, then check them against an independent Crank-Nicolson
propagation.
"""

from importlib.metadata import PackageNotFoundError, version

try:
    __version__ = version("nonspreading")
except PackageNotFoundError:  # running from a source tree without install
    __version__ = "0.1.0"

from .core import Grid, UnitSystem, WaveFunction, make_grid

__all__ = ["Grid", "UnitSystem", "WaveFunction", "__version__", "make_grid"]
