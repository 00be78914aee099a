"""Polynomial Brownian paths, Levy-area conditional moments, and high-order
discretization schemes for inhomogeneous geometric Brownian motion."""

__version__ = "0.1.0"

from . import brownian, harness, igbm, levy, orthopoly  # noqa: E402,F401
