"""Desk-scale calculus for anisotropic Hormander-type function spaces.

Subpackages cover: function parameters (params), frequency weights (weights),
spectral fields and multiplier norms on periodic lattices (spectra),
interpolation with a function parameter (interp), parabolic problems and
compatibility conditions (parabolic), Cauchy-data trace and lifting operators
(traces), and the verification benchmarks plus CLI (bench, cli).
"""

from . import errors, params, weights, spectra, interp, parabolic, traces, bench

__all__ = ["errors", "params", "weights", "spectra", "interp", "parabolic", "traces", "bench"]

__version__ = "0.1.0"
