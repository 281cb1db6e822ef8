"""Cubic NLS with an external potential: Jost solutions, scattering data,
the distorted Fourier transform, split-step dynamics and long-time
asymptotics."""

import importlib

__version__ = "0.1.0"

_SUBMODULES = ("potential", "jost", "scattering", "distorted", "dynamics", "asymptotics",
               "oracles", "io", "verify")


def __getattr__(name):
    # lazy, so `nlsv --threads` can set BLAS variables before numpy loads
    if name in _SUBMODULES:
        return importlib.import_module(f".{name}", __name__)
    raise AttributeError(f"module 'nlsv' has no attribute {name!r}")
