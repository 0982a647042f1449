"""Equivariant band operators over subshifts and torus rotations.

Submodules: :mod:`~specband.dynsys` (points, words, witnesses),
:mod:`~specband.opfamily` (families, windows, limit operators),
:mod:`~specband.spectral` (eigenvalues, pseudospectra, Floquet-Bloch),
:mod:`~specband.experiments` (model catalog and reports) and
:mod:`~specband.cli`.
"""

from . import dynsys, experiments, opfamily, spectral
from .errors import (ConfigError, IncompatibleSystemsError, ModeError, NumericalError, PrecisionError,
                     RangeError, ResourceError, SpecbandError)

__version__ = "0.1.0"

__all__ = ["dynsys", "opfamily", "spectral", "experiments", "SpecbandError", "RangeError", "ModeError",
           "IncompatibleSystemsError", "ConfigError", "NumericalError", "PrecisionError", "ResourceError"]
