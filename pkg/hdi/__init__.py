# -*- coding: utf-8 -*-
"""
Interpolation harmonique de densité pour les opérateurs intégraux de
frontière du Laplacien en 2D et 3D.
"""

from hdi.errors import (AccuracyWarning, AmbiguousIndicatorError, ConfigError, ConvergenceError,
                        HdiError, NearestPointError, NonUniqueFootPointWarning, NumericalError,
                        RegularityError, SpectralError)

__version__ = "0.1.0"

__all__ = [
    "AccuracyWarning",
    "AmbiguousIndicatorError",
    "ConfigError",
    "ConvergenceError",
    "HdiError",
    "NearestPointError",
    "NonUniqueFootPointWarning",
    "NumericalError",
    "RegularityError",
    "SpectralError",
]
