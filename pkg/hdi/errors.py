# -*- coding: utf-8 -*-
"""
Exceptions et avertissements de la bibliothèque HDI.

Les erreurs de validation (configuration, noms inconnus) dérivent de
ConfigError ; les échecs numériques dérivent de NumericalError. La CLI
traduit les premières en code de sortie 1, toute autre HdiError en code 2.
"""

from typing import List, Optional, Sequence


class HdiError(Exception):
    """Classe de base de toutes les erreurs HDI."""


class ConfigError(HdiError, ValueError):
    """Configuration invalide ou nom absent d'un registre."""


class SpectralError(HdiError, ValueError):
    """Échantillons ou ordre de dérivation invalides."""


class NumericalError(HdiError):
    """Échec numérique (géométrie dégénérée, non-convergence...)."""


class RegularityError(NumericalError):
    """Vitesse |x'| ou élément de surface inférieur au seuil de régularité."""


class NearestPointError(NumericalError):
    """La recherche du point le plus proche n'a pas convergé."""

    def __init__(self, message: str, best_candidate=None):
        super().__init__(message)
        self.best_candidate = best_candidate


class AmbiguousIndicatorError(NumericalError):
    """Indicateur intérieur/extérieur trop proche de 1/2."""

    def __init__(self, message: str, value: Optional[float] = None):
        super().__init__(message)
        self.value = value


class ConvergenceError(NumericalError):
    """GMRES n'a pas atteint la tolérance demandée."""

    def __init__(self, message: str, residuals: Sequence[float] = ()):
        super().__init__(message)
        self.residuals: List[float] = list(residuals)


class AccuracyWarning(UserWarning):
    """Résultat calculé mais de précision dégradée (ex. M = 0 hypersingulier)."""


class NonUniqueFootPointWarning(UserWarning):
    """Plusieurs points du bord sont à égale distance de la cible."""
