# -*- coding: utf-8 -*-
"""
Noyau spectral : quadrature trapézoïdale et différentiation de Fourier sur
grilles périodiques, grilles de Chebyshev (zéros) avec poids de Fejér et
différentiation par FFT de l'extension paire en ϑ.
"""

from dataclasses import dataclass
from typing import Dict, Tuple, Union

import numpy as np
from numpy.polynomial import chebyshev
from scipy import fft as sfft
from scipy import signal

from hdi.errors import SpectralError
from hdi.settings import MAX_CHEB_ORDER, MAX_PERIODIC_ORDER

ArrayLike = Union[float, np.ndarray]


@dataclass(frozen=True)
class PeriodicSamples:
    """Échantillons d'une fonction 2π-périodique aux nœuds t_j = jπ/N."""

    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 1 or values.size < 4 or values.size % 2:
            raise SpectralError(
                f"Il faut un nombre pair d'échantillons >= 4 (reçu {values.size})"
            )
        if not np.all(np.isfinite(values)):
            raise SpectralError("Échantillons non finis")
        object.__setattr__(self, "values", values)

    @property
    def N(self) -> int:
        return self.values.size // 2

    @property
    def h(self) -> float:
        return np.pi / self.N

    @property
    def nodes(self) -> np.ndarray:
        return self.h * np.arange(self.values.size)

    def __len__(self) -> int:
        return self.values.size


@dataclass(frozen=True)
class ChebGrid:
    """Grille de Chebyshev ouverte (zéros de T_n) et poids de Fejér."""

    n: int
    nodes: np.ndarray
    weights: np.ndarray
    angles: np.ndarray


def _as_samples(samples) -> PeriodicSamples:
    if isinstance(samples, PeriodicSamples):
        return samples
    return PeriodicSamples(np.asarray(samples, dtype=float))


def trapezoid_sum(samples) -> float:
    """Règle des trapèzes h Σ f(t_j) sur [0, 2π)."""
    samples = _as_samples(samples)
    return float(samples.h * np.sum(samples.values))


def _wavenumbers(n: int, order: int) -> np.ndarray:
    """Multiplicateurs (ik)^order, mode de Nyquist annulé pour un ordre impair."""
    k = np.fft.fftfreq(n, d=1.0 / n)
    if order % 2 == 1:
        k[n // 2] = 0.0
    return (1j * k) ** order


def periodic_derivative(values: np.ndarray, order: int, axis: int = -1) -> np.ndarray:
    """Dérivée spectrale d'ordre `order` le long d'un axe (tableaux réels)."""
    if order == 0:
        return np.array(values, dtype=float, copy=True)
    values = np.asarray(values, dtype=float)
    n = values.shape[axis]
    shape = [1] * values.ndim
    shape[axis] = n
    multiplier = _wavenumbers(n, order).reshape(shape)
    return np.real(np.fft.ifft(multiplier * np.fft.fft(values, axis=axis), axis=axis))


def fourier_diff(samples, order: int, max_order: int = MAX_PERIODIC_ORDER) -> PeriodicSamples:
    """
    Dérivée d'ordre `order` de l'interpolant trigonométrique, aux nœuds.

    Returns:
        PeriodicSamples de la dérivée
    """
    samples = _as_samples(samples)
    if order < 0 or order > max_order:
        raise SpectralError(f"Ordre de dérivation {order} hors de [0, {max_order}]")
    return PeriodicSamples(periodic_derivative(samples.values, order))


def trig_interp_eval(samples, t: ArrayLike, order: int = 0) -> ArrayLike:
    """
    Évalue la dérivée d'ordre `order` de l'interpolant trigonométrique en t.

    Le mode de Nyquist est traité comme le mode réel cos(N t) : aux nœuds, le
    résultat coïncide avec fourier_diff.
    """
    samples = _as_samples(samples)
    if order < 0 or order > MAX_PERIODIC_ORDER:
        raise SpectralError(f"Ordre de dérivation {order} hors de [0, {MAX_PERIODIC_ORDER}]")
    n = len(samples)
    N = samples.N
    scalar = np.ndim(t) == 0
    t = np.atleast_1d(np.asarray(t, dtype=float))

    coeffs = np.fft.fft(samples.values) / n
    k = np.fft.fftfreq(n, d=1.0 / n)
    regular = np.arange(n) != N

    phase = np.exp(1j * np.multiply.outer(t, k[regular]))
    result = np.real(phase @ (coeffs[regular] * (1j * k[regular]) ** order))
    result += np.real(coeffs[N]) * N ** order * np.cos(N * t + order * np.pi / 2)
    return float(result[0]) if scalar else result


def trig_resample(samples, m: int) -> PeriodicSamples:
    """Valeurs du même interpolant trigonométrique sur une grille de m points."""
    samples = _as_samples(samples)
    if m == len(samples):
        return samples
    if m < len(samples) or m % 2:
        raise SpectralError(f"Suréchantillonnage invalide : {len(samples)} -> {m}")
    return PeriodicSamples(signal.resample(samples.values, m))


def cheb_grid(n: int) -> ChebGrid:
    """
    Nœuds t_j = cos ϑ_j, ϑ_j = (2j−1)π/(2n), et poids de Fejér (première règle).

    Les poids ω_j = (2/n)(1 − 2 Σ_l cos(2lϑ_j)/(4l²−1)) sont obtenus par une
    DCT-III.
    """
    if n < 1:
        raise SpectralError(f"Grille de Chebyshev vide (n = {n})")
    angles = (2 * np.arange(1, n + 1) - 1) * np.pi / (2 * n)
    series = np.zeros(n)
    series[0] = 1.0
    ell = np.arange(1, n // 2 + 1)
    ell = ell[2 * ell < n]
    series[2 * ell] = -1.0 / (4 * ell ** 2 - 1)
    weights = (2.0 / n) * sfft.dct(series, type=3)
    return ChebGrid(n=n, nodes=np.cos(angles), weights=weights, angles=angles)


def _cheb_first_derivative(values: np.ndarray, axis: int, angles: np.ndarray) -> np.ndarray:
    n = values.shape[axis]
    extended = np.concatenate([values, np.flip(values, axis=axis)], axis=axis)
    d_theta = np.take(periodic_derivative(extended, 1, axis=axis), np.arange(n), axis=axis)
    shape = [1] * values.ndim
    shape[axis] = n
    return -d_theta / np.sin(angles).reshape(shape)


def cheb_grid_diff(values: np.ndarray, alpha: Tuple[int, int],
                   max_order: int = MAX_CHEB_ORDER) -> np.ndarray:
    """
    Dérivée ∂^α d'une fonction tabulée sur la grille produit n×n.

    Les deux premiers axes portent ξ1 et ξ2 ; les axes suivants (composantes
    vectorielles) sont transportés tels quels.
    """
    values = np.asarray(values, dtype=float)
    a1, a2 = alpha
    if a1 < 0 or a2 < 0 or a1 + a2 > max_order:
        raise SpectralError(f"Ordre de dérivation {alpha} hors limites (max {max_order})")
    n = values.shape[0]
    if values.ndim < 2 or values.shape[1] != n:
        raise SpectralError("La grille doit être carrée n×n")
    if max(a1, a2) >= n:
        raise SpectralError(f"Grille trop petite (n = {n}) pour l'ordre {alpha}")
    angles = cheb_grid(n).angles
    result = values
    for _ in range(a1):
        result = _cheb_first_derivative(result, 0, angles)
    for _ in range(a2):
        result = _cheb_first_derivative(result, 1, angles)
    return np.array(result, copy=True)


def cheb_coefficients(values: np.ndarray) -> np.ndarray:
    """Coefficients a_kl de la série Σ a_kl T_k(ξ1) T_l(ξ2) interpolant la grille."""
    values = np.asarray(values, dtype=float)
    n = values.shape[0]
    coeffs = sfft.dct(sfft.dct(values, type=2, axis=0), type=2, axis=1) / n ** 2
    coeffs[0] /= 2
    coeffs[:, 0] /= 2
    return coeffs


def cheb_series_jet(coeffs: np.ndarray, xi1: ArrayLike, xi2: ArrayLike,
                    order: int = 2) -> Dict[Tuple[int, int], np.ndarray]:
    """
    Valeurs et dérivées (jusqu'à l'ordre total `order`) d'une série de
    Chebyshev 2D en des points arbitraires.

    Returns:
        {(α1, α2): tableau de forme xi.shape + composantes}
    """
    xi1 = np.asarray(xi1, dtype=float)
    xi2 = np.asarray(xi2, dtype=float)
    trailing = coeffs.ndim - 2
    jet = {}
    for a1 in range(order + 1):
        for a2 in range(order + 1 - a1):
            c = chebyshev.chebder(coeffs, m=a1, axis=0) if a1 else coeffs
            c = chebyshev.chebder(c, m=a2, axis=1) if a2 else c
            value = chebyshev.chebval2d(xi1, xi2, c)
            # chebval2d place les composantes en tête
            jet[(a1, a2)] = np.moveaxis(value, list(range(trailing)),
                                        list(range(-trailing, 0))) if trailing else value
    return jet
