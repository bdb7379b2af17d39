# -*- coding: utf-8 -*-
"""
Opérateurs intégraux de Laplace en 2D et potentiels de champ proche.

Les points sont manipulés en représentation complexe : pour deux vecteurs
u, v ∈ R², u·v = Re(u v̄). La normale extérieure est n = −i ζ'/|ζ'|.

Les noyaux faiblement singulier (S) et hypersingulier (N) sont régularisés
par interpolation harmonique de la densité autour de chaque cible ; K et K′
n'ont besoin que de leur limite diagonale (x''·n)/(4π|x'|²).
"""

import logging
import warnings
from typing import Callable, Dict, Optional, Tuple, Union

import numpy as np

from hdi.curves import ParametricCurve, curve_jet, nearest_points_2d
from hdi.errors import AccuracyWarning, ConfigError
from hdi.hdi2d import (coeffs_N, coeffs_S, complex_jet, diagonal_second_derivative,
                       interpolant_gradient, interpolant_value, traces_2d)
from hdi.settings import NEAR_THRESHOLD_2D, parallel_map
from hdi.spectral import PeriodicSamples, fourier_diff, trig_interp_eval, trig_resample

logger = logging.getLogger(__name__)

NEAR_CHUNK = 256


class Density2D:
    """Densité échantillonnée aux nœuds t_j = jπ/N, avec cache de dérivées."""

    def __init__(self, samples):
        self.samples = samples if isinstance(samples, PeriodicSamples) else PeriodicSamples(samples)
        self._cache: Dict[int, np.ndarray] = {0: self.samples.values}

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def values(self) -> np.ndarray:
        return self.samples.values

    @property
    def h(self) -> float:
        return self.samples.h

    @property
    def nodes(self) -> np.ndarray:
        return self.samples.nodes

    def derivatives(self, K: int) -> np.ndarray:
        """φ, φ', ..., φ^(K) aux nœuds, de forme (K+1, 2N)."""
        for k in range(K + 1):
            if k not in self._cache:
                self._cache[k] = fourier_diff(self.samples, k).values
        return np.stack([self._cache[k] for k in range(K + 1)])

    def derivatives_at(self, t: np.ndarray, K: int) -> np.ndarray:
        """φ^(k)(t) en des paramètres quelconques, de forme (K+1,) + t.shape."""
        return np.stack([trig_interp_eval(self.samples, t, k) for k in range(K + 1)])


def _as_density(density) -> Density2D:
    return density if isinstance(density, Density2D) else Density2D(density)


def _normal(zeta1: np.ndarray) -> np.ndarray:
    return -1j * zeta1 / np.abs(zeta1)


def _dot(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    return np.real(u * np.conj(v))


def _curvature_term(zeta1: np.ndarray, zeta2: np.ndarray) -> np.ndarray:
    """(x''·n)/(4π|x'|²), limite diagonale commune des noyaux K et K′."""
    return _dot(zeta2, _normal(zeta1)) / (4 * np.pi * np.abs(zeta1) ** 2)


class _Quadrature:
    """Nœuds de quadrature (éventuellement suréchantillonnés) et cibles."""

    def __init__(self, curve: ParametricCurve, density: Density2D, oversampling: int = 1):
        if oversampling < 1 or int(oversampling) != oversampling:
            raise ConfigError(f"Facteur de suréchantillonnage invalide : {oversampling}")
        self.beta = int(oversampling)
        self.n = len(density)
        self.nf = self.beta * self.n
        self.h = 2 * np.pi / self.nf
        self.tau = self.h * np.arange(self.nf)
        self.jet = curve_jet(curve, self.tau, 2)
        self.phi = trig_resample(density.samples, self.nf).values
        self.rows = np.arange(self.n)
        self.cols = self.beta * self.rows

    def pair_geometry(self, zeta_t: np.ndarray):
        """dz = ζ(t_i) − ζ(τ_k) et r² avec r² = 1 sur la diagonale (écrasée ensuite)."""
        dz = zeta_t[:, None] - self.jet.zeta[0][None, :]
        r2 = np.abs(dz) ** 2
        r2[self.rows, self.cols] = 1.0
        return dz, r2


def eval_single_layer(curve: ParametricCurve, density, M: int = 4,
                      oversampling: int = 1) -> np.ndarray:
    """
    S[φ] aux nœuds par la forme semi-discrète régularisée :

        S̃[φ](t_i) = P_S(t_i,t_i)/2 + h Σ_k (R^P + R^Q)(t_i, τ_k) |x'(τ_k)|

    avec R^P = (x_t − x_τ)·n_τ/(2π r²) P_S et R^Q = −log r/(2π) (φ − Q_S).
    """
    density = _as_density(density)
    quad = _Quadrature(curve, density, oversampling)
    t = density.nodes
    cj = complex_jet(curve, t, density.derivatives(max(M, 2)), M)
    coeffs = coeffs_S(cj, M, t=t)
    P, Q, _, _ = traces_2d(coeffs, quad.jet)

    dz, r2 = quad.pair_geometry(cj.zeta[0])
    n_tau = _normal(quad.jet.zeta[1])
    RP = _dot(dz, n_tau[None, :]) / (2 * np.pi * r2) * P
    RQ = -np.log(r2) / (4 * np.pi) * (quad.phi[None, :] - Q)

    P_diag = P[quad.rows, quad.cols]
    RP[quad.rows, quad.cols] = _curvature_term(cj.zeta[1], cj.zeta[2]) * P_diag
    RQ[quad.rows, quad.cols] = 0.0

    speed = np.abs(quad.jet.zeta[1])
    return P_diag / 2 + quad.h * np.sum((RP + RQ) * speed[None, :], axis=1)


def eval_hypersingular(curve: ParametricCurve, density, M: int = 4,
                       oversampling: int = 1) -> np.ndarray:
    """
    N[φ] aux nœuds :

        Ñ[φ](t_i) = −Q_N(t_i,t_i)/2 + h Σ_k (R^P + R^Q)(t_i, τ_k) |x'(τ_k)|

    Pour M = 0 l'intégrande diagonal est remplacé par zéro (précision
    dégradée, AccuracyWarning).
    """
    density = _as_density(density)
    quad = _Quadrature(curve, density, oversampling)
    t = density.nodes
    cj = complex_jet(curve, t, density.derivatives(max(M, 2)), M)
    coeffs = coeffs_N(cj, M, t=t)
    P, Q, _, _ = traces_2d(coeffs, quad.jet)

    dz, r2 = quad.pair_geometry(cj.zeta[0])
    n_t = _normal(cj.zeta[1])[:, None]
    n_tau = _normal(quad.jet.zeta[1])[None, :]
    dt = _dot(dz, n_t)
    kernel = _dot(n_t, n_tau) / (2 * np.pi * r2) - dt * _dot(dz, n_tau) / (np.pi * r2 ** 2)
    RP = kernel * (quad.phi[None, :] - P)
    RQ = -dt / (2 * np.pi * r2) * Q

    Q_diag = Q[quad.rows, quad.cols]
    if M == 0:
        warnings.warn("N avec M = 0 : diagonale remplacée par zéro, précision dégradée",
                      AccuracyWarning, stacklevel=2)
        RP[quad.rows, quad.cols] = 0.0
        RQ[quad.rows, quad.cols] = 0.0
    else:
        speed2 = np.abs(cj.zeta[1]) ** 2
        RP[quad.rows, quad.cols] = diagonal_second_derivative(coeffs, cj) / (4 * np.pi * speed2)
        RQ[quad.rows, quad.cols] = _curvature_term(cj.zeta[1], cj.zeta[2]) * Q_diag

    speed = np.abs(quad.jet.zeta[1])
    return -Q_diag / 2 + quad.h * np.sum((RP + RQ) * speed[None, :], axis=1)


def _plain_kernel_matrix(curve: ParametricCurve, n: int, adjoint: bool) -> np.ndarray:
    h = 2 * np.pi / n
    jet = curve_jet(curve, h * np.arange(n), 2)
    dz = jet.zeta[0][:, None] - jet.zeta[0][None, :]
    r2 = np.abs(dz) ** 2
    np.fill_diagonal(r2, 1.0)
    normal = _normal(jet.zeta[1])
    if adjoint:
        kernel = -_dot(dz, normal[:, None]) / (2 * np.pi * r2)
    else:
        kernel = _dot(dz, normal[None, :]) / (2 * np.pi * r2)
    np.fill_diagonal(kernel, _curvature_term(jet.zeta[1], jet.zeta[2]))
    return h * kernel * np.abs(jet.zeta[1])[None, :]


def double_layer_matrix(curve: ParametricCurve, n: int) -> np.ndarray:
    """Matrice de Nyström de K (trapèzes, noyau lisse)."""
    return _plain_kernel_matrix(curve, n, adjoint=False)


def adjoint_double_layer_matrix(curve: ParametricCurve, n: int) -> np.ndarray:
    """Matrice de Nyström de K′."""
    return _plain_kernel_matrix(curve, n, adjoint=True)


def eval_double_layer(curve: ParametricCurve, density) -> np.ndarray:
    density = _as_density(density)
    return double_layer_matrix(curve, len(density)) @ density.values


def eval_adjoint_double_layer(curve: ParametricCurve, density) -> np.ndarray:
    density = _as_density(density)
    return adjoint_double_layer_matrix(curve, len(density)) @ density.values


def assemble_matrix(apply: Callable[[np.ndarray], np.ndarray], n: int) -> np.ndarray:
    """Matrice dense d'un évaluateur linéaire (colonne par colonne, petits N)."""
    columns = [apply(np.eye(n)[:, k]) for k in range(n)]
    return np.stack(columns, axis=1)


def _plain_potential(kind: str, z: np.ndarray, zeta0, normal, weights, phi, want_gradient):
    dz = z[:, None] - zeta0[None, :]
    r2 = np.abs(dz) ** 2
    if kind == "S":
        value = -np.sum(np.log(r2) / (4 * np.pi) * phi * weights, axis=1)
        grad = -np.sum(dz / (2 * np.pi * r2) * phi * weights, axis=1) if want_gradient else None
    else:
        dn = _dot(dz, normal[None, :])
        value = np.sum(dn / (2 * np.pi * r2) * phi * weights, axis=1)
        grad = (np.sum((normal[None, :] / r2 - 2 * dn * dz / r2 ** 2) / (2 * np.pi)
                       * phi * weights, axis=1) if want_gradient else None)
    return value, grad


def _regularized_potential(curve, density: Density2D, kind: str, z: np.ndarray, M: int,
                           node_jet, weights, want_gradient):
    t0 = nearest_points_2d(curve, np.stack([z.real, z.imag], axis=-1))
    cj = complex_jet(curve, t0, density.derivatives_at(t0, max(M, 2)), M)
    coeffs = (coeffs_S if kind == "S" else coeffs_N)(cj, M, t=t0)
    P, Q, _, _ = traces_2d(coeffs, node_jet)
    U = np.real(interpolant_value(coeffs, z))

    foot_normal = _normal(cj.zeta[1])
    mu = (_dot(z - cj.zeta[0], foot_normal) < 0).astype(float)

    phi = density.values[None, :]
    normal = _normal(node_jet.zeta[1])[None, :]
    dz = z[:, None] - node_jet.zeta[0][None, :]
    r2 = np.abs(dz) ** 2
    dn = _dot(dz, normal)
    dl = dn / (2 * np.pi * r2)
    sl = -np.log(r2) / (4 * np.pi)
    if kind == "S":
        value = mu * U + np.sum((dl * P + sl * (phi - Q)) * weights, axis=1)
    else:
        value = -mu * U + np.sum((dl * (phi - P) + sl * Q) * weights, axis=1)
    if not want_gradient:
        return value, None

    grad_U = interpolant_gradient(coeffs, z)
    grad_U = grad_U[:, 0] + 1j * grad_U[:, 1]
    grad_dl = (normal / r2 - 2 * dn * dz / r2 ** 2) / (2 * np.pi)
    grad_sl = -dz / (2 * np.pi * r2)
    if kind == "S":
        grad = mu * grad_U + np.sum((grad_dl * P + grad_sl * (phi - Q)) * weights, axis=1)
    else:
        grad = -mu * grad_U + np.sum((grad_dl * (phi - P) + grad_sl * Q) * weights, axis=1)
    return value, grad


def eval_potential_near(curve: ParametricCurve, density, kind: str, x, M: int = 4,
                        want_gradient: bool = False, threshold: Optional[float] = None,
                        regularize: bool = True) -> Union[np.ndarray, Tuple[np.ndarray, np.ndarray]]:
    """
    Potentiel de simple (kind="S") ou double (kind="D") couche en des points
    hors de Γ.

    Les cibles à distance de Γ inférieure à threshold·h (threshold = 10 par
    défaut) sont traitées par l'identité de Green appliquée à l'interpolant
    harmonique ancré au pied t0 :

        S[φ](x) = μ U_S(x) + ∫ {∂G/∂n_y P_S + G (φ − Q_S)} ds
        D[φ](x) = −μ U_N(x) + ∫ {∂G/∂n_y (φ − P_N) + G Q_N} ds

    Returns:
        valeurs (et gradients de forme (P, 2) si want_gradient)
    """
    if kind not in ("S", "D"):
        raise ConfigError(f"Type de potentiel inconnu '{kind}' (S ou D)")
    density = _as_density(density)
    single = np.ndim(x) == 1
    X = np.atleast_2d(np.asarray(x, dtype=float))
    z = X[:, 0] + 1j * X[:, 1]
    h = density.h
    threshold = NEAR_THRESHOLD_2D if threshold is None else threshold

    node_jet = curve_jet(curve, density.nodes, 1)
    weights = (h * np.abs(node_jet.zeta[1]))[None, :]
    normal = _normal(node_jet.zeta[1])

    near = np.zeros(z.size, dtype=bool)
    if regularize:
        coarse = np.min(np.abs(z[:, None] - node_jet.zeta[0][None, :]), axis=1)
        candidates = np.flatnonzero(coarse < threshold * h + h * np.max(np.abs(node_jet.zeta[1])))
        if candidates.size:
            t0 = nearest_points_2d(curve, X[candidates])
            foot = curve.derivatives(t0, 0)[0]
            near[candidates[np.abs(z[candidates] - foot) < threshold * h]] = True
    logger.debug("Potentiel %s : %d cibles régularisées sur %d", kind, near.sum(), z.size)

    values = np.zeros(z.size)
    grads = np.zeros(z.size, dtype=complex)

    def run(indices: np.ndarray, regularized: bool):
        if regularized:
            return _regularized_potential(curve, density, kind, z[indices], M,
                                          node_jet, weights, want_gradient)
        return _plain_potential(kind, z[indices], node_jet.zeta[0], normal, weights,
                                density.values[None, :], want_gradient)

    jobs = []
    for flag in (False, True):
        idx = np.flatnonzero(near == flag)
        jobs += [(chunk, flag) for chunk in np.array_split(idx, max(1, -(-idx.size // NEAR_CHUNK)))
                 if chunk.size]
    results = parallel_map(lambda job: run(*job), jobs)
    for (idx, _), (value, grad) in zip(jobs, results):
        values[idx] = value
        if want_gradient:
            grads[idx] = grad

    if single:
        values = values[0]
    if not want_gradient:
        return values
    grad_array = np.stack([grads.real, grads.imag], axis=-1)
    return values, (grad_array[0] if single else grad_array)
