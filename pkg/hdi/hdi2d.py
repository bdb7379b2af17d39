# -*- coding: utf-8 -*-
"""
Interpolation harmonique de densité en 2D.

Autour d'un paramètre t, la densité φ est approchée par la trace d'une
fonction harmonique U = Re f(z), f(z) = Σ_j c_j (z − ζ(t))^j / j!, dont
les coefficients sont fixés par des conditions de Taylor en t :

  - type N : ∂^m (φ − P) = 0 en τ = t pour m = 0..M (P = Re f) ;
  - type S : ∂^m (φ − Q) = 0 en τ = t pour m = 0..M, avec
    Q = Im(∂τ f) / |ζ'(τ)| (dérivée normale de U) et c_0 = 0.

Par la formule de Faà di Bruno, ∂^m_τ f(ζ(τ)) = Σ_j c_j B_{m,j}, où B est la
matrice des polynômes de Bell partiels en (ζ', ζ'', ...). Tous les calculs
sont vectorisés sur le paramètre d'expansion t.
"""

from dataclasses import dataclass
from math import comb, factorial
from typing import Tuple

import numpy as np

from hdi.curves import CurveJet, ParametricCurve, curve_jet
from hdi.errors import ConfigError
from hdi.settings import MAX_HDI_ORDER_2D


@dataclass
class ComplexJet:
    """Jets au paramètre d'expansion : ζ^(k), φ^(k) et (1/|ζ'|)^(k)."""

    zeta: np.ndarray
    phi: np.ndarray
    inv_speed: np.ndarray

    @property
    def batch_shape(self) -> Tuple[int, ...]:
        return self.zeta.shape[1:]


@dataclass
class HdiCoeffs2D:
    """Coefficients c_0..c_J du développement autour de anchor = ζ(t)."""

    kind: str
    t: np.ndarray
    anchor: np.ndarray
    c: np.ndarray
    M: int


def _check_order(M: int):
    if M < 0 or M > MAX_HDI_ORDER_2D:
        raise ConfigError(f"Ordre d'interpolation M = {M} hors de [0, {MAX_HDI_ORDER_2D}]")


def inverse_speed_jets(zeta: np.ndarray, K: int) -> np.ndarray:
    """
    Dérivées d'ordre 0..K de 1/|ζ'| à partir de ζ', ..., ζ^(K+1).

    Récurrences de Leibniz sur s = |ζ'|², w² = s puis q w = 1.
    """
    s = np.zeros((K + 1,) + zeta.shape[1:])
    for k in range(K + 1):
        for j in range(k + 1):
            s[k] += comb(k, j) * np.real(zeta[j + 1] * np.conj(zeta[k - j + 1]))
    w = np.zeros_like(s)
    w[0] = np.sqrt(s[0])
    for k in range(1, K + 1):
        acc = s[k].copy()
        for j in range(1, k):
            acc -= comb(k, j) * w[j] * w[k - j]
        w[k] = acc / (2 * w[0])
    q = np.zeros_like(s)
    q[0] = 1.0 / w[0]
    for k in range(1, K + 1):
        acc = np.zeros_like(s[0])
        for j in range(k):
            acc += comb(k, j) * q[j] * w[k - j]
        q[k] = -acc / w[0]
    return q


def complex_jet(curve: ParametricCurve, t, phi_derivatives: np.ndarray, M: int) -> ComplexJet:
    """
    Assemble le jet nécessaire à l'ordre M (ζ jusqu'à M+1, au moins 2).

    Args:
        phi_derivatives: φ, φ', ..., φ^(M) de forme (M+1,) + t.shape
    """
    _check_order(M)
    K = max(M + 1, 2)
    jet = curve_jet(curve, t, K)
    return ComplexJet(zeta=jet.zeta, phi=np.asarray(phi_derivatives, dtype=float),
                      inv_speed=inverse_speed_jets(jet.zeta, M))


def bell_matrix(jet: ComplexJet, J: int) -> np.ndarray:
    """
    Matrice triangulaire inférieure B_{m,j} = 𝔹_{m,j}(ζ', ζ'', ...), 1 <= m, j <= J.

    Returns:
        tableau complexe de forme batch + (J, J)
    """
    zeta = jet.zeta
    if zeta.shape[0] < J + 1:
        raise ConfigError(f"Jet trop court pour une matrice de Bell d'ordre {J}")
    batch = zeta.shape[1:]
    table = [[np.zeros(batch, dtype=complex) for _ in range(J + 1)] for _ in range(J + 1)]
    table[0][0] = np.ones(batch, dtype=complex)
    for m in range(1, J + 1):
        for j in range(1, m + 1):
            acc = np.zeros(batch, dtype=complex)
            for i in range(1, m - j + 2):
                acc += comb(m - 1, i - 1) * zeta[i] * table[m - i][j - 1]
            table[m][j] = acc
    B = np.zeros(batch + (J, J), dtype=complex)
    for m in range(1, J + 1):
        for j in range(1, m + 1):
            B[..., m - 1, j - 1] = table[m][j]
    return B


def _forward_substitution(L: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Résout L x = rhs (L triangulaire inférieure), vectorisé sur le lot."""
    J = L.shape[-1]
    x = np.zeros(rhs.shape, dtype=complex)
    for m in range(J):
        acc = rhs[..., m] - np.einsum("...j,...j->...", L[..., m, :m], x[..., :m])
        x[..., m] = acc / L[..., m, m]
    return x


def coeffs_N(jet: ComplexJet, M: int, t=None, anchor=None) -> HdiCoeffs2D:
    """Coefficients de type N : c_0 = φ(t), B c = (φ', ..., φ^(M))."""
    _check_order(M)
    batch = jet.batch_shape
    c = np.zeros(batch + (M + 1,), dtype=complex)
    c[..., 0] = jet.phi[0]
    if M >= 1:
        B = bell_matrix(jet, M)
        rhs = np.moveaxis(jet.phi[1:M + 1], 0, -1).astype(complex)
        c[..., 1:] = _forward_substitution(B, rhs)
    return HdiCoeffs2D(kind="N", t=t, anchor=jet.zeta[0] if anchor is None else anchor, c=c, M=M)


def speed_matrix(jet: ComplexJet, J: int) -> np.ndarray:
    """A_{m,j} = C(m−1, j−1) (1/|ζ'|)^(m−j), issue de la règle de Leibniz."""
    batch = jet.batch_shape
    A = np.zeros(batch + (J, J))
    for m in range(1, J + 1):
        for j in range(1, m + 1):
            A[..., m - 1, j - 1] = comb(m - 1, j - 1) * jet.inv_speed[m - j]
    return A


def coeffs_S(jet: ComplexJet, M: int, t=None, anchor=None) -> HdiCoeffs2D:
    """Coefficients de type S : c_0 = 0, A B c = i (φ, φ', ..., φ^(M))."""
    _check_order(M)
    J = M + 1
    batch = jet.batch_shape
    A = speed_matrix(jet, J)
    B = bell_matrix(jet, J)
    rhs = 1j * np.moveaxis(jet.phi[:J], 0, -1)
    c = np.zeros(batch + (J + 1,), dtype=complex)
    c[..., 1:] = _forward_substitution(B, _forward_substitution(A, rhs))
    return HdiCoeffs2D(kind="S", t=t, anchor=jet.zeta[0] if anchor is None else anchor, c=c, M=M)


def _series(c: np.ndarray, d: np.ndarray, shift: int) -> np.ndarray:
    """Σ_{j>=shift} c_j d^(j−shift)/(j−shift)! ; c porte un axe de plus que d."""
    total = np.zeros(d.shape, dtype=complex)
    power = np.ones(d.shape, dtype=complex)
    for j in range(shift, c.shape[-1]):
        total += c[..., j] * power / factorial(j - shift)
        power = power * d
    return total


def traces_2d(coeffs: HdiCoeffs2D, jet_tau: CurveJet):
    """
    Traces de l'interpolant sur les points ζ(τ) d'un jet (ordre >= 1).

    Returns:
        (P, Q, f, ∂τ f) de forme batch + tau.shape
    """
    anchor = np.asarray(coeffs.anchor)
    extra = (np.newaxis,) * jet_tau.zeta[0].ndim
    d = jet_tau.zeta[0] - anchor[(...,) + extra]
    c = coeffs.c[(Ellipsis,) + extra + (slice(None),)]
    f = _series(c, d, 0)
    df = _series(c, d, 1) * jet_tau.zeta[1]
    P = np.real(f)
    Q = np.imag(df) / np.abs(jet_tau.zeta[1])
    return P, Q, f, df


def interpolant_value(coeffs: HdiCoeffs2D, z: np.ndarray) -> np.ndarray:
    """F(z) pour chaque développement (z de même forme que le lot)."""
    return _series(coeffs.c, np.asarray(z) - coeffs.anchor, 0)


def interpolant_gradient(coeffs: HdiCoeffs2D, z: np.ndarray) -> np.ndarray:
    """∇U = (Re F', −Im F') avec U = Re F ; forme lot + (2,)."""
    dF = _series(coeffs.c, np.asarray(z) - coeffs.anchor, 1)
    return np.stack([np.real(dF), -np.imag(dF)], axis=-1)


def diagonal_second_derivative(coeffs: HdiCoeffs2D, jet: ComplexJet) -> np.ndarray:
    """∂²τ (φ − P_N) en τ = t ; nul (aux arrondis près) dès que M >= 2."""
    value = np.zeros(jet.batch_shape, dtype=complex)
    if coeffs.c.shape[-1] > 1:
        value += coeffs.c[..., 1] * jet.zeta[2]
    if coeffs.c.shape[-1] > 2:
        value += coeffs.c[..., 2] * jet.zeta[1] ** 2
    phi2 = jet.phi[2] if jet.phi.shape[0] > 2 else 0.0
    return phi2 - np.real(value)
