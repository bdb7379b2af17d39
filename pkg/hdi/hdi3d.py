# -*- coding: utf-8 -*-
"""
Interpolation harmonique de densité en 3D.

La densité est approchée près de x(ξ) par U(r) = Σ_j c_j H_j(r − x(ξ)),
combinaison des neuf polynômes harmoniques de degré <= 2 :

    1, x, y, z, xy, xz, yz, x² − y², x² − z².

Les neuf conditions portent sur la trace h = U∘x et sur la dérivée normale
h_n = ∇U·n et leurs dérivées tangentielles ; elles forment la matrice A
(det A = −4 |∂1x × ∂2x|^5, inversible sur toute surface régulière).
"""

from dataclasses import dataclass

import numpy as np

from hdi.errors import ConfigError
from hdi.surfaces import SurfaceJet

N_BASIS = 9


class HarmonicBasis:
    """Valeurs, gradients et hessiennes des polynômes H_0..H_8."""

    GRAD0 = np.zeros((N_BASIS, 3))
    GRAD0[1:4] = np.eye(3)

    HESSIANS = np.zeros((N_BASIS, 3, 3))
    HESSIANS[4, 0, 1] = HESSIANS[4, 1, 0] = 1.0
    HESSIANS[5, 0, 2] = HESSIANS[5, 2, 0] = 1.0
    HESSIANS[6, 1, 2] = HESSIANS[6, 2, 1] = 1.0
    HESSIANS[7] = np.diag([2.0, -2.0, 0.0])
    HESSIANS[8] = np.diag([2.0, 0.0, -2.0])

    @staticmethod
    def values(r: np.ndarray) -> np.ndarray:
        x, y, z = r[..., 0], r[..., 1], r[..., 2]
        return np.stack([np.ones_like(x), x, y, z, x * y, x * z, y * z,
                         x * x - y * y, x * x - z * z], axis=-1)

    @staticmethod
    def gradients(r: np.ndarray) -> np.ndarray:
        """Forme r.shape[:-1] + (9, 3)."""
        return HarmonicBasis.GRAD0 + np.einsum("jab,...b->...ja", HarmonicBasis.HESSIANS, r)

    @staticmethod
    def normal_derivatives(r: np.ndarray, n: np.ndarray) -> np.ndarray:
        """∇H_j(r)·n sans former le tableau des gradients."""
        x, y, z = r[..., 0], r[..., 1], r[..., 2]
        a, b, c = n[..., 0], n[..., 1], n[..., 2]
        zero = np.zeros(np.broadcast(x, a).shape)
        return np.stack([zero, zero + a, zero + b, zero + c, x * b + y * a, x * c + z * a,
                         y * c + z * b, 2 * (x * a - y * b), 2 * (x * a - z * c)], axis=-1)


@dataclass
class DensityJet3D:
    """φ et ses dérivées paramétriques jusqu'à l'ordre 2."""

    phi: np.ndarray
    d1: np.ndarray
    d2: np.ndarray
    d11: np.ndarray
    d12: np.ndarray
    d22: np.ndarray


@dataclass
class HdiCoeffs3D:
    kind: str
    anchor: np.ndarray
    c: np.ndarray


def assemble_A(jet: SurfaceJet) -> np.ndarray:
    """
    Matrice 9×9 des conditions d'interpolation (lignes h, ∂1h, ∂2h, h_n,
    ∂1h_n, ∂2h_n, ∂1²h, ∂1∂2h, ∂2²h évaluées en ξ' = ξ).
    """
    Hb = HarmonicBasis
    batch = jet.element.shape
    A = np.zeros(batch + (N_BASIS, N_BASIS))
    A[..., 0, 0] = 1.0
    A[..., 1, :] = jet.d1 @ Hb.GRAD0.T
    A[..., 2, :] = jet.d2 @ Hb.GRAD0.T
    A[..., 3, :] = jet.normal @ Hb.GRAD0.T
    A[..., 4, :] = np.einsum("jab,...b,...a->...j", Hb.HESSIANS, jet.d1, jet.normal) + jet.dn1 @ Hb.GRAD0.T
    A[..., 5, :] = np.einsum("jab,...b,...a->...j", Hb.HESSIANS, jet.d2, jet.normal) + jet.dn2 @ Hb.GRAD0.T
    A[..., 6, :] = np.einsum("jab,...a,...b->...j", Hb.HESSIANS, jet.d1, jet.d1) + jet.d11 @ Hb.GRAD0.T
    A[..., 7, :] = np.einsum("jab,...a,...b->...j", Hb.HESSIANS, jet.d1, jet.d2) + jet.d12 @ Hb.GRAD0.T
    A[..., 8, :] = np.einsum("jab,...a,...b->...j", Hb.HESSIANS, jet.d2, jet.d2) + jet.d22 @ Hb.GRAD0.T
    return A


def rhs_vector(kind: str, density: DensityJet3D) -> np.ndarray:
    """Second membre : S = (0,0,0, φ, ∂1φ, ∂2φ, 0,0,0), N = (φ, ∂1φ, ∂2φ, 0,0,0, ∂²φ)."""
    phi = np.asarray(density.phi, dtype=float)
    b = np.zeros(phi.shape + (N_BASIS,))
    if kind == "S":
        b[..., 3], b[..., 4], b[..., 5] = density.phi, density.d1, density.d2
    elif kind == "N":
        b[..., 0], b[..., 1], b[..., 2] = density.phi, density.d1, density.d2
        b[..., 6], b[..., 7], b[..., 8] = density.d11, density.d12, density.d22
    else:
        raise ConfigError(f"Type d'interpolation inconnu '{kind}' (S ou N)")
    return b


def coeffs_3d(jet: SurfaceJet, density: DensityJet3D, kind: str) -> HdiCoeffs3D:
    """Résout A c = b (pivot partiel LAPACK), vectorisé sur le lot."""
    A = assemble_A(jet)
    b = rhs_vector(kind, density)
    c = np.linalg.solve(A, b[..., None])[..., 0]
    return HdiCoeffs3D(kind=kind, anchor=jet.x, c=c)


def eval_U(coeffs: HdiCoeffs3D, y: np.ndarray, n_y: np.ndarray):
    """
    U(y) et ∂U/∂n(y) pour chaque développement du lot et chaque point y.

    Returns:
        (U, dnU) de forme batch + y.shape[:-1]
    """
    anchor = np.asarray(coeffs.anchor)
    extra = (np.newaxis,) * (np.ndim(y) - 1)
    r = np.asarray(y) - anchor[(Ellipsis,) + extra + (slice(None),)]
    c = coeffs.c[(Ellipsis,) + extra + (slice(None),)]
    U = np.sum(HarmonicBasis.values(r) * c, axis=-1)
    dnU = np.sum(HarmonicBasis.normal_derivatives(r, np.asarray(n_y)) * c, axis=-1)
    return U, dnU


def density_jet_from_field(jet: SurfaceJet, value, gradient, hessian) -> DensityJet3D:
    """Jet paramétrique de φ = F∘x par la règle de chaîne (F, ∇F, ∇²F donnés)."""
    gradient = np.asarray(gradient)
    hessian = np.asarray(hessian)

    def second(da, db, dab):
        return np.einsum("...a,...ab,...b->...", da, hessian, db) + np.sum(gradient * dab, axis=-1)

    return DensityJet3D(
        phi=np.asarray(value),
        d1=np.sum(gradient * jet.d1, axis=-1),
        d2=np.sum(gradient * jet.d2, axis=-1),
        d11=second(jet.d1, jet.d1, jet.d11),
        d12=second(jet.d1, jet.d2, jet.d12),
        d22=second(jet.d2, jet.d2, jet.d22),
    )
