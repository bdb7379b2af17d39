# -*- coding: utf-8 -*-
"""
Opérateurs intégraux de Laplace en 3D (G = 1/(4π|x − y|)) régularisés par
interpolation harmonique de densité, et potentiels de champ proche.

Chaque évaluation régularisée s'écrit, pour une cible x_i et un ancrage a_i,

    Σ_j w_j k(x_i, y_j) φ_j  +  g_i · b_i(φ)

où b_i est le second membre d'interpolation (valeurs et dérivées de φ en
a_i) et g_i = A_i^{-T} V_i regroupe le terme libre et les intégrales des
traces de l'interpolant. Cette forme linéaire constitue l'opérateur de
Nyström utilisé par GMRES.
"""

import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy.sparse.linalg import LinearOperator
from scipy.spatial import cKDTree

from hdi.errors import ConfigError
from hdi.hdi3d import (N_BASIS, DensityJet3D, HarmonicBasis, assemble_A, rhs_vector)
from hdi.settings import NEAR_THRESHOLD_3D, TARGET_CHUNK, parallel_map
from hdi.spectral import cheb_coefficients, cheb_grid_diff, cheb_series_jet
from hdi.surfaces import PatchedSurface, nearest_point_3d, patch_jet

logger = logging.getLogger(__name__)

# Taille maximale (nombre de nœuds) pour stocker la partie dense
ASSEMBLE_LIMIT = 5000


@dataclass(frozen=True)
class _Splitting:
    basis: str
    kernel: str
    subtracted: str
    other_kernel: str
    other_trace: str
    free: float
    free_trace: str


SPLITTINGS: Dict[str, _Splitting] = {
    # S = U_S/2 + K[U_S] + S[φ − ∂nU_S]
    "S": _Splitting("S", "G", "N", "dGdny", "D", 0.5, "D"),
    # K = −U_N/2 + K[φ − U_N] + S[∂nU_N]
    "K": _Splitting("N", "dGdny", "D", "G", "N", -0.5, "D"),
    # K′ = ∂nU_S/2 + N[U_S] + K′[φ − ∂nU_S]
    "K'": _Splitting("S", "dGdnx", "N", "d2G", "D", 0.5, "N"),
    # N = −∂nU_N/2 + N[φ − U_N] + K′[∂nU_N]
    "N": _Splitting("N", "d2G", "D", "dGdnx", "N", -0.5, "N"),
}

# Potentiels : le terme libre ±μ U(x) est ajouté à part
POTENTIALS: Dict[str, _Splitting] = {
    "S": _Splitting("S", "G", "N", "dGdny", "D", 1.0, "D"),
    "D": _Splitting("N", "dGdny", "D", "G", "N", -1.0, "D"),
}

_ALIASES = {"K′": "K'", "Kp": "K'", "Kprime": "K'"}


def _operator_name(kind: str) -> str:
    kind = _ALIASES.get(kind, kind)
    if kind not in SPLITTINGS:
        raise ConfigError(f"Opérateur inconnu '{kind}' (S, K, K', N)")
    return kind


def _kernel(name: str, r: np.ndarray, R: np.ndarray, nx: Optional[np.ndarray],
            ny: np.ndarray) -> np.ndarray:
    """Noyaux de Laplace pour r = x − y (forme (C, Ns, 3))."""
    if name == "G":
        return 1.0 / (4 * np.pi * R)
    if name == "dGdny":
        return np.sum(r * ny, axis=-1) / (4 * np.pi * R ** 3)
    if name == "dGdnx":
        return -np.sum(r * nx, axis=-1) / (4 * np.pi * R ** 3)
    if name == "d2G":
        rnx = np.sum(r * nx, axis=-1)
        rny = np.sum(r * ny, axis=-1)
        return np.sum(nx * ny, axis=-1) / (4 * np.pi * R ** 3) - 3 * rnx * rny / (4 * np.pi * R ** 5)
    raise ConfigError(f"Noyau inconnu '{name}'")


def _basis_trace(trace: str, r: np.ndarray, n: np.ndarray) -> np.ndarray:
    if trace == "D":
        return HarmonicBasis.values(r)
    return HarmonicBasis.normal_derivatives(r, n)


def _rows(split: _Splitting, x: np.ndarray, nx: Optional[np.ndarray], anchor: np.ndarray,
          free_vector: np.ndarray, src: np.ndarray, src_n: np.ndarray, src_w: np.ndarray,
          coincident: Optional[np.ndarray] = None) -> Tuple[np.ndarray, np.ndarray]:
    """
    Partie directe (C, Ns) et vecteurs V (C, 9) pour un bloc de cibles.

    coincident[c] est l'indice local de la source confondue avec la cible c
    (contribution nulle), ou −1.
    """
    r = x[:, None, :] - src[None, :, :]
    R = np.linalg.norm(r, axis=-1)
    rows = np.arange(x.shape[0])
    if coincident is not None:
        hit = coincident >= 0
        R[rows[hit], coincident[hit]] = 1.0
    nxb = None if nx is None else nx[:, None, :]
    k_phi = _kernel(split.kernel, r, R, nxb, src_n[None])
    k_other = _kernel(split.other_kernel, r, R, nxb, src_n[None])
    if coincident is not None:
        k_phi[rows[hit], coincident[hit]] = 0.0
        k_other[rows[hit], coincident[hit]] = 0.0

    ya = src[None, :, :] - anchor[:, None, :]
    sub = _basis_trace(split.subtracted, ya, src_n[None])
    other = _basis_trace(split.other_trace, ya, src_n[None])
    plain = k_phi * src_w
    V = (free_vector - np.einsum("cs,csl->cl", plain, sub)
         + np.einsum("cs,csl->cl", k_other * src_w, other))
    return plain, V


def _correction(A: np.ndarray, V: np.ndarray) -> np.ndarray:
    """g = A^{-T} V, de sorte que V·c = g·b pour A c = b."""
    return np.linalg.solve(np.swapaxes(A, -1, -2), V[..., None])[..., 0]


class SurfaceDensity:
    """Densité aux nœuds d'une surface ; jets sur la grille et hors grille."""

    def __init__(self, surface: PatchedSurface, values):
        values = np.asarray(values, dtype=float)
        if values.shape != (surface.size,):
            raise ConfigError(f"Densité de taille {values.shape} pour {surface.size} nœuds")
        self.surface = surface
        self.values = values
        self._grid_jet: Optional[DensityJet3D] = None
        self._coeffs: Dict[int, np.ndarray] = {}

    def _patch_grid(self, p: int) -> np.ndarray:
        n = self.surface.n
        return self.values[self.surface.patch_slice(p)].reshape(n, n)

    @property
    def grid_jet(self) -> DensityJet3D:
        if self._grid_jet is None:
            parts = {key: [] for key in ("phi", "d1", "d2", "d11", "d12", "d22")}
            alphas = {"phi": (0, 0), "d1": (1, 0), "d2": (0, 1),
                      "d11": (2, 0), "d12": (1, 1), "d22": (0, 2)}
            for p in range(self.surface.n_patches):
                grid = self._patch_grid(p)
                for key, alpha in alphas.items():
                    parts[key].append(cheb_grid_diff(grid, alpha).ravel())
            self._grid_jet = DensityJet3D(**{k: np.concatenate(v) for k, v in parts.items()})
        return self._grid_jet

    def jet_at(self, patches: np.ndarray, xi: np.ndarray) -> DensityJet3D:
        """Jets en des points (carreau, ξ) quelconques par série de Chebyshev."""
        out = {key: np.zeros(len(patches)) for key in ("phi", "d1", "d2", "d11", "d12", "d22")}
        names = {(0, 0): "phi", (1, 0): "d1", (0, 1): "d2", (2, 0): "d11", (1, 1): "d12", (0, 2): "d22"}
        for p in np.unique(patches):
            if p not in self._coeffs:
                self._coeffs[p] = cheb_coefficients(self._patch_grid(int(p)))
            mask = patches == p
            jet = cheb_series_jet(self._coeffs[p], xi[mask, 0], xi[mask, 1], order=2)
            for alpha, key in names.items():
                out[key][mask] = jet[alpha]
        return DensityJet3D(**out)


@dataclass
class _CrossCorrection:
    targets: np.ndarray
    patches: np.ndarray
    xi: np.ndarray
    g: np.ndarray


class NystromOperator3D:
    """
    Opérateur discret régularisé S, K, K′ ou N sur une surface à carreaux.

    Les interactions d'un corps avec lui-même utilisent les décompositions
    régularisées ancrées au nœud cible ; les corps voisins plus proches que
    le seuil sont intégrés avec la même décomposition ancrée au point le plus
    proche, sans terme libre (cible extérieure au corps voisin : μ = 0).
    """

    def __init__(self, surface: PatchedSurface, kind: str, assemble: Optional[bool] = None,
                 threshold: float = NEAR_THRESHOLD_3D):
        self.surface = surface
        self.kind = _operator_name(kind)
        self.split = SPLITTINGS[self.kind]
        self.threshold = threshold
        self.assembled = surface.size <= ASSEMBLE_LIMIT if assemble is None else assemble
        self.matrix: Optional[np.ndarray] = None
        self.g = np.zeros((surface.size, N_BASIS))
        self.cross: List[_CrossCorrection] = []
        self._build()

    @property
    def shape(self) -> Tuple[int, int]:
        return (self.surface.size, self.surface.size)

    def _chunks(self, indices: np.ndarray) -> List[np.ndarray]:
        return [c for c in np.array_split(indices, max(1, -(-indices.size // TARGET_CHUNK))) if c.size]

    def _self_chunk(self, idx: np.ndarray, body: int):
        surf = self.surface
        jet = surf.jet
        sources = np.flatnonzero(surf.body == body)
        position = np.full(surf.size, -1)
        position[sources] = np.arange(sources.size)
        free = np.zeros((idx.size, N_BASIS))
        if self.split.free_trace == "D":
            free[:, 0] = self.split.free
        else:
            free[:] = self.split.free * (jet.normal[idx] @ HarmonicBasis.GRAD0.T)
        plain, V = _rows(self.split, jet.x[idx], jet.normal[idx], jet.x[idx], free,
                         jet.x[sources], jet.normal[sources], surf.weights[sources],
                         coincident=position[idx])
        A = assemble_A(_select(jet, idx))
        return sources, plain, _correction(A, V)

    def _build(self):
        surf = self.surface
        if self.assembled:
            self.matrix = np.zeros(self.shape)
        for body in range(surf.n_bodies):
            targets = np.flatnonzero(surf.body == body)
            chunks = self._chunks(targets)
            results = parallel_map(lambda idx: self._self_chunk(idx, body), chunks)
            for idx, (sources, plain, g) in zip(chunks, results):
                self.g[idx] = g
                if self.assembled:
                    self.matrix[np.ix_(idx, sources)] = plain
            for other in range(surf.n_bodies):
                if other != body:
                    self._build_cross(targets, other)
        logger.debug("Opérateur %s construit (%d nœuds, %d corrections croisées)",
                     self.kind, surf.size, sum(c.targets.size for c in self.cross))

    def _near_feet(self, targets: np.ndarray, body: int):
        """Cibles proches du corps `body` et leurs pieds (carreau, ξ0)."""
        surf = self.surface
        sources = np.flatnonzero(surf.body == body)
        spacing = max(surf.local_spacing(p) for p in range(surf.n_patches) if surf.patches[p].body == body)
        dist, _ = cKDTree(surf.points[sources]).query(surf.points[targets])
        candidates = targets[dist < (self.threshold + 1) * spacing]
        near, patches, xis = [], [], []
        body_patches = [p for p in range(surf.n_patches) if surf.patches[p].body == body]
        sub = _SubSurface(surf, body_patches)
        for i in candidates:
            p_local, xi = nearest_point_3d(sub, surf.points[i])
            p = body_patches[p_local]
            foot = surf.patches[p].derivatives(xi[0], xi[1])[(0, 0)]
            if np.linalg.norm(surf.points[i] - foot) < self.threshold * surf.local_spacing(p):
                near.append(i)
                patches.append(p)
                xis.append(xi)
        return np.array(near, dtype=int), np.array(patches, dtype=int), np.array(xis).reshape(-1, 2)

    def _build_cross(self, targets: np.ndarray, body: int):
        surf = self.surface
        sources = np.flatnonzero(surf.body == body)
        near, patches, xis = self._near_feet(targets, body)
        if self.assembled:
            for idx in self._chunks(targets):
                r = surf.points[idx, None, :] - surf.points[None, sources, :]
                R = np.linalg.norm(r, axis=-1)
                k = _kernel(self.split.kernel, r, R, surf.normals[idx, None, :], surf.normals[None, sources])
                self.matrix[np.ix_(idx, sources)] = k * surf.weights[sources]
        if near.size == 0:
            return
        anchors = [patch_jet(surf.patches[p], xi) for p, xi in zip(patches, xis)]
        A = np.stack([assemble_A(a) for a in anchors])
        anchor_x = np.stack([a.x for a in anchors])
        # Cible hors du corps voisin : pas de terme libre
        _, V = _rows(self.split, surf.points[near], surf.normals[near], anchor_x,
                     np.zeros((near.size, N_BASIS)), surf.points[sources], surf.normals[sources], surf.weights[sources])
        self.cross.append(_CrossCorrection(targets=near, patches=patches, xi=xis, g=_correction(A, V)))

    def _plain_product(self, phi: np.ndarray) -> np.ndarray:
        """Partie directe recalculée par blocs (opérateur non stocké)."""
        surf = self.surface
        out = np.zeros(surf.size)
        for body in range(surf.n_bodies):
            targets = np.flatnonzero(surf.body == body)

            def block(idx):
                r = surf.points[idx, None, :] - surf.points[None, :, :]
                R = np.linalg.norm(r, axis=-1)
                R[np.arange(idx.size), idx] = 1.0
                k = _kernel(self.split.kernel, r, R, surf.normals[idx, None, :], surf.normals[None])
                k[np.arange(idx.size), idx] = 0.0
                return (k * surf.weights) @ phi

            chunks = self._chunks(targets)
            for idx, value in zip(chunks, parallel_map(block, chunks)):
                out[idx] = value
        return out

    def apply(self, phi) -> np.ndarray:
        phi = np.asarray(phi, dtype=float)
        density = SurfaceDensity(self.surface, phi)
        out = self.matrix @ phi if self.assembled else self._plain_product(phi)
        out = out + np.sum(self.g * rhs_vector(self.split.basis, density.grid_jet), axis=-1)
        for cross in self.cross:
            b = rhs_vector(self.split.basis, density.jet_at(cross.patches, cross.xi))
            out[cross.targets] += np.sum(cross.g * b, axis=-1)
        return out

    def as_linear_operator(self, shift: float = 0.0) -> LinearOperator:
        """LinearOperator de φ ↦ shift·φ + Aφ, consommable par GMRES."""
        return LinearOperator(self.shape, matvec=lambda v: shift * np.ravel(v) + self.apply(np.ravel(v)),
                              dtype=float)


class _SubSurface:
    """Vue d'un corps d'une surface multi-corps (pour le point le plus proche)."""

    def __init__(self, surface: PatchedSurface, patch_ids: List[int]):
        self.parent = surface
        self.patch_ids = patch_ids
        self.patches = [surface.patches[p] for p in patch_ids]
        self.n = surface.n
        mask = np.isin(surface.patch_index, patch_ids)
        self.points = surface.points[mask]
        self.xi = surface.xi[mask]
        self.weights = surface.weights[mask]

    @property
    def n_patches(self) -> int:
        return len(self.patch_ids)

    def patch_slice(self, p: int) -> slice:
        size = self.n ** 2
        return slice(p * size, (p + 1) * size)

    def local_spacing(self, p: int) -> float:
        return self.parent.local_spacing(self.patch_ids[p])


def _select(jet, idx: np.ndarray):
    return type(jet)(**{name: getattr(jet, name)[idx] for name in jet.__dataclass_fields__})


def eval_operator_3d(surface: PatchedSurface, density, kind: str) -> np.ndarray:
    """Applique l'opérateur régularisé `kind` (S, K, K′, N) à une densité nodale."""
    values = density.values if isinstance(density, SurfaceDensity) else density
    return NystromOperator3D(surface, kind).apply(values)


def eval_potential_near_3d(surface: PatchedSurface, density, kind: str, x,
                           threshold: float = NEAR_THRESHOLD_3D, regularize: bool = True):
    """
    Potentiel de simple (S) ou double (D) couche en des points hors de Γ :

        S[φ](x) = μ U_S(x) + Σ w {∂G/∂n_y U_S + G (φ − ∂nU_S)}
        D[φ](x) = −μ U_N(x) + Σ w {∂G/∂n_y (φ − U_N) + G ∂nU_N}

    l'interpolant étant ancré au point de Γ le plus proche ; μ vaut 1 si x
    est du côté intérieur de la normale au pied.
    """
    if kind not in POTENTIALS:
        raise ConfigError(f"Type de potentiel inconnu '{kind}' (S ou D)")
    split = POTENTIALS[kind]
    density = density if isinstance(density, SurfaceDensity) else SurfaceDensity(surface, density)
    single = np.ndim(x) == 1
    X = np.atleast_2d(np.asarray(x, dtype=float))
    surf = surface

    r = X[:, None, :] - surf.points[None]
    R = np.linalg.norm(r, axis=-1)
    values = np.sum(_kernel(split.kernel, r, R, None, surf.normals[None]) * surf.weights
                    * density.values, axis=1)
    if not regularize:
        return values[0] if single else values

    spacing = max(surf.local_spacing(p) for p in range(surf.n_patches))
    candidates = np.flatnonzero(R.min(axis=1) < (threshold + 1) * spacing)
    for i in candidates:
        p, xi = nearest_point_3d(surf, X[i])
        anchor = patch_jet(surf.patches[p], xi)
        dist = X[i] - anchor.x
        if np.linalg.norm(dist) >= threshold * surf.local_spacing(p):
            continue
        mu = 1.0 if np.dot(dist, anchor.normal) < 0 else 0.0
        free = split.free * mu * HarmonicBasis.values(dist)[None, :]
        plain, V = _rows(split, X[i:i + 1], None, anchor.x[None, :], free,
                         surf.points, surf.normals, surf.weights)
        g = _correction(assemble_A(anchor)[None], V)[0]
        b = rhs_vector(split.basis, density.jet_at(np.array([p]), xi[None, :]))[0]
        values[i] = plain[0] @ density.values + g @ b
    return values[0] if single else values
