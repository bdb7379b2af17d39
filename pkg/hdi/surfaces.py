# -*- coding: utf-8 -*-
"""
Géométrie 3D : surfaces fermées décrites par des carreaux non chevauchants
[−1, 1]² → R³, grilles de Chebyshev/Fejér, point le plus proche et
indicateur intérieur/extérieur.

Trois familles de carreaux :
  - flat       : face affine (parallélépipèdes) ;
  - spherical  : face de cube projetée sur la sphère puis transformée
                 linéairement (sphères, ellipsoïdes) ;
  - tabulated  : valeurs sur la grille, série de Chebyshev.
"""

import logging
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from hdi.errors import (AmbiguousIndicatorError, ConfigError, NearestPointError,
                        RegularityError)
from hdi.settings import NEAREST_MAX_ITER, NEAREST_TOL_3D, REGULARITY_TOL
from hdi.spectral import cheb_coefficients, cheb_grid, cheb_grid_diff, cheb_series_jet

logger = logging.getLogger(__name__)

JET_KEYS = ((0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2))

# Faces du cube : colonnes (u, v, w), w normale sortante, u × v = w
_E = np.eye(3)
CUBE_FACES = [
    np.column_stack([_E[0], _E[1], _E[2]]),
    np.column_stack([_E[1], _E[0], -_E[2]]),
    np.column_stack([_E[1], _E[2], _E[0]]),
    np.column_stack([_E[2], _E[1], -_E[0]]),
    np.column_stack([_E[2], _E[0], _E[1]]),
    np.column_stack([_E[0], _E[2], -_E[1]]),
]


@dataclass
class Patch:
    """Carreau paramétrique x(ξ1, ξ2) sur [−1, 1]²."""

    kind: str
    face: np.ndarray = field(default_factory=lambda: np.eye(3))
    linear: np.ndarray = field(default_factory=lambda: np.eye(3))
    center: np.ndarray = field(default_factory=lambda: np.zeros(3))
    grid_values: Optional[np.ndarray] = None
    coeffs: Optional[np.ndarray] = None
    swap: bool = False
    body: int = 0

    def derivatives(self, xi1, xi2) -> Dict[Tuple[int, int], np.ndarray]:
        """x et ses dérivées partielles jusqu'à l'ordre 2, forme ξ.shape + (3,)."""
        xi1 = np.asarray(xi1, dtype=float)
        xi2 = np.asarray(xi2, dtype=float)
        if self.swap:
            jet = self._raw_derivatives(xi2, xi1)
            return {(a, b): jet[(b, a)] for (a, b) in JET_KEYS}
        return self._raw_derivatives(xi1, xi2)

    def _raw_derivatives(self, xi1: np.ndarray, xi2: np.ndarray) -> Dict[Tuple[int, int], np.ndarray]:
        if self.kind == "tabulated":
            return cheb_series_jet(self.coeffs, xi1, xi2, order=2)
        xi = np.stack([xi1, xi2], axis=-1)
        v = np.stack([xi1, xi2, np.ones_like(xi1)], axis=-1) @ self.face.T
        cols = [self.face[:, 0], self.face[:, 1]]
        L = self.linear
        zero = np.zeros(xi1.shape + (3,))
        if self.kind == "flat":
            jet = {(0, 0): v, (1, 0): zero + cols[0], (0, 1): zero + cols[1],
                   (2, 0): zero, (1, 1): zero, (0, 2): zero}
        elif self.kind == "spherical":
            rho = np.linalg.norm(v, axis=-1)[..., None]
            first = [cols[a] / rho - v * xi[..., a:a + 1] / rho ** 3 for a in range(2)]

            def second(a: int, b: int) -> np.ndarray:
                term = (-cols[a] * xi[..., b:b + 1] - cols[b] * xi[..., a:a + 1]) / rho ** 3
                term = term + 3 * v * xi[..., a:a + 1] * xi[..., b:b + 1] / rho ** 5
                if a == b:
                    term = term - v / rho ** 3
                return term

            jet = {(0, 0): v / rho, (1, 0): first[0], (0, 1): first[1],
                   (2, 0): second(0, 0), (1, 1): second(0, 1), (0, 2): second(1, 1)}
        else:
            raise ConfigError(f"Type de carreau inconnu '{self.kind}'")
        out = {key: value @ L.T for key, value in jet.items()}
        out[(0, 0)] = out[(0, 0)] + self.center
        return out


@dataclass
class SurfaceJet:
    """Jet géométrique d'ordre 2 et dérivées de la normale."""

    x: np.ndarray
    d1: np.ndarray
    d2: np.ndarray
    d11: np.ndarray
    d12: np.ndarray
    d22: np.ndarray
    normal: np.ndarray
    element: np.ndarray
    dn1: np.ndarray
    dn2: np.ndarray


def _dot(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.sum(a * b, axis=-1)


def jet_from_derivatives(d: Dict[Tuple[int, int], np.ndarray]) -> SurfaceJet:
    """Construit le SurfaceJet (normale, élément, ∂n) à partir des dérivées de x."""
    d1, d2 = d[(1, 0)], d[(0, 1)]
    m = np.cross(d1, d2)
    element = np.linalg.norm(m, axis=-1)
    if np.any(element < REGULARITY_TOL):
        raise RegularityError(f"Élément de surface dégénéré (< {REGULARITY_TOL})")
    normal = m / element[..., None]
    dm1 = np.cross(d[(2, 0)], d2) + np.cross(d1, d[(1, 1)])
    dm2 = np.cross(d[(1, 1)], d2) + np.cross(d1, d[(0, 2)])
    dn1 = (dm1 - normal * _dot(normal, dm1)[..., None]) / element[..., None]
    dn2 = (dm2 - normal * _dot(normal, dm2)[..., None]) / element[..., None]
    return SurfaceJet(x=d[(0, 0)], d1=d1, d2=d2, d11=d[(2, 0)], d12=d[(1, 1)], d22=d[(0, 2)],
                      normal=normal, element=element, dn1=dn1, dn2=dn2)


def patch_jet(patch: Patch, xi) -> SurfaceJet:
    """Jet du carreau au(x) point(s) ξ (dernier axe de taille 2)."""
    xi = np.asarray(xi, dtype=float)
    return jet_from_derivatives(patch.derivatives(xi[..., 0], xi[..., 1]))


class PatchedSurface:
    """
    Surface (éventuellement multi-corps) discrétisée par une grille de
    Chebyshev n×n sur chaque carreau. Les nœuds sont numérotés carreau par
    carreau, puis (i, j) en ordre ligne.
    """

    def __init__(self, name: str, patches: List[Patch], n: int):
        if n < 2:
            raise ConfigError(f"Grille trop petite : n = {n}")
        self.name = name
        self.patches = patches
        self.n = n
        self.grid = cheb_grid(n)
        self._orient()
        self._build_grid()

    @property
    def n_patches(self) -> int:
        return len(self.patches)

    @property
    def n_bodies(self) -> int:
        return int(max(p.body for p in self.patches)) + 1

    @property
    def size(self) -> int:
        return self.n_patches * self.n ** 2

    def _grid_derivatives(self, patch: Patch) -> Dict[Tuple[int, int], np.ndarray]:
        nodes = self.grid.nodes
        if (patch.kind == "tabulated" and not patch.swap and patch.grid_values is not None
                and patch.grid_values.shape[0] == self.n):
            return {alpha: cheb_grid_diff(patch.grid_values, alpha) for alpha in JET_KEYS}
        xi1, xi2 = np.meshgrid(nodes, nodes, indexing="ij")
        return patch.derivatives(xi1, xi2)

    def _orient(self):
        """Test du centroïde : la normale au centre de chaque carreau doit sortir."""
        for body in range(self.n_bodies):
            members = [p for p in self.patches if p.body == body]
            centers = np.array([p.derivatives(0.0, 0.0)[(0, 0)] for p in members])
            centroid = centers.mean(axis=0)
            for p in members:
                jet = patch_jet(p, np.zeros(2))
                if _dot(jet.x - centroid, jet.normal) < 0:
                    p.swap = not p.swap
                    logger.debug("Carreau réorienté (corps %d)", body)

    def _build_grid(self):
        jets = [jet_from_derivatives(self._grid_derivatives(p)) for p in self.patches]
        self.jet = SurfaceJet(**{
            name: np.concatenate([getattr(j, name).reshape((self.n ** 2,) + getattr(j, name).shape[2:])
                                  for j in jets])
            for name in SurfaceJet.__dataclass_fields__
        })
        w = np.outer(self.grid.weights, self.grid.weights).ravel()
        self.weights = np.tile(w, self.n_patches) * self.jet.element
        self.patch_index = np.repeat(np.arange(self.n_patches), self.n ** 2)
        self.body = np.array([self.patches[p].body for p in self.patch_index])
        xi1, xi2 = np.meshgrid(self.grid.nodes, self.grid.nodes, indexing="ij")
        self.xi = np.tile(np.stack([xi1.ravel(), xi2.ravel()], axis=-1), (self.n_patches, 1))

    @property
    def points(self) -> np.ndarray:
        return self.jet.x

    @property
    def normals(self) -> np.ndarray:
        return self.jet.normal

    def patch_slice(self, p: int) -> slice:
        size = self.n ** 2
        return slice(p * size, (p + 1) * size)

    def body_mask(self, body: int) -> np.ndarray:
        return self.body == body

    def local_spacing(self, p: int) -> float:
        """Espacement caractéristique du carreau : sqrt(aire)/n."""
        return float(np.sqrt(self.weights[self.patch_slice(p)].sum()) / self.n)


def surface_area(surface: PatchedSurface) -> float:
    return float(surface.weights.sum())


def enclosed_volume(surface: PatchedSurface) -> float:
    """Volume par le théorème de Gauss : (1/3) ∮ x·n ds."""
    return float(np.sum(surface.weights * _dot(surface.points, surface.normals)) / 3)


def _newton_on_patch(patch: Patch, x: np.ndarray, xi: np.ndarray,
                     tol: float, max_iter: int) -> Tuple[np.ndarray, float, bool]:
    for _ in range(max_iter):
        d = patch.derivatives(xi[0], xi[1])
        r = d[(0, 0)] - x
        g = np.array([_dot(r, d[(1, 0)]), _dot(r, d[(0, 1)])])
        gram = np.array([[_dot(d[(1, 0)], d[(1, 0)]), _dot(d[(1, 0)], d[(0, 1)])],
                         [_dot(d[(1, 0)], d[(0, 1)]), _dot(d[(0, 1)], d[(0, 1)])]])
        hess = gram + np.array([[_dot(r, d[(2, 0)]), _dot(r, d[(1, 1)])],
                                [_dot(r, d[(1, 1)]), _dot(r, d[(0, 2)])]])
        if np.linalg.det(hess) <= 0 or np.trace(hess) <= 0:
            hess = gram
        step = np.linalg.solve(hess, g)
        new = np.clip(xi - step, -1.0, 1.0)
        moved = np.linalg.norm(new - xi)
        xi = new
        if moved < tol:
            dist = float(np.linalg.norm(patch.derivatives(xi[0], xi[1])[(0, 0)] - x))
            return xi, dist, True
    dist = float(np.linalg.norm(patch.derivatives(xi[0], xi[1])[(0, 0)] - x))
    return xi, dist, False


def nearest_point_3d(surface: PatchedSurface, x, tol: float = NEAREST_TOL_3D,
                     max_iter: int = NEAREST_MAX_ITER, max_candidates: int = 4) -> Tuple[int, np.ndarray]:
    """
    (indice de carreau, ξ0) du point de la surface le plus proche de x.

    Balayage des nœuds, puis Newton 2D sur ½|x(ξ) − x|² sur les carreaux
    candidats (bornage à [−1, 1]², relance sur les carreaux voisins via
    leurs propres candidats de grille).
    """
    x = np.asarray(x, dtype=float)
    dist = np.linalg.norm(surface.points - x, axis=-1)
    per_patch = dist.reshape(surface.n_patches, -1)
    best_node = per_patch.argmin(axis=1)
    best_dist = per_patch.min(axis=1)
    order = np.argsort(best_dist)
    dmin = best_dist[order[0]]
    spacing = surface.local_spacing(int(order[0]))
    candidates = [p for p in order[:max_candidates] if best_dist[p] <= 1.5 * dmin + 2 * spacing]

    best: Optional[Tuple[int, np.ndarray, float]] = None
    for p in candidates:
        start = surface.xi[surface.patch_slice(p)][best_node[p]]
        xi, d, ok = _newton_on_patch(surface.patches[p], x, start.copy(), tol, max_iter)
        if ok and (best is None or d < best[2]):
            best = (int(p), xi, d)
    if best is None:
        p = int(order[0])
        raise NearestPointError(
            "Newton 3D sans convergence",
            best_candidate=(p, surface.xi[surface.patch_slice(p)][best_node[p]].copy()),
        )
    return best[0], best[1]


def inside_indicator_3d(surface: PatchedSurface, X) -> np.ndarray:
    """
    μ(x) ∈ {0, 1} par l'intégrale de Gauss discrète
    ∮ (y − x)·n(y)/(4π|x − y|³) ds(y), seuillée à 1/2.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    r = surface.points[None, :, :] - X[:, None, :]
    dist = np.linalg.norm(r, axis=-1)
    value = np.sum(surface.weights * _dot(r, surface.normals[None]) / (4 * np.pi * dist ** 3), axis=1)
    ambiguous = (value > 0.25) & (value < 0.75)
    if ambiguous.any():
        k = int(np.flatnonzero(ambiguous)[0])
        raise AmbiguousIndicatorError(
            f"Indicateur ambigu ({value[k]:.3f}) en {X[k]} : raffiner la grille",
            value=float(value[k]),
        )
    return (value >= 0.5).astype(float)


# --- Registre des surfaces ------------------------------------------------

def _cube_patches(kind: str, linear: np.ndarray, center, body: int = 0) -> List[Patch]:
    return [Patch(kind=kind, face=face, linear=np.asarray(linear, dtype=float),
                  center=np.asarray(center, dtype=float), body=body) for face in CUBE_FACES]


def _sphere(radius: float = 1.0, center: Sequence[float] = (0.0, 0.0, 0.0)) -> List[Patch]:
    return _cube_patches("spherical", radius * np.eye(3), center)


def _ellipsoid(axes: Sequence[float] = (1.0, 0.75, 0.5),
               center: Sequence[float] = (0.0, 0.0, 0.0)) -> List[Patch]:
    return _cube_patches("spherical", np.diag(axes), center)


def _parallelepiped(sides: Sequence[float] = (2.0, 2.0, 2.0),
                    center: Sequence[float] = (0.0, 0.0, 0.0)) -> List[Patch]:
    return _cube_patches("flat", np.diag(np.asarray(sides, dtype=float) / 2), center)


def _two_spheres(radius: float = 1.0, gap: float = 0.05) -> List[Patch]:
    offset = radius + gap / 2
    return (_cube_patches("spherical", radius * np.eye(3), (-offset, 0.0, 0.0), body=0)
            + _cube_patches("spherical", radius * np.eye(3), (offset, 0.0, 0.0), body=1))


def load_tabulated_patches(path: Union[str, Path]) -> List[np.ndarray]:
    """
    Lit une table texte à 4 colonnes (carreau, x1, x2, x3) ; chaque carreau
    contient n² lignes aux nœuds de Chebyshev, ξ1 variant le plus lentement.
    """
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"Fichier de carreaux introuvable : {path}")
    table = np.loadtxt(path, ndmin=2)
    if table.shape[1] != 4:
        raise ConfigError(f"{path} : 4 colonnes attendues, {table.shape[1]} trouvées")
    grids = []
    for label in np.unique(table[:, 0]):
        rows = table[table[:, 0] == label, 1:]
        n = int(round(np.sqrt(rows.shape[0])))
        if n * n != rows.shape[0]:
            raise ConfigError(f"{path} : carreau {label:g} non carré ({rows.shape[0]} lignes)")
        grids.append(rows.reshape(n, n, 3))
    return grids


def _tabulated(path: Optional[str] = None, grids: Optional[Sequence] = None) -> List[Patch]:
    if grids is None:
        if path is None:
            raise ConfigError("tabulated : 'path' ou 'grids' requis")
        grids = load_tabulated_patches(path)
    patches = []
    for values in grids:
        values = np.asarray(values, dtype=float)
        patches.append(Patch(kind="tabulated", grid_values=values, coeffs=cheb_coefficients(values)))
    return patches


SURFACE_REGISTRY: Dict[str, Callable[..., List[Patch]]] = {
    "sphere": _sphere,
    "ellipsoid": _ellipsoid,
    "parallelepiped": _parallelepiped,
    "two-spheres": _two_spheres,
    "tabulated": _tabulated,
}


def make_surface(name: str, params: Optional[Dict] = None, n: int = 16) -> PatchedSurface:
    """Construit une surface du registre discrétisée sur une grille n×n par carreau."""
    if name not in SURFACE_REGISTRY:
        raise ConfigError(f"Surface inconnue '{name}' (disponibles : {', '.join(sorted(SURFACE_REGISTRY))})")
    try:
        patches = SURFACE_REGISTRY[name](**dict(params or {}))
    except TypeError as e:
        raise ConfigError(f"Paramètres invalides pour la surface '{name}' : {e}") from e
    return PatchedSurface(name, [replace(p) for p in patches], n)
