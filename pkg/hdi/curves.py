# -*- coding: utf-8 -*-
"""
Géométrie 2D : courbes fermées lisses paramétrées sur [0, 2π), jets de
dérivées, point le plus proche et test intérieur/extérieur.

Une courbe est représentée par ζ(t) = x1(t) + i x2(t) ; ses dérivées sont
calculées par des formules trigonométriques/rationnelles exactes pour les
courbes du registre, par interpolation trigonométrique pour les courbes
échantillonnées.
"""

import logging
import warnings
from dataclasses import dataclass, field
from math import comb
from pathlib import Path
from typing import Callable, Dict, Optional, Sequence, Union

import numpy as np

from hdi.errors import (ConfigError, NearestPointError, NonUniqueFootPointWarning,
                        RegularityError)
from hdi.settings import (MAX_PERIODIC_ORDER, NEAREST_MAX_ITER, NEAREST_SCAN_POINTS_2D,
                          NEAREST_TOL_2D, REGULARITY_TOL)
from hdi.spectral import PeriodicSamples, trig_interp_eval

logger = logging.getLogger(__name__)


class _TrigPolynomial:
    """Σ_m a_m cos(mt) + b_m sin(mt), dérivable à tout ordre."""

    def __init__(self, cos: Sequence[float] = (), sin: Sequence[float] = ()):
        size = max(len(cos), len(sin))
        self.a = np.zeros(size)
        self.b = np.zeros(size)
        self.a[:len(cos)] = cos
        self.b[:len(sin)] = sin

    def jets(self, t: np.ndarray, K: int) -> np.ndarray:
        out = np.zeros((K + 1,) + t.shape)
        for m in range(self.a.size):
            if self.a[m] == 0.0 and self.b[m] == 0.0:
                continue
            for k in range(K + 1):
                scale = float(m) ** k
                if scale == 0.0:
                    continue
                shift = k * np.pi / 2
                out[k] += scale * (self.a[m] * np.cos(m * t + shift)
                                   + self.b[m] * np.sin(m * t + shift))
        return out


class _RationalComponent:
    """Quotient p/q de deux polynômes trigonométriques (q > 0)."""

    def __init__(self, numerator: _TrigPolynomial, denominator: Optional[_TrigPolynomial] = None):
        self.numerator = numerator
        self.denominator = denominator

    def jets(self, t: np.ndarray, K: int) -> np.ndarray:
        p = self.numerator.jets(t, K)
        if self.denominator is None:
            return p
        q = self.denominator.jets(t, K)
        # Leibniz sur p = y q
        y = np.zeros_like(p)
        for k in range(K + 1):
            acc = p[k].copy()
            for j in range(k):
                acc -= comb(k, j) * y[j] * q[k - j]
            y[k] = acc / q[0]
        return y


class _SampledComponent:
    """Composante connue par échantillons équirépartis (interpolant trigonométrique)."""

    def __init__(self, values: np.ndarray):
        self.samples = PeriodicSamples(values)

    def jets(self, t: np.ndarray, K: int) -> np.ndarray:
        if K > MAX_PERIODIC_ORDER:
            raise RegularityError(f"Ordre {K} indisponible pour une courbe échantillonnée")
        flat = t.ravel()
        return np.stack([np.reshape(trig_interp_eval(self.samples, flat, k), t.shape)
                         for k in range(K + 1)])


@dataclass
class ParametricCurve:
    """Courbe fermée orientée dans le sens trigonométrique."""

    name: str
    x1: object
    x2: object
    center: complex = 0j
    angle: float = 0.0
    params: Dict = field(default_factory=dict)

    def derivatives(self, t, K: int) -> np.ndarray:
        """ζ, ζ', ..., ζ^(K) (complexes), de forme (K+1,) + t.shape."""
        t = np.asarray(t, dtype=float)
        zeta = np.exp(1j * self.angle) * (self.x1.jets(t, K) + 1j * self.x2.jets(t, K))
        zeta[0] += self.center
        return zeta

    def points(self, t) -> np.ndarray:
        z = self.derivatives(t, 0)[0]
        return np.stack([z.real, z.imag], axis=-1)


@dataclass
class CurveJet:
    """Jet de la courbe en t : ζ^(k)(t) pour k = 0..K."""

    t: np.ndarray
    zeta: np.ndarray

    @property
    def K(self) -> int:
        return self.zeta.shape[0] - 1

    def derivative(self, k: int) -> np.ndarray:
        z = self.zeta[k]
        return np.stack([z.real, z.imag], axis=-1)

    @property
    def points(self) -> np.ndarray:
        return self.derivative(0)

    @property
    def speed(self) -> np.ndarray:
        return np.abs(self.zeta[1])

    @property
    def normal(self) -> np.ndarray:
        d = self.zeta[1] / np.abs(self.zeta[1])
        return np.stack([d.imag, -d.real], axis=-1)


def curve_jet(curve: ParametricCurve, t, K: int) -> CurveJet:
    """Calcule le jet d'ordre K (K >= 1) et vérifie la régularité |x'| > 0."""
    t = np.asarray(t, dtype=float)
    zeta = curve.derivatives(t, max(K, 1))
    if np.any(np.abs(zeta[1]) < REGULARITY_TOL):
        raise RegularityError(f"Courbe '{curve.name}' non régulière (|x'| < {REGULARITY_TOL})")
    return CurveJet(t=t, zeta=zeta)


def _as_complex(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return x[..., 0] + 1j * x[..., 1]


def nearest_points_2d(curve: ParametricCurve, X, scan_points: int = NEAREST_SCAN_POINTS_2D,
                      tol: float = NEAREST_TOL_2D, max_iter: int = NEAREST_MAX_ITER) -> np.ndarray:
    """
    Paramètres t0 des points de Γ les plus proches des cibles X (forme (P, 2)).

    Balayage grossier puis Newton sur g(t) = (x(t) − x)·x'(t) = 0. Les
    égalités de distance (à 1e-12 près) sont résolues vers le plus petit t et
    signalées par NonUniqueFootPointWarning.
    """
    z = np.atleast_1d(_as_complex(X))
    h = 2 * np.pi / scan_points
    grid = h * np.arange(scan_points)
    coarse = curve.derivatives(grid, 0)[0]
    dist = np.abs(z[:, None] - coarse[None, :])
    best = np.argmin(dist, axis=1)
    dmin = dist[np.arange(z.size), best]

    ties = dist <= dmin[:, None] + 1e-12
    for p in np.flatnonzero(ties.sum(axis=1) > 1):
        idx = np.flatnonzero(ties[p])
        gaps = np.diff(np.concatenate([idx, [idx[0] + scan_points]]))
        if np.count_nonzero(gaps > 1) > 1 or idx.size == scan_points:
            warnings.warn(f"Point le plus proche non unique pour la cible ({z[p].real:.6g}, {z[p].imag:.6g})",
                          NonUniqueFootPointWarning, stacklevel=2)
            best[p] = idx[0]

    t = grid[best]
    active = np.ones(z.size, dtype=bool)
    for iteration in range(max_iter):
        zeta = curve.derivatives(t[active], 2)
        diff = zeta[0] - z[active]
        g = np.real(np.conj(diff) * zeta[1])
        gp = np.abs(zeta[1]) ** 2 + np.real(np.conj(diff) * zeta[2])
        gp = np.where(gp > 1e-14, gp, np.abs(zeta[1]) ** 2)
        step = np.clip(g / gp, -h, h)
        t[active] -= step
        done = np.abs(step) < tol
        idx = np.flatnonzero(active)
        active[idx[done]] = False
        if not active.any():
            logger.debug("Newton 2D convergé en %d itérations", iteration + 1)
            break
    else:
        p = np.flatnonzero(active)[0]
        raise NearestPointError(
            f"Newton sans convergence après {max_iter} itérations",
            best_candidate=(float(np.mod(t[p], 2 * np.pi)), float(dmin[p])),
        )

    final = np.abs(curve.derivatives(t, 0)[0] - z)
    t = np.where(final <= dmin + 1e-15, t, grid[best])
    return np.mod(t, 2 * np.pi)


def nearest_point_2d(curve: ParametricCurve, x, **kwargs) -> float:
    """Paramètre t0 du point de Γ le plus proche de x."""
    return float(nearest_points_2d(curve, np.reshape(np.asarray(x, dtype=float), (1, 2)),
                                   **kwargs)[0])


def inside_indicator_2d(curve: ParametricCurve, X, n_points: int = 2048) -> np.ndarray:
    """
    μ(x) ∈ {0, 1} : indice de la courbe autour de x (intégrale de Cauchy
    trapézoïdale) seuillé à 1/2 ; test de côté par la normale au pied quand
    l'indice n'est pas net.
    """
    z = np.atleast_1d(_as_complex(X))
    h = 2 * np.pi / n_points
    zeta = curve.derivatives(h * np.arange(n_points), 1)
    winding = np.real(h / (2j * np.pi) * np.sum(zeta[1][None, :] / (zeta[0][None, :] - z[:, None]),
                                               axis=1))
    mu = (winding > 0.5).astype(float)
    unclear = np.abs(winding - np.round(winding)) > 0.25
    if unclear.any():
        pts = np.stack([z[unclear].real, z[unclear].imag], axis=-1)
        t0 = nearest_points_2d(curve, pts)
        jet = curve_jet(curve, t0, 1)
        side = np.sum((pts - jet.points) * jet.normal, axis=-1)
        mu[unclear] = (side < 0).astype(float)
    return mu


def signed_area(curve: ParametricCurve, n_points: int = 1024) -> float:
    """Aire signée ½∮ x ∧ x' dt (positive pour une orientation directe)."""
    h = 2 * np.pi / n_points
    zeta = curve.derivatives(h * np.arange(n_points), 1)
    return float(0.5 * h * np.sum(np.imag(np.conj(zeta[0]) * zeta[1])))


def curve_length(curve: ParametricCurve, n_points: int = 1024) -> float:
    h = 2 * np.pi / n_points
    return float(h * np.sum(np.abs(curve.derivatives(h * np.arange(n_points), 1)[1])))


# --- Registre des courbes -------------------------------------------------

def _circle(radius: float = 1.0) -> Dict:
    return {"x1": _RationalComponent(_TrigPolynomial(cos=[0.0, radius])),
            "x2": _RationalComponent(_TrigPolynomial(sin=[0.0, radius]))}


def _ellipse(a: float = 1.0, b: float = 0.5) -> Dict:
    return {"x1": _RationalComponent(_TrigPolynomial(cos=[0.0, a])),
            "x2": _RationalComponent(_TrigPolynomial(sin=[0.0, b]))}


def _kite() -> Dict:
    return {"x1": _RationalComponent(_TrigPolynomial(cos=[-0.65, 1.0, 0.65])),
            "x2": _RationalComponent(_TrigPolynomial(sin=[0.0, 1.5]))}


def _pinched() -> Dict:
    # 1 + sin^6 t = 1 + (10 − 15 cos 2t + 6 cos 4t − cos 6t)/32
    denominator = _TrigPolynomial(cos=[1 + 10 / 32, 0, -15 / 32, 0, 6 / 32, 0, -1 / 32])
    return {"x1": _RationalComponent(_TrigPolynomial(cos=[0.0, 1.0])),
            "x2": _RationalComponent(_TrigPolynomial(sin=[0.0, 1.0]), denominator)}


def load_curve_samples(path: Union[str, Path]) -> np.ndarray:
    """Lit une table texte à deux colonnes (x1, x2) aux nœuds t_j = 2πj/m."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"Fichier d'échantillons introuvable : {path}")
    table = np.loadtxt(path, ndmin=2)
    if table.shape[1] != 2:
        raise ConfigError(f"{path} : deux colonnes attendues, {table.shape[1]} trouvées")
    return table


def _custom_samples(path: Optional[str] = None, samples: Optional[Sequence] = None) -> Dict:
    if samples is None:
        if path is None:
            raise ConfigError("custom-samples : 'path' ou 'samples' requis")
        samples = load_curve_samples(path)
    table = np.asarray(samples, dtype=float)
    if table.ndim != 2 or table.shape[1] != 2:
        raise ConfigError("custom-samples : tableau (m, 2) attendu")
    x, y = table[:, 0], table[:, 1]
    area = 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))
    if area < 0:
        # parcours inversé à partir du même premier nœud
        logger.warning("custom-samples : échantillons en sens horaire, ordre inversé")
        table = np.roll(table[::-1], 1, axis=0)
    return {"x1": _SampledComponent(table[:, 0]), "x2": _SampledComponent(table[:, 1])}


CURVE_REGISTRY: Dict[str, Callable[..., Dict]] = {
    "circle": _circle,
    "ellipse": _ellipse,
    "kite": _kite,
    "pinched": _pinched,
    "custom-samples": _custom_samples,
}


def make_curve(name: str, params: Optional[Dict] = None) -> ParametricCurve:
    """
    Construit une courbe du registre.

    Les paramètres communs `center` ([c1, c2]) et `angle` (rotation) placent
    la courbe ; les autres sont propres à chaque forme.
    """
    params = dict(params or {})
    if name not in CURVE_REGISTRY:
        raise ConfigError(f"Courbe inconnue '{name}' (disponibles : {', '.join(sorted(CURVE_REGISTRY))})")
    center = params.pop("center", (0.0, 0.0))
    angle = float(params.pop("angle", 0.0))
    try:
        components = CURVE_REGISTRY[name](**params)
    except TypeError as e:
        raise ConfigError(f"Paramètres invalides pour la courbe '{name}' : {e}") from e
    return ParametricCurve(name=name, center=complex(center[0], center[1]), angle=angle,
                           params=dict(params or {}), **components)
