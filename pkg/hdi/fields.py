# -*- coding: utf-8 -*-
"""
Champs analytiques utilisés comme densités et solutions manufacturées.

Chaque champ fournit sa valeur et, quand elle est connue, son gradient
(et sa hessienne en 3D). Les champs 2D peuvent dépendre du paramètre t de
la courbe (modes de Fourier).
"""

from typing import Callable, Dict, Optional, Sequence

import numpy as np

from hdi.errors import ConfigError


class Field:
    """Interface commune : value(X, t=None), gradient(X), hessian(X)."""

    harmonic = False

    def value(self, X: np.ndarray, t: Optional[np.ndarray] = None) -> np.ndarray:
        raise NotImplementedError

    def gradient(self, X: np.ndarray) -> np.ndarray:
        raise ConfigError(f"Gradient indisponible pour {type(self).__name__}")

    def hessian(self, X: np.ndarray) -> np.ndarray:
        raise ConfigError(f"Hessienne indisponible pour {type(self).__name__}")

    def normal_derivative(self, X: np.ndarray, normals: np.ndarray) -> np.ndarray:
        return np.sum(self.gradient(X) * normals, axis=-1)


class LogSources(Field):
    """u(x) = Σ_k log|x − x_k|, harmonique hors des sources (2D)."""

    harmonic = True

    def __init__(self, sources: Sequence[Sequence[float]] = ((-0.6, 1.0), (-1.2, 0.2),
                                                           (0.2, -1.1), (1.5, 0.2))):
        self.sources = np.asarray(sources, dtype=float)

    def value(self, X, t=None):
        X = np.asarray(X, dtype=float)
        return sum(np.log(np.linalg.norm(X - s, axis=-1)) for s in self.sources)

    def gradient(self, X):
        X = np.asarray(X, dtype=float)
        return sum((X - s) / np.sum((X - s) ** 2, axis=-1)[..., None] for s in self.sources)


class ExpSinRatio(Field):
    """φ(x) = exp(sin(x1 cos x2)) / |x − c| (densité lisse sur Γ si c ∉ Γ)."""

    def __init__(self, center: Sequence[float] = (1 / 3, 1 / 3)):
        self.center = np.asarray(center, dtype=float)

    def value(self, X, t=None):
        X = np.asarray(X, dtype=float)
        return np.exp(np.sin(X[..., 0] * np.cos(X[..., 1]))) / np.linalg.norm(X - self.center, axis=-1)


class ExpX2Sin(Field):
    """φ(x) = exp(x2 sin(x1 + 5)) / |x|."""

    def value(self, X, t=None):
        X = np.asarray(X, dtype=float)
        return np.exp(X[..., 1] * np.sin(X[..., 0] + 5)) / np.linalg.norm(X, axis=-1)


class FourierMode(Field):
    """φ(t) = cos(k t + phase), défini par le paramètre de la courbe."""

    def __init__(self, k: int = 1, phase: float = 0.0):
        self.k = k
        self.phase = phase

    def value(self, X, t=None):
        if t is None:
            raise ConfigError("fourier-mode : paramètre t requis")
        return np.cos(self.k * np.asarray(t) + self.phase)


class Constant(Field):
    def __init__(self, value: float = 1.0):
        self.constant = float(value)

    def value(self, X, t=None):
        X = np.asarray(X, dtype=float)
        return np.full(X.shape[:-1], self.constant)

    def gradient(self, X):
        return np.zeros_like(np.asarray(X, dtype=float))


class PointSources3D(Field):
    """u(x) = Σ_k q_k / |x − x_k|, harmonique hors des sources (3D)."""

    harmonic = True

    def __init__(self, sources: Sequence[Sequence[float]], charges: Optional[Sequence[float]] = None):
        self.sources = np.asarray(sources, dtype=float).reshape(-1, 3)
        self.charges = (np.ones(len(self.sources)) if charges is None
                        else np.asarray(charges, dtype=float))

    def value(self, X, t=None):
        X = np.asarray(X, dtype=float)
        return sum(q / np.linalg.norm(X - s, axis=-1) for s, q in zip(self.sources, self.charges))

    def gradient(self, X):
        X = np.asarray(X, dtype=float)
        out = np.zeros_like(X)
        for s, q in zip(self.sources, self.charges):
            r = X - s
            out -= q * r / np.linalg.norm(r, axis=-1)[..., None] ** 3
        return out

    def hessian(self, X):
        X = np.asarray(X, dtype=float)
        out = np.zeros(X.shape + (3,))
        for s, q in zip(self.sources, self.charges):
            r = X - s
            d = np.linalg.norm(r, axis=-1)[..., None, None]
            out += q * (3 * r[..., :, None] * r[..., None, :] / d ** 5 - np.eye(3) / d ** 3)
        return out


def point_source_pair(x0: Sequence[float] = (2.0, 2.0, 2.0)) -> PointSources3D:
    """u(x) = 1/|x − x0| − 1/|x + x0|."""
    x0 = np.asarray(x0, dtype=float)
    return PointSources3D([x0, -x0], [1.0, -1.0])


class ExpLinear3D(Field):
    """φ(x) = exp(a·x) (densité lisse non harmonique)."""

    def __init__(self, a: Sequence[float] = (0.3, -0.5, 0.7)):
        self.a = np.asarray(a, dtype=float)

    def value(self, X, t=None):
        return np.exp(np.asarray(X, dtype=float) @ self.a)

    def gradient(self, X):
        return self.value(X)[..., None] * self.a

    def hessian(self, X):
        return self.value(X)[..., None, None] * np.outer(self.a, self.a)


FIELD_REGISTRY: Dict[str, Callable[..., Field]] = {
    "log-sources": LogSources,
    "exp-sin-ratio": ExpSinRatio,
    "exp-x2-sin": ExpX2Sin,
    "fourier-mode": FourierMode,
    "constant": Constant,
    "point-sources": PointSources3D,
    "point-source-pair": point_source_pair,
    "exp-linear": ExpLinear3D,
}


def make_field(name: str, params: Optional[Dict] = None) -> Field:
    if name not in FIELD_REGISTRY:
        raise ConfigError(f"Champ inconnu '{name}' (disponibles : {', '.join(sorted(FIELD_REGISTRY))})")
    try:
        return FIELD_REGISTRY[name](**dict(params or {}))
    except TypeError as e:
        raise ConfigError(f"Paramètres invalides pour le champ '{name}' : {e}") from e
