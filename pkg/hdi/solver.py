# -*- coding: utf-8 -*-
"""
Solveurs de Nyström : GMRES sans préconditionnement (Arnoldi avec
Gram-Schmidt modifié et rotations de Givens, algorithme de Kelley) et
résolution des équations intégrales 2D et 3D.
"""

import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np
from scipy.linalg import solve_triangular
from scipy.sparse.linalg import LinearOperator, aslinearoperator

from hdi.curves import ParametricCurve, curve_jet
from hdi.errors import ConfigError, ConvergenceError
from hdi.operators2d import (adjoint_double_layer_matrix, double_layer_matrix,
                             eval_hypersingular, eval_potential_near, eval_single_layer)
from hdi.operators3d import NystromOperator3D, eval_operator_3d, eval_potential_near_3d
from hdi.surfaces import PatchedSurface

logger = logging.getLogger(__name__)


@dataclass
class GmresConfig:
    tol: float = 1e-8
    max_iterations: int = 200
    restart: Optional[int] = None


@dataclass
class GmresResult:
    x: np.ndarray
    iterations: int
    residuals: List[float] = field(default_factory=list)


def _givens(a: float, b: float):
    nu = np.hypot(a, b)
    return a / nu, -b / nu


def gmres(op, b, cfg: Optional[GmresConfig] = None) -> GmresResult:
    """
    Résout A x = b à partir de x0 = 0.

    Les résidus relatifs ‖b − A x_k‖/‖b‖ sont accumulés dans l'historique ;
    ConvergenceError (avec cet historique) si la tolérance n'est pas atteinte
    en cfg.max_iterations produits matrice-vecteur.
    """
    cfg = cfg or GmresConfig()
    A = aslinearoperator(op)
    b = np.asarray(b, dtype=float)
    n = b.size
    x = np.zeros(n)
    b_norm = np.linalg.norm(b)
    if b_norm == 0.0:
        return GmresResult(x=x, iterations=0, residuals=[0.0])

    m = min(cfg.restart or cfg.max_iterations, n, cfg.max_iterations)
    residuals: List[float] = []
    total = 0
    while total < cfg.max_iterations:
        r = b - A.matvec(x)
        r_norm = np.linalg.norm(r)
        if r_norm / b_norm < cfg.tol:
            residuals.append(r_norm / b_norm)
            return GmresResult(x=x, iterations=total, residuals=residuals)

        Q = np.zeros((n, m + 1))
        H = np.zeros((m + 1, m))
        c = np.zeros(m)
        s = np.zeros(m)
        g = np.zeros(m + 1)
        g[0] = r_norm
        Q[:, 0] = r / r_norm

        k = 0
        for k in range(m):
            v = A.matvec(Q[:, k])
            for j in range(k + 1):
                H[j, k] = np.dot(Q[:, j], v)
                v = v - H[j, k] * Q[:, j]
            H[k + 1, k] = np.linalg.norm(v)
            breakdown = H[k + 1, k] <= 1e-14 * b_norm
            if not breakdown:
                Q[:, k + 1] = v / H[k + 1, k]

            for j in range(k):
                temp = c[j] * H[j, k] - s[j] * H[j + 1, k]
                H[j + 1, k] = s[j] * H[j, k] + c[j] * H[j + 1, k]
                H[j, k] = temp
            c[k], s[k] = _givens(H[k, k], H[k + 1, k])
            H[k, k] = c[k] * H[k, k] - s[k] * H[k + 1, k]
            H[k + 1, k] = 0.0
            g[k + 1] = s[k] * g[k]
            g[k] = c[k] * g[k]

            total += 1
            residuals.append(abs(g[k + 1]) / b_norm)
            if residuals[-1] < cfg.tol or breakdown or total >= cfg.max_iterations:
                break

        y = solve_triangular(H[:k + 1, :k + 1], g[:k + 1])
        x = x + Q[:, :k + 1] @ y
        if residuals[-1] < cfg.tol or breakdown:
            logger.debug("GMRES convergé en %d itérations (résidu %.2e)", total, residuals[-1])
            return GmresResult(x=x, iterations=total, residuals=residuals)

    raise ConvergenceError(
        f"GMRES : tolérance {cfg.tol:g} non atteinte en {cfg.max_iterations} itérations "
        f"(résidu {residuals[-1]:.2e})",
        residuals=residuals,
    )


# --- 2D ----------------------------------------------------------------------

@dataclass
class DirichletSolution2D:
    kind: str
    density: np.ndarray
    result: GmresResult
    M: int


def solve_dirichlet_2d(curve: ParametricCurve, g, kind: str = "second", M: int = 4,
                       cfg: Optional[GmresConfig] = None) -> DirichletSolution2D:
    """
    Problème de Dirichlet intérieur de donnée g :

      - second : (−I/2 + K) φ = g, u = D[φ] ;
      - first  : S ψ = g (S régularisé d'ordre M), u = S[ψ].
    """
    g = np.asarray(g, dtype=float)
    n = g.size
    if kind == "second":
        matrix = double_layer_matrix(curve, n) - 0.5 * np.eye(n)
        op = aslinearoperator(matrix)
    elif kind == "first":
        op = LinearOperator((n, n), matvec=lambda v: eval_single_layer(curve, np.ravel(v), M),
                            dtype=float)
    else:
        raise ConfigError(f"Formulation inconnue '{kind}' (first ou second)")
    cfg = cfg or GmresConfig(max_iterations=max(200, n))
    result = gmres(op, g, cfg)
    logger.info("Dirichlet 2D (%s) : %d itérations", kind, result.iterations)
    return DirichletSolution2D(kind=kind, density=result.x, result=result, M=M)


def dirichlet_potential_2d(curve: ParametricCurve, solution: DirichletSolution2D, x,
                           regularize: bool = True) -> np.ndarray:
    """u(x) = D[φ](x) (seconde espèce) ou S[ψ](x) (première espèce)."""
    kind = "D" if solution.kind == "second" else "S"
    return eval_potential_near(curve, solution.density, kind, x, M=solution.M,
                               regularize=regularize)


@dataclass
class TransmissionSolution2D:
    charges: List[np.ndarray]
    result: GmresResult


def _normal_gradient(curve: ParametricCurve, density, kind: str, targets: np.ndarray,
                     normals: np.ndarray, M: int) -> np.ndarray:
    _, grad = eval_potential_near(curve, density, kind, targets, M=M, want_gradient=True)
    return np.sum(grad * normals, axis=-1)


def solve_transmission_2d(curves: Sequence[ParametricCurve], mu: float, v: Sequence, j: Sequence,
                          E=(1.0, 0.0), M: int = 4,
                          cfg: Optional[GmresConfig] = None) -> TransmissionSolution2D:
    """
    Densité de charge q de (I/2 − μK′) q = −μ N[v] − μ E·n + j sur Γ = ∪ Γ_k.

    Entre deux courbes distinctes, K′ et N sont les composantes normales des
    gradients des potentiels de simple et double couche, évalués avec la
    régularisation de champ proche.
    """
    if len(curves) != len(v) or len(curves) != len(j):
        raise ConfigError("Autant de données v et j que de courbes sont requises")
    v = [np.asarray(vk, dtype=float) for vk in v]
    j = [np.asarray(jk, dtype=float) for jk in j]
    sizes = [vk.size for vk in v]
    offsets = np.concatenate([[0], np.cumsum(sizes)])
    E = np.asarray(E, dtype=float)

    points, normals, adjoint = [], [], []
    for curve, size in zip(curves, sizes):
        jet = curve_jet(curve, 2 * np.pi / size * np.arange(size), 1)
        points.append(jet.points)
        normals.append(jet.normal)
        adjoint.append(adjoint_double_layer_matrix(curve, size))

    rhs = []
    for k, curve in enumerate(curves):
        hyper = eval_hypersingular(curve, v[k], M)
        for ell, other in enumerate(curves):
            if ell != k:
                hyper = hyper + _normal_gradient(other, v[ell], "D", points[k], normals[k], M)
        rhs.append(-mu * hyper - mu * normals[k] @ E + j[k])

    def matvec(q):
        q = np.ravel(q)
        parts = [q[offsets[k]:offsets[k + 1]] for k in range(len(curves))]
        out = []
        for k in range(len(curves)):
            kp = adjoint[k] @ parts[k]
            for ell, other in enumerate(curves):
                if ell != k:
                    kp = kp + _normal_gradient(other, parts[ell], "S", points[k], normals[k], M)
            out.append(0.5 * parts[k] - mu * kp)
        return np.concatenate(out)

    total = int(offsets[-1])
    op = LinearOperator((total, total), matvec=matvec, dtype=float)
    result = gmres(op, np.concatenate(rhs), cfg)
    logger.info("Transmission 2D : %d courbes, %d itérations", len(curves), result.iterations)
    charges = [result.x[offsets[k]:offsets[k + 1]] for k in range(len(curves))]
    return TransmissionSolution2D(charges=charges, result=result)


def electrostatic_potential_2d(curves: Sequence[ParametricCurve], v: Sequence,
                               solution: TransmissionSolution2D, x, E=(1.0, 0.0),
                               M: int = 4) -> np.ndarray:
    """Φ(x) = −D[v](x) + S[q](x) − E·x."""
    X = np.atleast_2d(np.asarray(x, dtype=float))
    phi = -X @ np.asarray(E, dtype=float)
    for curve, vk, qk in zip(curves, v, solution.charges):
        phi = phi - eval_potential_near(curve, vk, "D", X, M=M)
        phi = phi + eval_potential_near(curve, qk, "S", X, M=M)
    return phi[0] if np.ndim(x) == 1 else phi


# --- 3D ----------------------------------------------------------------------

@dataclass
class NeumannSolution3D:
    trace: np.ndarray
    neumann_data: np.ndarray
    result: GmresResult


def solve_neumann_ext_3d(surface: PatchedSurface, neumann_data,
                         cfg: Optional[GmresConfig] = None) -> NeumannSolution3D:
    """
    Trace v de la solution du problème de Neumann extérieur :
    (−I/2 + K) v = S[∂n u], opérateurs régularisés (corps voisins compris).
    """
    neumann_data = np.asarray(neumann_data, dtype=float)
    rhs = eval_operator_3d(surface, neumann_data, "S")
    op = NystromOperator3D(surface, "K").as_linear_operator(shift=-0.5)
    result = gmres(op, rhs, cfg)
    logger.info("Neumann extérieur 3D : %d nœuds, %d itérations", surface.size, result.iterations)
    return NeumannSolution3D(trace=result.x, neumann_data=neumann_data, result=result)


def exterior_field_3d(surface: PatchedSurface, solution: NeumannSolution3D, x,
                      regularize: bool = True) -> np.ndarray:
    """v(x) = D[v](x) − S[∂n u](x) hors de la surface."""
    return (eval_potential_near_3d(surface, solution.trace, "D", x, regularize=regularize)
            - eval_potential_near_3d(surface, solution.neumann_data, "S", x, regularize=regularize))
