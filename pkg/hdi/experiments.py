# -*- coding: utf-8 -*-
"""
Expériences reproductibles : chargement des configurations YAML, calcul
des tables de convergence et grilles d'erreur, écriture des CSV.

Chaque expérience renvoie un dictionnaire {chemin: DataFrame} ; les fichiers
ne sont écrits qu'une fois tous les calculs terminés, via un fichier
temporaire renommé atomiquement.
"""

import logging
import os
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd
import yaml
from scipy import stats

from hdi.curves import curve_jet, inside_indicator_2d, make_curve
from hdi.errors import ConfigError, NumericalError
from hdi.fields import Field, make_field
from hdi.hdi3d import assemble_A, coeffs_3d, density_jet_from_field, eval_U
from hdi.operators2d import (eval_adjoint_double_layer, eval_double_layer, eval_hypersingular,
                             eval_potential_near, eval_single_layer)
from hdi.operators3d import eval_operator_3d, eval_potential_near_3d
from hdi.settings import MAX_HDI_ORDER_2D, output_dir
from hdi.solver import (GmresConfig, dirichlet_potential_2d, exterior_field_3d,
                        solve_dirichlet_2d, solve_neumann_ext_3d)
from hdi.surfaces import make_surface, patch_jet

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.5e"


@dataclass
class ExperimentConfig:
    """Configuration validée d'une expérience."""

    experiment: str
    geometry: Dict = field(default_factory=lambda: {"name": "circle", "params": {}})
    density: Dict = field(default_factory=lambda: {"name": "exp-sin-ratio", "params": {}})
    orders: List = field(default_factory=lambda: [2])
    ladder: List[int] = field(default_factory=lambda: [40, 80, 160, 320])
    output: str = "results.csv"
    oversampling: int = 1
    near_threshold: Optional[float] = None
    seed: int = 0
    options: Dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, data: Dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"Clés de configuration inconnues : {', '.join(unknown)}")
        if "experiment" not in data:
            raise ConfigError("Clé 'experiment' manquante")
        config = cls(**data)
        config.validate()
        return config

    @classmethod
    def from_file(cls, path, overrides: Sequence[str] = (),
                  experiment: Optional[str] = None) -> "ExperimentConfig":
        data = _load_config(path)
        for item in overrides:
            apply_override(data, item)
        if experiment is not None:
            if data.get("experiment", experiment) != experiment:
                raise ConfigError(
                    f"La configuration décrit '{data['experiment']}', pas '{experiment}'"
                )
            data["experiment"] = experiment
        return cls.from_dict(data)

    def validate(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(
                f"Expérience inconnue '{self.experiment}' (disponibles : {', '.join(sorted(EXPERIMENTS))})"
            )
        ladder = [int(n) for n in self.ladder]
        if not ladder or any(b <= a for a, b in zip(ladder, ladder[1:])):
            raise ConfigError(f"L'échelle de raffinement doit être strictement croissante : {self.ladder}")
        self.ladder = ladder
        if int(self.oversampling) < 1:
            raise ConfigError(f"Suréchantillonnage invalide : {self.oversampling}")
        if not isinstance(self.geometry, dict) or "name" not in self.geometry:
            raise ConfigError("geometry doit contenir 'name'")
        if not isinstance(self.density, dict) or "name" not in self.density:
            raise ConfigError("density doit contenir 'name'")
        if self.experiment.endswith("-2d"):
            make_curve(self.geometry["name"], self.geometry.get("params"))
            for M in self.orders:
                if int(M) < 0 or int(M) > MAX_HDI_ORDER_2D:
                    raise ConfigError(f"Ordre M = {M} hors de [0, {MAX_HDI_ORDER_2D}]")
        make_field(self.density["name"], self.density.get("params"))

    def output_path(self) -> Path:
        path = Path(self.output)
        return path if path.is_absolute() else output_dir() / path

    def option(self, key: str, default=None):
        return self.options.get(key, default)


def _load_config(path) -> Dict:
    """Charge un fichier de configuration YAML."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"Fichier de configuration introuvable : {path}")
    with open(path, "r", encoding="utf-8") as f:
        data = yaml.safe_load(f) or {}
    if not isinstance(data, dict):
        raise ConfigError(f"{path} : un dictionnaire YAML est attendu")
    return data


def apply_override(data: Dict, item: str):
    """Applique `clé.sous_clé=valeur` (valeur interprétée en YAML)."""
    if "=" not in item:
        raise ConfigError(f"Surcharge invalide '{item}' (attendu clé=valeur)")
    key, raw = item.split("=", 1)
    parts = key.strip().split(".")
    target = data
    for part in parts[:-1]:
        target = target.setdefault(part, {})
        if not isinstance(target, dict):
            raise ConfigError(f"Surcharge invalide '{item}' : '{part}' n'est pas une section")
    target[parts[-1]] = yaml.safe_load(raw)


def fitted_orders(sizes: Sequence[float], errors: Sequence[float]) -> List[float]:
    """Ordres observés entre niveaux successifs (NaN pour le premier)."""
    orders = [np.nan]
    for (n0, e0), (n1, e1) in zip(zip(sizes, errors), zip(sizes[1:], errors[1:])):
        if e0 > 0 and e1 > 0:
            orders.append(float(np.log(e0 / e1) / np.log(n1 / n0)))
        else:
            orders.append(np.nan)
    return orders


def loglog_slope(x: Sequence[float], y: Sequence[float]) -> float:
    """Pente de la régression log-log (scipy.stats.linregress)."""
    return float(stats.linregress(np.log(x), np.log(y)).slope)


def _suffixed(path: Path, suffix: str) -> Path:
    return path.with_name(f"{path.stem}{suffix}{path.suffix}")


def _curve_density(field: Field, curve, n: int) -> np.ndarray:
    t = 2 * np.pi / n * np.arange(n)
    return np.asarray(field.value(curve.points(t), t), dtype=float)


# --- Expériences 2D --------------------------------------------------------------

OPERATORS_2D: Dict[str, Callable] = {
    "S": lambda curve, phi, M, beta: eval_single_layer(curve, phi, M, beta),
    "N": lambda curve, phi, M, beta: eval_hypersingular(curve, phi, M, beta),
    "K": lambda curve, phi, M, beta: eval_double_layer(curve, phi),
    "K'": lambda curve, phi, M, beta: eval_adjoint_double_layer(curve, phi),
}


def run_converge_2d(config: ExperimentConfig) -> Dict[Path, pd.DataFrame]:
    """Convergence d'un opérateur 2D contre un oracle sur grille raffinée."""
    curve = make_curve(config.geometry["name"], config.geometry.get("params"))
    field_ = make_field(config.density["name"], config.density.get("params"))
    operator = config.option("operator", "N")
    if operator not in OPERATORS_2D:
        raise ConfigError(f"Opérateur 2D inconnu '{operator}' ({', '.join(OPERATORS_2D)})")
    apply = OPERATORS_2D[operator]
    reference = config.option("reference", {}) or {}
    ref_points = int(reference.get("points", 1280))
    ref_order = int(reference.get("M", 5))
    for n in config.ladder:
        if ref_points % n:
            raise ConfigError(f"La grille de référence ({ref_points}) doit être multiple de {n}")

    print(f"📊 Référence : 2N = {ref_points}, M = {ref_order}")
    ref_values = apply(curve, _curve_density(field_, curve, ref_points), ref_order, 1)

    frames = {}
    orders = [int(M) for M in config.orders]
    for M in orders:
        errors = []
        for n in config.ladder:
            values = apply(curve, _curve_density(field_, curve, n), M, config.oversampling)
            errors.append(float(np.max(np.abs(values - ref_values[::ref_points // n]))))
            print(f"   M = {M}, 2N = {n:5d} : erreur {errors[-1]:.3e}")
        frame = pd.DataFrame({"N": config.ladder, "error_max": errors,
                              "fitted_order": fitted_orders(config.ladder, errors)})
        path = config.output_path()
        frames[path if len(orders) == 1 else _suffixed(path, f"_M{M}")] = frame
    return frames


def _interior_grid(curve, size: int) -> np.ndarray:
    boundary = curve.points(np.linspace(0, 2 * np.pi, 512, endpoint=False))
    lo, hi = boundary.min(axis=0), boundary.max(axis=0)
    x1, x2 = np.meshgrid(np.linspace(lo[0], hi[0], size), np.linspace(lo[1], hi[1], size))
    grid = np.stack([x1.ravel(), x2.ravel()], axis=-1)
    return grid[inside_indicator_2d(curve, grid) == 1.0]


def _boundary_layer(curve, offsets: Sequence[float], samples: int) -> np.ndarray:
    """Cibles x(t) − ε n(t) à l'intérieur, pour chaque distance ε de `offsets`."""
    jet = curve_jet(curve, 2 * np.pi / samples * np.arange(samples), 1)
    return np.concatenate([jet.points - float(eps) * jet.normal for eps in offsets])


def run_nearfield_2d(config: ExperimentConfig) -> Dict[Path, pd.DataFrame]:
    """Grilles d'erreur des potentiels S et D à l'intérieur de la courbe."""
    curve = make_curve(config.geometry["name"], config.geometry.get("params"))
    field_ = make_field(config.density["name"], config.density.get("params"))
    if not field_.harmonic:
        raise ConfigError("nearfield-2d exige un champ harmonique (ex. log-sources)")
    n = config.ladder[-1]
    kinds = config.option("kinds", ["S", "D"])
    solve_order = int(config.option("solve_order", 5))
    cfg = GmresConfig(tol=float(config.option("tol", 1e-12)), max_iterations=max(200, n))
    t = 2 * np.pi / n * np.arange(n)
    g = field_.value(curve.points(t))

    targets = _interior_grid(curve, int(config.option("grid", 60)))
    offsets = config.option("offsets", [])
    if offsets:
        if min(offsets) <= 0:
            raise ConfigError(f"Distances au bord strictement positives attendues : {offsets}")
        layer = _boundary_layer(curve, offsets, int(config.option("boundary_samples", 2 * n)))
        targets = np.concatenate([targets, layer])
    exact = field_.value(targets)
    exact_grad = field_.gradient(targets)
    print(f"📊 {targets.shape[0]} points d'évaluation intérieurs")

    rows = []
    frames = {}
    path = config.output_path()
    for kind in kinds:
        formulation = "second" if kind == "D" else "first"
        solution = solve_dirichlet_2d(curve, g, formulation, M=solve_order, cfg=cfg)
        for M in ["none"] + [int(m) for m in config.orders]:
            regularize = M != "none"
            values, grads = eval_potential_near(
                curve, solution.density, kind, targets, M=(0 if M == "none" else M),
                want_gradient=True, threshold=config.near_threshold, regularize=regularize)
            error = np.abs(values - exact)
            grad_error = np.linalg.norm(grads - exact_grad, axis=-1)
            rows.append({"kind": kind, "M": str(M), "error_max": float(error.max()),
                         "gradient_error_max": float(grad_error.max())})
            print(f"   {kind}, M = {M} : erreur max {error.max():.3e}")
            frames[_suffixed(path, f"_{kind}_M{M}_grid")] = pd.DataFrame({
                "x1": targets[:, 0], "x2": targets[:, 1],
                "log10_error": np.log10(np.maximum(error, 1e-17)),
            })
    frames[path] = pd.DataFrame(rows, columns=["kind", "M", "error_max", "gradient_error_max"])
    return frames


def run_solve_dirichlet_2d(config: ExperimentConfig) -> Dict[Path, pd.DataFrame]:
    """Densités de Dirichlet (première et seconde espèce) contre une référence raffinée."""
    curve = make_curve(config.geometry["name"], config.geometry.get("params"))
    field_ = make_field(config.density["name"], config.density.get("params"))
    kinds = config.option("kinds", ["second", "first"])
    M = int(config.orders[-1])
    ref_points = int(config.option("reference_points", 2 * config.ladder[-1]))
    checks = np.asarray(config.option("check_points", [[0.0, 0.0], [0.5, 0.1], [-0.5, -0.1]]),
                        dtype=float)
    exact = field_.value(checks)

    rows = []
    for kind in kinds:
        ref = solve_dirichlet_2d(curve, _curve_density(field_, curve, ref_points), kind, M=M)
        for n in config.ladder:
            if ref_points % n:
                raise ConfigError(f"La grille de référence ({ref_points}) doit être multiple de {n}")
            solution = solve_dirichlet_2d(curve, _curve_density(field_, curve, n), kind, M=M)
            density_error = np.max(np.abs(solution.density - ref.density[::ref_points // n]))
            potential = dirichlet_potential_2d(curve, solution, checks)
            rows.append({"N": n, "kind": kind, "iterations": solution.result.iterations,
                         "density_error_max": float(density_error),
                         "potential_error_max": float(np.max(np.abs(potential - exact)))})
            print(f"   {kind}, 2N = {n} : {solution.result.iterations} itérations, "
                  f"erreur densité {density_error:.3e}")
    return {config.output_path(): pd.DataFrame(rows)}


# --- Expériences 3D --------------------------------------------------------------

def _surface(config: ExperimentConfig, n: int):
    return make_surface(config.geometry["name"], config.geometry.get("params"), n)


def run_green_3d(config: ExperimentConfig) -> Dict[Path, pd.DataFrame]:
    """
    Identités de Green sur la surface pour u harmonique à l'intérieur :
    u/2 = S[∂nu] − K[u] et ∂nu/2 = K′[∂nu] − N[u].
    """
    field_ = make_field(config.density["name"], config.density.get("params"))
    sl_dl, adl_hs = [], []
    for n in config.ladder:
        surface = _surface(config, n)
        u = field_.value(surface.points)
        dnu = field_.normal_derivative(surface.points, surface.normals)
        first = eval_operator_3d(surface, dnu, "S") - eval_operator_3d(surface, u, "K") - u / 2
        second = eval_operator_3d(surface, dnu, "K'") - eval_operator_3d(surface, u, "N") - dnu / 2
        sl_dl.append(float(np.max(np.abs(first))))
        adl_hs.append(float(np.max(np.abs(second))))
        print(f"   n = {n:3d} : SL-DL {sl_dl[-1]:.3e}, ADL-HS {adl_hs[-1]:.3e}")
    if len(config.ladder) > 1:
        logger.info("Ordres ajustés : SL-DL %.2f, ADL-HS %.2f",
                    -loglog_slope(config.ladder, sl_dl), -loglog_slope(config.ladder, adl_hs))
    frame = pd.DataFrame({"n": config.ladder, "error_sl_dl": sl_dl,
                          "order_sl_dl": fitted_orders(config.ladder, sl_dl),
                          "error_adl_hs": adl_hs,
                          "order_adl_hs": fitted_orders(config.ladder, adl_hs)})
    return {config.output_path(): frame}


def run_solve_neumann_3d(config: ExperimentConfig) -> Dict[Path, pd.DataFrame]:
    """Problème de Neumann extérieur avec solution manufacturée (sources intérieures)."""
    field_ = make_field(config.density["name"], config.density.get("params"))
    gap_point = np.asarray(config.option("gap_point", [0.0, 0.0, 0.0]), dtype=float)
    cfg = GmresConfig(tol=float(config.option("tol", 1e-8)),
                      max_iterations=int(config.option("max_iterations", 100)))
    rows = []
    for n in config.ladder:
        surface = _surface(config, n)
        dnu = field_.normal_derivative(surface.points, surface.normals)
        solution = solve_neumann_ext_3d(surface, dnu, cfg)
        trace_error = np.max(np.abs(solution.trace - field_.value(surface.points)))
        exact = float(field_.value(gap_point))
        regularized = float(exterior_field_3d(surface, solution, gap_point))
        plain = float(exterior_field_3d(surface, solution, gap_point, regularize=False))
        rows.append({"n": n, "iterations": solution.result.iterations,
                     "trace_error_max": float(trace_error),
                     "gap_error_regularized": abs(regularized - exact),
                     "gap_error_plain": abs(plain - exact)})
        print(f"   n = {n} : {solution.result.iterations} itérations, erreur trace {trace_error:.3e}")
    return {config.output_path(): pd.DataFrame(rows)}


def run_interp_3d(config: ExperimentConfig) -> Dict[Path, pd.DataFrame]:
    """Identité du déterminant et ordres d'annulation des interpolants 3D."""
    field_ = make_field(config.density["name"], config.density.get("params"))
    n = config.ladder[-1]
    surfaces = config.option("surfaces", [{"name": "sphere"}, {"name": "ellipsoid"},
                                          {"name": "parallelepiped"}])
    det_rows = []
    for entry in surfaces:
        surface = make_surface(entry["name"], entry.get("params"), n)
        det = np.linalg.det(assemble_A(surface.jet))
        expected = -4 * surface.jet.element ** 5
        det_rows.append({"surface": entry["name"],
                         "det_rel_error": float(np.max(np.abs(det - expected) / np.abs(expected)))})

    surface = _surface(config, n)
    rng = np.random.default_rng(config.seed)
    deltas = float(config.option("delta", 0.02)) * 0.5 ** np.arange(int(config.option("levels", 6)))
    rows = []
    for point in range(int(config.option("points", 20))):
        p = int(rng.integers(surface.n_patches))
        xi = rng.uniform(-0.6, 0.6, size=2)
        angle = rng.uniform(0, 2 * np.pi)
        direction = np.array([np.cos(angle), np.sin(angle)])
        patch = surface.patches[p]
        jet = patch_jet(patch, xi)
        density = density_jet_from_field(jet, field_.value(jet.x), field_.gradient(jet.x),
                                         field_.hessian(jet.x))
        coeffs_n = coeffs_3d(jet, density, "N")
        coeffs_s = coeffs_3d(jet, density, "S")
        samples = {"phi_minus_UN": [], "dnUN": [], "US": [], "phi_minus_dnUS": []}
        for delta in deltas:
            moved = patch_jet(patch, xi + delta * direction)
            y, ny = moved.x[None], moved.normal[None]
            phi = field_.value(moved.x)
            UN, dnUN = eval_U(coeffs_n, y, ny)
            US, dnUS = eval_U(coeffs_s, y, ny)
            samples["phi_minus_UN"].append(abs(phi - UN[0]))
            samples["dnUN"].append(abs(dnUN[0]))
            samples["US"].append(abs(US[0]))
            samples["phi_minus_dnUS"].append(abs(phi - dnUS[0]))
        row = {"point": point, "patch": p, "xi1": xi[0], "xi2": xi[1]}
        row.update({f"slope_{key}": loglog_slope(deltas, values) for key, values in samples.items()})
        rows.append(row)
    path = config.output_path()
    return {path: pd.DataFrame(rows), _suffixed(path, "_det"): pd.DataFrame(det_rows)}


def run_identities(config: ExperimentConfig) -> Dict[Path, pd.DataFrame]:
    """Suite d'identités analytiques (2D et 3D)."""
    rows = []

    def record(check: str, value: float, expected: float, tolerance: float):
        error = abs(value - expected)
        rows.append({"check": check, "value": value, "expected": expected, "error": error,
                     "tolerance": tolerance, "passed": bool(error <= tolerance)})

    n2 = int(config.option("points_2d", 256))
    circle = make_curve("circle")
    kite = make_curve("kite")
    ones = np.ones(n2)
    for name, curve in (("circle", circle), ("kite", kite)):
        values = eval_double_layer(curve, ones)
        record(f"K[1] {name}", float(values[np.argmax(np.abs(values + 0.5))]), -0.5, 1e-10)
        values = eval_hypersingular(curve, ones, 4)
        record(f"N[1] {name}", float(values[np.argmax(np.abs(values))]), 0.0, 1e-10)

    for k in (1, 2):
        phi = _curve_density(make_field("fourier-mode", {"k": k}), circle, n2)
        lhs = eval_hypersingular(circle, eval_single_layer(circle, phi, 4), 4)
        rhs = -phi / 4 + eval_double_layer(circle, eval_double_layer(circle, phi))
        record(f"Calderon NS = -I/4 + K^2 circle, cos {k}t", float(np.max(np.abs(lhs - rhs))), 0.0, 1e-6)

    inside = np.array([[0.1, -0.2]])
    record("D[1] inside circle", float(eval_potential_near(circle, ones, "D", inside)[0]), -1.0, 1e-10)
    record("D[1] outside circle", float(eval_potential_near(circle, ones, "D", inside + 2.0)[0]),
           0.0, 1e-10)

    n3 = int(config.option("n_3d", 16))
    sphere = make_surface("sphere", {}, n3)
    ones3 = np.ones(sphere.size)
    values = eval_operator_3d(sphere, ones3, "K")
    record("K[1] sphere", float(values[np.argmax(np.abs(values + 0.5))]), -0.5, 2e-3)
    values = eval_operator_3d(sphere, ones3, "S")
    record("S[1] sphere (on surface)", float(values[np.argmax(np.abs(values - 1.0))]), 1.0, 1e-3)
    record("S[1] sphere (inside)", float(eval_potential_near_3d(sphere, ones3, "S", [0.0, 0.1, 0.3])),
           1.0, 5e-3)
    record("S[1] sphere (outside)", float(eval_potential_near_3d(sphere, ones3, "S", [0.0, 0.0, 2.0])),
           0.5, 1e-5)
    record("D[1] sphere (inside)", float(eval_potential_near_3d(sphere, ones3, "D", [0.2, 0.0, 0.0])),
           -1.0, 1e-5)
    record("D[1] sphere (outside)", float(eval_potential_near_3d(sphere, ones3, "D", [0.0, 3.0, 0.0])),
           0.0, 1e-5)

    frame = pd.DataFrame(rows)
    failed = frame.loc[~frame["passed"], "check"].tolist()
    for check in failed:
        print(f"⚠️  Identité non vérifiée : {check}")
    return {config.output_path(): frame}


EXPERIMENTS: Dict[str, Callable[[ExperimentConfig], Dict[Path, pd.DataFrame]]] = {
    "converge-2d": run_converge_2d,
    "nearfield-2d": run_nearfield_2d,
    "solve-dirichlet-2d": run_solve_dirichlet_2d,
    "green-3d": run_green_3d,
    "solve-neumann-3d": run_solve_neumann_3d,
    "interp-3d": run_interp_3d,
    "identities": run_identities,
}


def write_frames(frames: Dict[Path, pd.DataFrame]) -> List[Path]:
    """Écrit les CSV (6 chiffres significatifs) via fichier temporaire + renommage."""
    written = []
    staged = []
    try:
        for path, frame in frames.items():
            path.parent.mkdir(parents=True, exist_ok=True)
            tmp = path.with_name(f".{path.name}.tmp")
            frame.to_csv(tmp, index=False, float_format=FLOAT_FORMAT)
            staged.append((tmp, path))
        for tmp, path in staged:
            os.replace(tmp, path)
            written.append(path)
    finally:
        for tmp, _ in staged:
            if tmp.exists():
                tmp.unlink()
    return written


def run_experiment(config: ExperimentConfig) -> List[Path]:
    """Exécute l'expérience puis écrit ses artefacts CSV."""
    print(f"🚀 Expérience {config.experiment}")
    frames = EXPERIMENTS[config.experiment](config)
    written = write_frames(frames)
    for path in written:
        print(f"✅ {path}")
    if config.experiment == "identities":
        frame = next(iter(frames.values()))
        if not frame["passed"].all():
            raise NumericalError("Identités non vérifiées : " + ", ".join(frame.loc[~frame["passed"], "check"]))
    return written
