# -*- coding: utf-8 -*-
"""
Réglages globaux : constantes numériques et variables d'environnement.

Les variables d'environnement (HDI_THREADS, HDI_OUTPUT_DIR) sont lues une
seule fois depuis un éventuel fichier .env via python-dotenv.
"""

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Callable, Iterable, List, Optional, TypeVar

from dotenv import load_dotenv

load_dotenv()

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")

BASE_DIR = Path(__file__).parent.parent
CONFIG_DIR = BASE_DIR / "config"

# Ordres maximaux de dérivation spectrale
MAX_PERIODIC_ORDER = 8
MAX_CHEB_ORDER = 4
# Ordre maximal d'interpolation 2D (J = M + 1 <= 7 pour le noyau S)
MAX_HDI_ORDER_2D = 6

# Régularité géométrique
REGULARITY_TOL = 1e-10

# Point le plus proche
NEAREST_TOL_2D = 1e-12
NEAREST_TOL_3D = 1e-10
NEAREST_MAX_ITER = 50
NEAREST_SCAN_POINTS_2D = 512

# Seuils de champ proche (en unités de h en 2D, d'espacement local en 3D)
NEAR_THRESHOLD_2D = 10.0
NEAR_THRESHOLD_3D = 5.0

# Taille des blocs de cibles pour les boucles 3D
TARGET_CHUNK = 32


def max_workers() -> int:
    """Nombre de threads autorisés (HDI_THREADS, sinon nombre de CPU)."""
    raw = os.getenv("HDI_THREADS")
    if raw:
        try:
            value = int(raw)
            if value >= 1:
                return value
        except ValueError:
            pass
        logger.warning("HDI_THREADS invalide (%r), valeur par défaut utilisée", raw)
    return os.cpu_count() or 1


def output_dir() -> Path:
    """Répertoire par défaut des artefacts CSV (HDI_OUTPUT_DIR)."""
    return Path(os.getenv("HDI_OUTPUT_DIR", str(BASE_DIR / "data")))


def parallel_map(func: Callable[[T], R], items: Iterable[T],
                 workers: Optional[int] = None) -> List[R]:
    """
    Applique func à chaque élément avec un pool de threads borné.

    L'ordre des résultats est celui des entrées, la sortie est donc
    déterministe quel que soit le nombre de threads.
    """
    items = list(items)
    workers = min(workers or max_workers(), max(len(items), 1))
    if workers <= 1:
        return [func(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items))
