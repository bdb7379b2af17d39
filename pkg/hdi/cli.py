# -*- coding: utf-8 -*-
"""
Interface en ligne de commande : une sous-commande par expérience.

    python -m hdi converge-2d --config config/converge_2d.yml --set orders=[0,2,4]

Codes de sortie : 0 succès, 1 configuration invalide, 2 échec numérique.
"""

import argparse
import logging
import sys
from typing import List, Optional

from hdi.errors import ConfigError, HdiError
from hdi.experiments import EXPERIMENTS, ExperimentConfig, run_experiment
from hdi.settings import CONFIG_DIR


def default_config(experiment: str):
    return CONFIG_DIR / f"{experiment.replace('-', '_')}.yml"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hdi",
        description="Expériences d'interpolation harmonique de densité (Laplace 2D/3D)",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="Journalisation détaillée")
    subparsers = parser.add_subparsers(dest="experiment", required=True)
    for name in EXPERIMENTS:
        sub = subparsers.add_parser(name, help=f"Expérience {name}")
        sub.add_argument("--config", default=None,
                         help=f"Fichier YAML (défaut : {default_config(name).relative_to(CONFIG_DIR.parent)})")
        sub.add_argument("--set", dest="overrides", action="append", default=[],
                         metavar="CLÉ=VALEUR", help="Surcharge d'une clé (répétable, ex. ladder=[40,80])")
        sub.add_argument("--output", default=None, help="Chemin du CSV produit")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    overrides = list(args.overrides)
    if args.output:
        overrides.append(f"output={args.output}")

    try:
        config = ExperimentConfig.from_file(args.config or default_config(args.experiment),
                                            overrides, experiment=args.experiment)
    except ConfigError as e:
        print(f"❌ Configuration invalide : {e}", file=sys.stderr)
        return 1

    try:
        run_experiment(config)
    except ConfigError as e:
        print(f"❌ Configuration invalide : {e}", file=sys.stderr)
        return 1
    except HdiError as e:
        print(f"❌ Échec numérique : {e}", file=sys.stderr)
        return 2

    print("🎉 Terminé")
    return 0
