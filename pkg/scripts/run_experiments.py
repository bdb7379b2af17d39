#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Script d'orchestration pour exécuter toutes les expériences.
Chaque expérience est lancée dans un sous-processus (python -m hdi).
"""

import sys
import subprocess
from pathlib import Path

BASE_DIR = Path(__file__).parent.parent
CONFIG_DIR = BASE_DIR / "config"


def run_experiment(name: str, config_name: str, description: str, extra_args=()) -> bool:
    """Exécute une sous-commande et retourne True si succès."""
    print(f"\n{'='*60}")
    print(f"🔄 {description}")
    print(f"{'='*60}\n")

    config_path = CONFIG_DIR / config_name
    if not config_path.exists():
        print(f"❌ Configuration introuvable: {config_path}")
        return False

    try:
        subprocess.run(
            [sys.executable, "-m", "hdi", name, "--config", str(config_path), *extra_args],
            cwd=str(BASE_DIR),
            check=True
        )
        print(f"\n✅ {description} terminé avec succès")
        return True
    except subprocess.CalledProcessError as e:
        print(f"\n❌ Erreur lors de l'expérience {name} (code {e.returncode})")
        return False
    except KeyboardInterrupt:
        print(f"\n⚠️  Interruption par l'utilisateur")
        return False


def main():
    """Exécute toutes les expériences, identités en premier."""
    import argparse

    parser = argparse.ArgumentParser(description='Exécute la suite complète des expériences HDI')
    parser.add_argument('--only', nargs='*', default=None,
                        help='Sous-ensemble des expériences à exécuter')
    parser.add_argument('--set', dest='overrides', action='append', default=[],
                        help='Surcharge transmise à chaque expérience (clé=valeur)')
    args = parser.parse_args()

    print("🚀 Démarrage de la suite d'expériences HDI")
    print("=" * 60)

    steps = [
        ("identities", "identities.yml", "Identités analytiques"),
        ("converge-2d", "converge_2d.yml", "Convergence de l'opérateur hypersingulier 2D"),
        ("converge-2d", "converge_2d_single_layer.yml", "Ordres de la simple couche 2D"),
        ("converge-2d", "converge_2d_kite.yml", "Simple couche sur le cerf-volant"),
        ("nearfield-2d", "nearfield_2d.yml", "Potentiels en champ proche 2D"),
        ("solve-dirichlet-2d", "solve_dirichlet_2d.yml", "Problème de Dirichlet 2D"),
        ("interp-3d", "interp_3d.yml", "Interpolants harmoniques 3D"),
        ("green-3d", "green_3d.yml", "Identités de Green 3D (sphère)"),
        ("green-3d", "green_3d_parallelepiped.yml", "Identités de Green 3D (parallélépipède)"),
        ("solve-neumann-3d", "solve_neumann_3d.yml", "Problème de Neumann extérieur 3D"),
    ]
    if args.only:
        steps = [step for step in steps if step[0] in args.only]

    extra = [item for override in args.overrides for item in ("--set", override)]
    success_count = 0
    failed_steps = []

    for name, config_name, description in steps:
        if run_experiment(name, config_name, description, extra):
            success_count += 1
        else:
            failed_steps.append(description)

    print(f"\n{'='*60}")
    print("📊 Résumé des expériences")
    print(f"{'='*60}")
    print(f"✅ Expériences réussies: {success_count}/{len(steps)}")

    if failed_steps:
        print(f"❌ Expériences échouées: {', '.join(failed_steps)}")
        sys.exit(1)
    print("🎉 Suite terminée avec succès !")
    print("\n💡 Les CSV sont dans data/ (ou HDI_OUTPUT_DIR)")


if __name__ == "__main__":
    main()
