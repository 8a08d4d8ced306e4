"""
Point d'entrée en ligne de commande.

    python flows/cli.py dequantize --config quartic-demo
    python flows/cli.py evolve --config cubic-plane-wave --out ./data/runs/pw
    python flows/cli.py trace-check --seed 7
    python flows/cli.py alpha-bound --b-ev 1e-15

Codes de sortie : 0 succès, 1 contrôle échoué, 2 usage ou schéma,
3 ajustement dominé par le bruit, 4 échec numérique.
"""

import argparse
import sys
from pathlib import Path
from typing import List, Optional

from config import PCSFT_DEFAULT_SEED, PCSFT_OUTPUT_DIR
from pcsft.errors import ConfigError
from pcsft.units import alpha_bound_from_b, format_bound


EXIT_USAGE = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pcsft", description="Laboratoire de champs préquantiques")
    subparsers = parser.add_subparsers(dest="command", required=True)

    for name, help_text in (
        ("dequantize", "balayage en α du reste asymptotique"),
        ("evolve", "intégration d'une trajectoire"),
        ("trace-check", "vérification de la formule de trace"),
    ):
        sub = subparsers.add_parser(name, help=help_text)
        sub.add_argument("--config", required=(name != "trace-check"), help="chemin JSON ou nom de preset")
        sub.add_argument("--seed", type=int, default=None)
        sub.add_argument("--out", default=None, help="répertoire de sortie")

    bound = subparsers.add_parser("alpha-bound", help="borne sur α depuis la borne expérimentale sur b")
    bound.add_argument("--b-ev", type=float, required=True, dest="b_ev")
    return parser


def cmd_alpha_bound(b_ev: float) -> int:
    try:
        bound = alpha_bound_from_b(b_ev)
    except ValueError as e:
        print(f"❌ {e}", file=sys.stderr)
        return EXIT_USAGE
    print(f"alpha_upper_bound_eV={format_bound(bound.value_ev)}")
    print(f"# {bound.note}")
    return 0


def _resolve(args) -> tuple:
    from experiments import load_config

    if args.config is None:
        cfg = {}
    else:
        cfg, _ = load_config(args.config)
    seed = args.seed if args.seed is not None else cfg.get("seed", PCSFT_DEFAULT_SEED)
    out = args.out or cfg.get("output_dir") or str(Path(PCSFT_OUTPUT_DIR) / args.command)
    return cfg, out, seed


def run_experiment(args) -> int:
    """Charge la configuration et lance le flow de la commande."""
    try:
        cfg, out, seed = _resolve(args)
        if args.command == "dequantize":
            from dequantize_flow import dequantize_flow
            result = dequantize_flow(cfg, out, seed)
        elif args.command == "evolve":
            from evolve_flow import evolve_flow
            result = evolve_flow(cfg, out, seed)
        else:
            from trace_check_flow import trace_check_flow
            result = trace_check_flow(cfg, out, seed)
    except ConfigError as e:
        print(f"❌ {e}", file=sys.stderr)
        return EXIT_USAGE
    return int(result["exit_code"])


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "alpha-bound":
        return cmd_alpha_bound(args.b_ev)
    return run_experiment(args)


if __name__ == "__main__":
    sys.exit(main())
