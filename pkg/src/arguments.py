import argparse
from pathlib import Path

from src.modules.model import ABLATION_VARIANTS

VARIANT_CHOICES = ("architecture", "features", "all", *ABLATION_VARIANTS)


def keep_fraction(value: str) -> float:
    try:
        fraction = float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"Invalid keep fraction: {value}")
    if not 0.0 < fraction <= 1.0:
        raise argparse.ArgumentTypeError(f"Keep fraction must be in (0, 1]: {value}")
    return fraction


def _common(parser: argparse.ArgumentParser):
    parser.add_argument("--config", type=Path, help="Experiment config (JSON)")
    parser.add_argument("--seed", type=int, help="Override every seed in the config")
    parser.add_argument("--out", type=Path, help="Run directory (default: RUNS_PATH/<subcommand>-<time>-seed<seed>)")
    parser.add_argument("--log-level", help="Change log level from ERROR to DEBUG", type=str)
    parser.add_argument("--workers", type=int, help="Worker processes (default: NUM_WORKERS)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mmcaformer",
        description="Macro-micro cross-attention traffic speed forecasting",
    )
    commands = parser.add_subparsers(dest="subcommand", required=True)

    synth = commands.add_parser("synth", help="Generate a synthetic CV corpus from the scenario config")
    _common(synth)

    extract = commands.add_parser("extract", help="CV points + segment index -> dataset file")
    _common(extract)
    extract.add_argument("--points", type=Path, required=True, help="CV point CSV")
    extract.add_argument("--segments", type=Path, required=True, help="Segment index CSV")

    train = commands.add_parser("train", help="Dataset -> checkpoint + run record")
    _common(train)
    train.add_argument("--dataset", type=Path, required=True)

    evaluate = commands.add_parser("evaluate", help="Checkpoint + dataset -> metrics and diagnostics")
    _common(evaluate)
    evaluate.add_argument("--checkpoint", type=Path, required=True, help="Checkpoint directory")
    evaluate.add_argument("--dataset", type=Path, required=True)
    evaluate.add_argument("--alpha", type=float, help="Interval significance (default from config)")

    ablate = commands.add_parser("ablate", help="Train and compare model variants")
    _common(ablate)
    ablate.add_argument("--dataset", type=Path, required=True)
    ablate.add_argument("--variant", default="architecture", choices=VARIANT_CHOICES)

    sweep = commands.add_parser("sweep", help="Grid search ranked by validation loss")
    _common(sweep)
    sweep.add_argument("--dataset", type=Path, required=True)
    sweep.add_argument("--grid", type=Path, required=True, help="Grid file (JSON: key -> value list)")

    penetration = commands.add_parser("penetration", help="Re-run extract/train/evaluate at CV keep fractions")
    _common(penetration)
    penetration.add_argument("--points", type=Path, required=True)
    penetration.add_argument("--segments", type=Path, required=True)
    penetration.add_argument(
        "--keep-fraction", type=keep_fraction, action="append", help="Repeatable; overrides the config list"
    )

    return parser


def parse_arguments(argv: list[str] | None = None) -> argparse.Namespace:
    return build_parser().parse_args(argv)
