from __future__ import annotations

import json
import re
import sys
from dataclasses import replace
from pathlib import Path
from typing import Callable

import pandas as pd
import torch
from rich.console import Console
from rich.table import Table

from src.arguments import parse_arguments
from src.helpers.json import read_json, write_json, write_jsonl
from src.logger import CustomLogger, attach_run_log, detach_run_log, update_global_log_level
from src.modules.features import extract_frames, load_dataset, save_dataset
from src.modules.ingest import (
    downsample_penetration,
    group_and_clean,
    read_points,
    read_segment_index,
    write_rejection_log,
)
from src.modules.model import ABLATION_VARIANTS, feature_removal_variants, load_checkpoint, save_checkpoint
from src.modules.synth import generate
from src.modules.training import sweep, write_run_record
from src.settings import SETTINGS
from .config import ExperimentConfig, load_experiment_config
from .experiments import (
    evaluate_model,
    evaluation_windows,
    extract_dataset,
    fit,
    prepare,
    summary_row,
    write_evaluation,
)
from .manifest import RunManifest, run_directory

logger = CustomLogger("cli").get_logger()
console = Console()

DATASET_NAME = "dataset.bin"
CHECKPOINT_DIR = "checkpoint"


def print_table(title: str, rows: list[dict]):
    if not rows:
        return
    table = Table(title=title, show_header=True, header_style="bold cyan")
    headers = list(rows[0])
    for h in headers:
        table.add_column(h, justify="center")
    for row in rows:
        table.add_row(*(f"{v:.4f}" if isinstance(v, float) else str(v) for v in row.values()))
    console.print(table)


def _slug(name: str) -> str:
    return re.sub(r"[^a-z0-9]+", "_", name.lower()).strip("_")


def _write_rows(path: Path, rows: list[dict]) -> Path:
    pd.DataFrame(rows).to_csv(path, index=False, lineterminator="\n")
    return path


def cmd_synth(args, exp: ExperimentConfig, run_dir: Path, workers: int) -> list[Path]:
    corpus = generate(exp.scenario, exp.features, workers)
    paths = list(corpus.write(run_dir).values())

    _, stats = extract_dataset(corpus.points, corpus.index, exp, workers)
    dataset = run_dir / DATASET_NAME
    save_dataset(dataset, corpus.grid, stats, {"source": "synth", "scenario": exp.scenario.to_dict()})
    paths.append(dataset)

    print_table(
        "Synthetic corpus",
        [
            {
                "days": len(corpus.grid.days),
                "segments": corpus.grid.num_segments,
                "journeys": int(corpus.points["journey_id"].nunique()),
                "points": len(corpus.points),
                "waves": len(exp.scenario.waves),
            }
        ],
    )
    return paths


def cmd_extract(args, exp: ExperimentConfig, run_dir: Path, workers: int) -> list[Path]:
    points, rejections = read_points(args.points)
    rejection_path = run_dir / "rejections.csv"
    write_rejection_log(rejection_path, rejections)
    index = read_segment_index(args.segments)

    grid, stats = extract_dataset(points, index, exp, workers)
    dataset = run_dir / DATASET_NAME
    save_dataset(dataset, grid, stats, {"source": str(args.points), "segments": str(args.segments)})

    print_table(
        "Extracted dataset",
        [
            {
                "points": len(points),
                "rejected": len(rejections),
                "days": len(grid.days),
                "segments": grid.num_segments,
                "imputed": f"{grid.imputed.mean():.1%}" if grid.imputed.size else "n/a",
            }
        ],
    )
    return [rejection_path, dataset]


def cmd_train(args, exp: ExperimentConfig, run_dir: Path, workers: int) -> list[Path]:
    grid, stats, _ = load_dataset(args.dataset)
    prepared = prepare(grid, exp, stats)
    model, record = fit(prepared, exp)

    checkpoint = save_checkpoint(run_dir / CHECKPOINT_DIR, model, prepared.stats, {"dataset": str(args.dataset)})
    record_path = run_dir / "run_record.jsonl"
    write_run_record(record_path, record)
    summary_path = run_dir / "run_summary.json"
    write_json(summary_path, record.summary())

    print_table("Training", [record.summary()])
    return [record_path, summary_path, checkpoint / "model.json", checkpoint / "model.bin"]


def cmd_evaluate(args, exp: ExperimentConfig, run_dir: Path, workers: int) -> list[Path]:
    model, stats, _ = load_checkpoint(args.checkpoint)
    grid, dataset_stats, _ = load_dataset(args.dataset)
    if model.config.num_segments != grid.num_segments:
        raise ValueError(
            f"Checkpoint expects {model.config.num_segments} segments, dataset has {grid.num_segments}"
        )
    prepared = prepare(grid, exp, stats or dataset_stats)
    config = exp.evaluate if args.alpha is None else replace(exp.evaluate, alpha=args.alpha)

    evaluation = evaluate_model(model, prepared.stats, evaluation_windows(prepared), config, exp.train.loss)
    paths = write_evaluation(evaluation, run_dir, grid.segment_ids)

    print_table("Evaluation by speed bin", evaluation.report.bins_frame().to_dict("records"))
    return paths


def _ablation_variants(name: str) -> dict[str, dict]:
    if name == "architecture":
        return dict(ABLATION_VARIANTS)
    if name == "features":
        return {"full": {}, **feature_removal_variants()}
    if name == "all":
        return {**ABLATION_VARIANTS, **feature_removal_variants()}
    return {"full": {}, name: ABLATION_VARIANTS[name]} if name != "full" else {"full": {}}


def cmd_ablate(args, exp: ExperimentConfig, run_dir: Path, workers: int) -> list[Path]:
    grid, stats, _ = load_dataset(args.dataset)
    prepared = prepare(grid, exp, stats)
    variants_dir = run_dir / "variants"
    variants_dir.mkdir(exist_ok=True)

    rows, paths = [], []
    for name, overrides in _ablation_variants(args.variant).items():
        logger.info(f"Ablation variant '{name}'")
        model, record = fit(prepared, exp, **overrides)
        evaluation = evaluate_model(model, prepared.stats, evaluation_windows(prepared), exp.evaluate, exp.train.loss)
        record_path = variants_dir / f"{_slug(name)}.jsonl"
        write_run_record(record_path, record)
        paths.append(record_path)
        rows.append(summary_row(name, evaluation, record))

    paths.append(_write_rows(run_dir / "ablation.csv", rows))
    print_table("Ablation", rows)
    return paths


def cmd_sweep(args, exp: ExperimentConfig, run_dir: Path, workers: int) -> list[Path]:
    grid, stats, _ = load_dataset(args.dataset)
    prepared = prepare(grid, exp, stats)
    model_config = exp.model_config(
        prepared.grid.num_segments, exp.features.history, exp.features.horizon, prepared.grid.steps_per_day
    )
    runs = sweep(read_json(args.grid), model_config, exp.train, prepared.splits, workers)

    rows = [
        {
            "rank": r.rank,
            **r.params,
            "best_validation_loss": r.record.best_validation_loss,
            "best_epoch": r.record.best_epoch,
            "epochs": len(r.record.epochs),
        }
        for r in runs
    ]
    path = run_dir / "sweep.jsonl"
    write_jsonl(path, rows)
    print_table("Sweep ranking", rows)
    return [path]


def cmd_penetration(args, exp: ExperimentConfig, run_dir: Path, workers: int) -> list[Path]:
    points, _ = read_points(args.points)
    index = read_segment_index(args.segments)
    trajectories = group_and_clean(points, exp.ingest.stationary_window, exp.ingest.stationary_speed_cap)
    fractions = args.keep_fraction or list(exp.penetration.keep_fractions)

    rows = []
    for fraction in fractions:
        kept = downsample_penetration(trajectories, fraction, exp.penetration.seed)
        grid = extract_frames(kept, index, exp.features, workers)
        prepared = prepare(grid, exp)
        model, record = fit(prepared, exp)
        evaluation = evaluate_model(model, prepared.stats, evaluation_windows(prepared), exp.evaluate, exp.train.loss)
        row = summary_row(f"{fraction:g}", evaluation, record)
        row["journeys"] = len(kept)
        rows.append(row)

    path = _write_rows(run_dir / "penetration.csv", rows)
    print_table("Penetration", rows)
    return [path]


COMMANDS: dict[str, Callable] = {
    "synth": cmd_synth,
    "extract": cmd_extract,
    "train": cmd_train,
    "evaluate": cmd_evaluate,
    "ablate": cmd_ablate,
    "sweep": cmd_sweep,
    "penetration": cmd_penetration,
}

INPUT_FLAGS = ("config", "points", "segments", "dataset", "grid")


def _inputs(args) -> dict[str, str]:
    inputs = {flag: str(getattr(args, flag)) for flag in INPUT_FLAGS if getattr(args, flag, None) is not None}
    checkpoint = getattr(args, "checkpoint", None)
    if checkpoint is not None:
        inputs["checkpoint_manifest"] = str(Path(checkpoint) / "model.json")
        inputs["checkpoint_payload"] = str(Path(checkpoint) / "model.bin")
    return inputs


def run(argv: list[str] | None = None) -> int:
    """Parse, run one subcommand, return the exit status. Argument errors exit 2 from argparse."""
    args = parse_arguments(argv)
    if args.log_level:
        SETTINGS.LOG_LEVEL = args.log_level
    update_global_log_level()
    torch.set_num_threads(max(SETTINGS.NUM_THREADS, 1))
    workers = args.workers if args.workers is not None else SETTINGS.NUM_WORKERS

    run_log = None
    try:
        exp = load_experiment_config(args.config)
        if args.seed is not None:
            exp = exp.with_seed(args.seed)
        seed = exp.train.seed
        run_dir = run_directory(Path(SETTINGS.RUNS_PATH), args.subcommand, seed, args.out)
        run_log = attach_run_log(run_dir)

        options = {k: (str(v) if isinstance(v, Path) else v) for k, v in vars(args).items()}
        manifest = RunManifest(args.subcommand, seed, exp.to_dict(), _inputs(args), options, str(run_dir))
        manifest.hash_inputs()
        manifest.write(run_dir)

        outputs = COMMANDS[args.subcommand](args, exp, run_dir, workers)
        manifest.finish(run_dir, outputs)
        console.print(f"[green]{args.subcommand} done[/green]: {run_dir}")
        return 0
    except Exception as e:
        logger.error(f"{args.subcommand} failed: {e}", exc_info=True)
        print(
            f"error type={type(e).__name__} subcommand={args.subcommand} message={json.dumps(str(e))}",
            file=sys.stderr,
        )
        return 1
    finally:
        if run_log is not None:
            detach_run_log(run_log)
