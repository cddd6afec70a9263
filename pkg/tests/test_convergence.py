import numpy as np
import pytest

from src.modules.cli.config import ExperimentConfig
from src.modules.cli.experiments import evaluate_model, fit, prepare
from src.modules.synth import generate

pytestmark = pytest.mark.slow

MODEL = {"input_dim": 24, "dow_dim": 2, "tod_dim": 2, "adaptive_dim": 40, "num_layers": 2, "num_heads": 4, "dropout": 0.0}


def experiment(scenario: dict, train: dict) -> ExperimentConfig:
    return ExperimentConfig.from_dict(
        {"scenario": scenario, "model": MODEL, "train": train, "evaluate": {"batch_size": 64}}
    )


def prepared_corpus(exp: ExperimentConfig):
    corpus = generate(exp.scenario, exp.features)
    return prepare(corpus.grid, exp)


def test_single_day_overfit():
    exp = experiment(
        {
            "n_segments": 8,
            "days": 1,
            "waves": [
                {"day": 0, "start_interval": 30, "origin_segment": 7, "duration": 12, "severity": 0.6},
                {"day": 0, "start_interval": 120, "origin_segment": 5, "duration": 16, "severity": 0.7},
            ],
            "seed": 0,
        },
        {"max_epochs": 200, "early_stop_patience": 200, "learning_rate": 0.001, "seed": 0},
    )
    prepared = prepared_corpus(exp)
    model, record = fit(prepared, exp)

    first, best = record.train_losses[0], min(record.train_losses)
    assert first - best >= 0.5 * abs(first)

    evaluation = evaluate_model(model, prepared.stats, prepared.splits.train, exp.evaluate)
    assert evaluation.report.overall.mae < 1.5


def test_micro_features_help_forecasts():
    waves = [
        {"day": d, "start_interval": start, "origin_segment": origin, "duration": 12, "severity": 0.65}
        for d, (start, origin) in enumerate([(30, 7), (60, 6), (90, 7), (40, 5), (110, 7)])
    ]
    reductions = []
    for seed in range(3):
        exp = experiment(
            {"n_segments": 8, "days": 5, "waves": waves, "injection_factor": 9.0, "seed": seed},
            {"max_epochs": 60, "early_stop_patience": 10, "learning_rate": 0.001, "seed": seed},
        ).with_seed(seed)
        prepared = prepared_corpus(exp)
        windows = prepared.splits.test

        full, _ = fit(prepared, exp)
        macro_only, _ = fit(prepared, exp, use_micro=False)
        full_mae = evaluate_model(full, prepared.stats, windows, exp.evaluate).report.overall.mae
        macro_mae = evaluate_model(macro_only, prepared.stats, windows, exp.evaluate).report.overall.mae
        reductions.append((macro_mae - full_mae) / macro_mae)
    assert sum(r > 0 for r in reductions) >= 2
    assert np.median(reductions) > 0
