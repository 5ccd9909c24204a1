"""Split, train the three base models, solve both blend weightings, evaluate."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .ann import AnnRegressor, TrainConfig
from .data import Dataset, Scaler, SplitSets, fit_scaler, split
from .ensemble import (
    MODEL_NAMES,
    VARIANTS,
    Metrics,
    MultiModel,
    build_prediction_matrix,
    score,
    solve_weights,
)
from .forest import ForestConfig, ForestRegressor
from .poly import poly_fit

log = logging.getLogger(__name__)

RESIDUAL_QUANTILES = (0.0, 0.01, 0.05, 0.25, 0.5, 0.75, 0.95, 0.99, 1.0)


@dataclass
class TrainResult:
    split: SplitSets
    scaler: Scaler
    model: MultiModel
    metrics: dict  # {"train"|"test": {model name: Metrics}}
    residual_quantiles: dict = field(default_factory=dict)  # per variant, training residuals
    ann_config: TrainConfig = None
    forest_config: ForestConfig = None

    def mse(self, set_name, model_name) -> float:
        return self.metrics[set_name][model_name].mse


def evaluate_all(mm: MultiModel, X, y) -> dict:
    P = mm.base_predictions(X)
    out = {name: score(P[:, i], y) for i, name in enumerate(mm.names)}
    for variant, w in mm.weights.items():
        out[f"MM[{variant}]"] = score(P @ w.as_array(), y)
    return out


def train_pipeline(ds: Dataset, seed: int = 0, train_fraction: float = 0.7,
                   ann_config: TrainConfig = None, forest_config: ForestConfig = None) -> TrainResult:
    ann_config = ann_config or TrainConfig(seed=seed)
    forest_config = forest_config or ForestConfig(seed=seed)
    sp = split(ds, train_fraction, seed)
    scaler = fit_scaler(sp.train)

    log.info("training ANN (%d epochs)", ann_config.epochs)
    ann = AnnRegressor.fit(sp.train, scaler, ann_config)
    log.info("training random forest (%d trees)", forest_config.n_trees)
    rfr = ForestRegressor.fit(sp.train, forest_config)
    log.info("fitting polynomial regression")
    pr = poly_fit(sp.train, scaler)

    models = [ann, rfr, pr]
    pm = build_prediction_matrix(models, sp.train.X, sp.train.y, MODEL_NAMES)
    weights = {variant: solve_weights(pm, variant) for variant in VARIANTS}
    mm = MultiModel(models, weights)

    metrics = {
        "train": evaluate_all(mm, sp.train.X, sp.train.y),
        "test": evaluate_all(mm, sp.test.X, sp.test.y),
    }
    quantiles = {
        variant: np.quantile(pm.P @ w.as_array() - pm.y, RESIDUAL_QUANTILES).tolist()
        for variant, w in weights.items()
    }
    return TrainResult(sp, scaler, mm, metrics, quantiles, ann_config, forest_config)


def best_single(metrics_for_set: dict, names=MODEL_NAMES) -> tuple:
    name = min(names, key=lambda n: metrics_for_set[n].mse)
    return name, metrics_for_set[name]


def relative_improvement(result: TrainResult, variant: str = "mse_only", set_name: str = "test") -> float:
    """(best single-model MSE - blended MSE) / best single-model MSE."""
    _, best = best_single(result.metrics[set_name])
    blended = result.metrics[set_name][f"MM[{variant}]"]
    return (best.mse - blended.mse) / best.mse


def format_report(metrics: dict) -> str:
    lines = [f"{'set':<6} {'model':<14} {'MSE':>12} {'R2':>10}"]
    for set_name, per_model in metrics.items():
        for name, m in per_model.items():
            lines.append(f"{set_name:<6} {name:<14} {m.mse:>12.6g} {m.r2:>10.6g}")
    return "\n".join(lines)


def report_rows(metrics: dict) -> list:
    return [
        {"set": set_name, "model": name, "mse": repr(m.mse), "r2": repr(m.r2)}
        for set_name, per_model in metrics.items()
        for name, m in per_model.items()
    ]


def metrics_from_dict(d) -> dict:
    return {s: {n: Metrics(v["mse"], v["r2"]) for n, v in per.items()} for s, per in d.items()}


def metrics_to_dict(metrics: dict) -> dict:
    return {s: {n: {"mse": m.mse, "r2": m.r2} for n, m in per.items()} for s, per in metrics.items()}
