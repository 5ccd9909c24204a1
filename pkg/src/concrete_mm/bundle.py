"""Model bundle: one JSON document holding everything needed to predict.

Floats are written with ``repr`` precision by the json module, so reloading
reproduces every prediction bit for bit.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .ann import AnnParameters, AnnRegressor
from .data import Scaler
from .ensemble import MODEL_NAMES, BlendWeights, MultiModel
from .forest import Forest, ForestRegressor
from .nsga2 import ConstraintSet
from .pipeline import TrainResult, metrics_from_dict, metrics_to_dict
from .poly import PolyModel

SCHEMA_VERSION = 1
BUNDLE_FORMAT = "concrete-mm-bundle"


class BundleError(ValueError):
    pass


@dataclass
class Bundle:
    model: MultiModel
    scaler: Scaler
    constraints: ConstraintSet
    split_seed: int
    metrics: dict = field(default_factory=dict)
    residual_quantiles: dict = field(default_factory=dict)
    dataset_checksum: str = ""


def bundle_document(result: TrainResult, constraints: ConstraintSet, dataset_checksum: str = "") -> dict:
    ann, rfr, pr = result.model.models
    return {
        "format": BUNDLE_FORMAT,
        "schema_version": SCHEMA_VERSION,
        "split_seed": result.split.seed,
        "dataset_checksum": dataset_checksum,
        "scaler": result.scaler.to_dict(),
        "ann": ann.params.to_dict(),
        "forest": rfr.forest.to_dict(),
        "poly": pr.to_dict(),
        "weights": {v: w.to_dict() for v, w in result.model.weights.items()},
        "constraints": constraints.to_dict(),
        "metrics": metrics_to_dict(result.metrics),
        "residual_quantiles": result.residual_quantiles,
        "configs": {
            "ann": vars(result.ann_config) if result.ann_config else {},
            "forest": vars(result.forest_config) if result.forest_config else {},
        },
    }


def save_bundle(path, result: TrainResult, constraints: ConstraintSet, dataset_checksum: str = "") -> None:
    doc = bundle_document(result, constraints, dataset_checksum)
    Path(path).write_text(json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n", encoding="utf-8")


def load_bundle(path) -> Bundle:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise BundleError(f"{path}: not a JSON document ({exc})") from None
    if doc.get("format") != BUNDLE_FORMAT:
        raise BundleError(f"{path}: not a model bundle")
    version = doc.get("schema_version")
    if version != SCHEMA_VERSION:
        raise BundleError(f"{path}: unsupported bundle schema version {version!r} (expected {SCHEMA_VERSION})")
    scaler = Scaler.from_dict(doc["scaler"])
    models = [
        AnnRegressor(AnnParameters.from_dict(doc["ann"]), scaler),
        ForestRegressor(Forest.from_dict(doc["forest"])),
        PolyModel.from_dict(doc["poly"], scaler),
    ]
    weights = {v: BlendWeights.from_dict(w) for v, w in doc["weights"].items()}
    return Bundle(
        model=MultiModel(models, weights, MODEL_NAMES),
        scaler=scaler,
        constraints=ConstraintSet.from_dict(doc["constraints"]),
        split_seed=int(doc["split_seed"]),
        metrics=metrics_from_dict(doc.get("metrics", {})),
        residual_quantiles=doc.get("residual_quantiles", {}),
        dataset_checksum=doc.get("dataset_checksum", ""),
    )
