"""Linear blending of base regressors with globally optimal weights.

Both weight problems are tiny convex QPs, so they are solved exactly from
their optimality conditions:

* ``mse_only``: unconstrained least squares, ``(PᵀP) β = Pᵀy``.
* ``unbiased``: least squares subject to ``sᵀβ = Y`` where ``s`` holds the
  column sums of ``P`` and ``Y`` the target sum. The KKT system is
  ``[[2PᵀP, s], [sᵀ, 0]] [β; λ] = [2Pᵀy; Y]``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol, Sequence

import numpy as np

MODEL_NAMES = ("ANN", "RFR", "PR")
VARIANTS = ("unbiased", "mse_only")
MAX_CONDITION = 1e12


class Predictor(Protocol):
    def predict(self, X) -> np.ndarray: ...


class DegenerateBlendError(np.linalg.LinAlgError):
    """The weight problem has no unique solution (nearly collinear predictions)."""


class NonFinitePredictionError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class PredictionMatrix:
    P: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        P = np.atleast_2d(np.asarray(self.P, dtype=float))
        y = np.asarray(self.y, dtype=float)
        if P.shape[0] != y.shape[0]:
            raise ValueError("prediction rows and target length differ")
        if not (np.all(np.isfinite(P)) and np.all(np.isfinite(y))):
            raise ValueError("prediction matrix must be finite")
        object.__setattr__(self, "P", P)
        object.__setattr__(self, "y", y)

    @property
    def column_sums(self) -> np.ndarray:
        return self.P.sum(axis=0)

    @property
    def target_sum(self) -> float:
        return float(self.y.sum())

    def sse(self, beta) -> float:
        r = self.P @ np.asarray(beta, dtype=float) - self.y
        return float(r @ r)

    def mse(self, beta) -> float:
        return self.sse(beta) / len(self.y)


@dataclass(frozen=True)
class BlendWeights:
    beta: tuple
    variant: str

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown blend variant {self.variant!r}")
        beta = tuple(float(b) for b in self.beta)
        if not all(np.isfinite(beta)):
            raise ValueError("blend weights must be finite")
        object.__setattr__(self, "beta", beta)

    def as_array(self) -> np.ndarray:
        return np.array(self.beta)

    def to_dict(self) -> dict:
        return {"beta": list(self.beta), "variant": self.variant}

    @classmethod
    def from_dict(cls, d) -> "BlendWeights":
        return cls(tuple(d["beta"]), d["variant"])


def build_prediction_matrix(models: Sequence[Predictor], X, y, names=None) -> PredictionMatrix:
    names = names or [getattr(m, "name", f"model{i}") for i, m in enumerate(models)]
    X = np.atleast_2d(np.asarray(X, dtype=float))
    cols = []
    for name, model in zip(names, models):
        col = np.asarray(model.predict(X), dtype=float).reshape(-1)
        bad = np.flatnonzero(~np.isfinite(col))
        if bad.size:
            raise NonFinitePredictionError(f"model {name} produced a non-finite prediction at row {bad[0]}")
        cols.append(col)
    return PredictionMatrix(np.column_stack(cols), y)


def solve_weights_mse(pm: PredictionMatrix) -> BlendWeights:
    G = pm.P.T @ pm.P
    b = pm.P.T @ pm.y
    cond = np.linalg.cond(G)
    if not np.isfinite(cond) or cond > MAX_CONDITION:
        raise DegenerateBlendError(
            f"normal matrix condition number {cond:.3g} exceeds {MAX_CONDITION:.0e}: "
            "base-model predictions are nearly collinear"
        )
    beta = np.linalg.solve(G, b)
    beta += np.linalg.solve(G, b - G @ beta)
    return BlendWeights(tuple(beta), "mse_only")


def kkt_system(pm: PredictionMatrix):
    """KKT matrix and right-hand side of the unbiased weight problem."""
    G = pm.P.T @ pm.P
    s = pm.column_sums
    k = len(s)
    K = np.zeros((k + 1, k + 1))
    K[:k, :k] = 2.0 * G
    K[:k, k] = s
    K[k, :k] = s
    rhs = np.concatenate([2.0 * (pm.P.T @ pm.y), [pm.target_sum]])
    return K, rhs


def solve_weights_unbiased(pm: PredictionMatrix) -> BlendWeights:
    s = pm.column_sums
    if not np.any(s):
        raise DegenerateBlendError("column sums are all zero; the unbiasedness constraint is empty")
    K, rhs = kkt_system(pm)
    # equilibrate rows and columns so the condition test is scale-free
    d = 1.0 / np.sqrt(np.maximum(np.abs(K).max(axis=1), np.finfo(float).tiny))
    Ks = K * d[:, None] * d[None, :]
    cond = np.linalg.cond(Ks)
    if not np.isfinite(cond) or cond > MAX_CONDITION:
        raise DegenerateBlendError(f"KKT matrix is singular (scaled condition {cond:.3g})")
    z = np.linalg.solve(Ks, rhs * d)
    z += np.linalg.solve(Ks, rhs * d - Ks @ z)
    beta = (z * d)[: len(s)]
    return BlendWeights(tuple(beta), "unbiased")


def solve_weights(pm: PredictionMatrix, variant: str) -> BlendWeights:
    if variant == "unbiased":
        return solve_weights_unbiased(pm)
    if variant == "mse_only":
        return solve_weights_mse(pm)
    raise ValueError(f"unknown blend variant {variant!r}")


def predict_mm(models: Sequence[Predictor], weights: BlendWeights, X) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    P = np.column_stack([np.asarray(m.predict(X), dtype=float).reshape(-1) for m in models])
    return P @ weights.as_array()


class MultiModel:
    """The three base predictors plus the blend weights of both variants."""

    def __init__(self, models: Sequence[Predictor], weights: dict, names=MODEL_NAMES):
        self.models = list(models)
        self.weights = dict(weights)
        self.names = tuple(names)

    def base_predictions(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return np.column_stack([m.predict(X) for m in self.models])

    def predict(self, X, variant: str = "mse_only") -> np.ndarray:
        return predict_mm(self.models, self.weights[variant], X)

    def predictor(self, variant: str = "mse_only") -> "BlendPredictor":
        return BlendPredictor(self, variant)


class BlendPredictor:
    def __init__(self, mm: MultiModel, variant: str):
        self.mm = mm
        self.variant = variant
        self.name = f"MM[{variant}]"

    def predict(self, X) -> np.ndarray:
        return self.mm.predict(X, self.variant)


@dataclass(frozen=True)
class Metrics:
    mse: float
    r2: float


def score(pred, y) -> Metrics:
    pred = np.asarray(pred, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(y) == 0:
        raise ValueError("empty evaluation set")
    resid = pred - y
    sse = float(resid @ resid)
    sst = float(np.sum((y - y.mean()) ** 2))
    if sst == 0:
        raise ValueError("R² undefined: targets are constant")
    return Metrics(sse / len(y), 1.0 - sse / sst)


def evaluate(predictor: Predictor, X, y) -> Metrics:
    return score(predictor.predict(np.atleast_2d(X)), y)
