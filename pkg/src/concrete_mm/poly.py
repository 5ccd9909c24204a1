"""Per-feature polynomial regression (no cross terms) fitted by least squares.

Each standardized feature contributes its powers 1..degree; a single shared
intercept replaces the per-feature constant terms, which are collinear.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .data import FEATURES, Dataset, Scaler


class RankDeficientError(np.linalg.LinAlgError):
    def __init__(self, message, dependent_columns):
        super().__init__(message)
        self.dependent_columns = dependent_columns


def term_labels(n_features: int = len(FEATURES), degree: int = 3, names=FEATURES) -> list:
    labels = ["intercept"]
    for i in range(n_features):
        for j in range(1, degree + 1):
            labels.append(f"{names[i]}^{j}")
    return labels


def poly_expand(Z, degree: int = 3) -> np.ndarray:
    """Rows ``[1, x1, x1^2, x1^3, ..., x8, x8^2, x8^3]`` for degree 3."""
    Z = np.asarray(Z, dtype=float)
    single = Z.ndim == 1
    Z2 = np.atleast_2d(Z)
    if not np.all(np.isfinite(Z2)):
        raise ValueError("non-finite input to polynomial expansion")
    powers = Z2[:, :, None] ** np.arange(1, degree + 1)
    out = np.column_stack([np.ones(len(Z2)), powers.reshape(len(Z2), -1)])
    return out[0] if single else out


@dataclass(eq=False)
class PolyModel:
    coef: np.ndarray
    scaler: Scaler
    degree: int = 3

    name = "PR"

    @property
    def intercept(self) -> float:
        return float(self.coef[0])

    def coefficient(self, feature: int, power: int) -> float:
        return float(self.coef[1 + feature * self.degree + (power - 1)])

    def predict(self, X) -> np.ndarray:
        A = poly_expand(self.scaler.transform(np.atleast_2d(X)), self.degree)
        return A @ self.coef

    def to_dict(self) -> dict:
        labels = term_labels(len(self.scaler.mean), self.degree)
        return {
            "degree": self.degree,
            "terms": [{"label": lab, "value": float(c)} for lab, c in zip(labels, self.coef)],
        }

    @classmethod
    def from_dict(cls, d, scaler: Scaler) -> "PolyModel":
        coef = np.array([t["value"] for t in d["terms"]], dtype=float)
        return cls(coef, scaler, int(d["degree"]))


def _dependent_columns(A: np.ndarray, rtol: float) -> list:
    _, R, piv = scipy.linalg.qr(A, mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    rank = int(np.sum(diag > rtol * diag[0])) if diag.size and diag[0] > 0 else 0
    return sorted(int(c) for c in piv[rank:])


def solve_normal_equations(A: np.ndarray, y: np.ndarray, min_norm: bool = False, rtol: float = 1e-10):
    """Least-squares coefficients of ``A c ~ y`` via a Cholesky solve of AᵀA c = Aᵀy.

    Raises ``RankDeficientError`` naming the dependent columns unless
    ``min_norm`` is set, in which case the minimum-norm solution is returned.
    """
    dependent = _dependent_columns(A, rtol)
    if dependent:
        if min_norm:
            return np.linalg.lstsq(A, y, rcond=None)[0]
        raise RankDeficientError(
            f"design matrix is rank deficient; dependent columns {dependent}", dependent
        )
    G = A.T @ A
    b = A.T @ y
    factor = scipy.linalg.cho_factor(G, lower=True)
    c = scipy.linalg.cho_solve(factor, b)
    # one step of iterative refinement against the normal-equation residual
    c += scipy.linalg.cho_solve(factor, b - G @ c)
    return c


def poly_fit(train: Dataset, scaler: Scaler, degree: int = 3, min_norm: bool = False) -> PolyModel:
    n_terms = 1 + train.X.shape[1] * degree
    if len(train) < n_terms:
        raise ValueError(f"need at least {n_terms} samples for {n_terms} basis terms, got {len(train)}")
    A = poly_expand(scaler.transform(train.X), degree)
    coef = solve_normal_equations(A, train.y, min_norm=min_norm)
    return PolyModel(coef, scaler, degree)


def poly_predict(model: PolyModel, X) -> np.ndarray | float:
    X = np.asarray(X, dtype=float)
    out = model.predict(X)
    return float(out[0]) if X.ndim == 1 else out
