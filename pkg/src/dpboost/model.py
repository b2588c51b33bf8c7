"""Linear classifiers over column subsets, boosted ensembles, and accuracy.

Sign convention: a score of exactly 0 predicts +1, everywhere. Keeping one
global convention makes label flips exact inverses.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .data import Dataset

SUBSPACES = ("public", "private", "all")


def sign_labels(scores: np.ndarray) -> np.ndarray:
    """Map real scores to labels: +1 for score >= 0, else -1."""
    return np.where(np.asarray(scores) >= 0.0, 1, -1).astype(np.int64)


@dataclass(frozen=True)
class LinearClassifier:
    """Affine predictor reading only the columns in ``cols``.

    Predicts sign(coeffs . x[cols] + intercept), with 0 mapped to +1.
    """

    coeffs: np.ndarray
    intercept: float
    cols: tuple[int, ...]

    def __post_init__(self):
        coeffs = np.asarray(self.coeffs, dtype=np.float64)
        cols = tuple(int(c) for c in self.cols)
        if coeffs.ndim != 1 or coeffs.shape[0] != len(cols):
            raise ValueError("coeffs must be a 1-d vector matching cols")
        if len(cols) < 1:
            raise ValueError("a linear classifier needs at least one column")
        if not np.all(np.isfinite(coeffs)) or not np.isfinite(self.intercept):
            raise ValueError("coefficients and intercept must be finite")
        coeffs.setflags(write=False)
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "intercept", float(self.intercept))
        object.__setattr__(self, "cols", cols)

    def scores(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        return X[:, list(self.cols)] @ self.coeffs + self.intercept

    def predict(self, X: np.ndarray) -> np.ndarray:
        return sign_labels(self.scores(X))


@dataclass(frozen=True)
class EnsembleMember:
    alpha: float
    clf: LinearClassifier
    subspace: str

    def __post_init__(self):
        if self.subspace not in SUBSPACES:
            raise ValueError(f"unknown subspace tag {self.subspace!r}")


@dataclass(frozen=True)
class Ensemble:
    """Weighted vote of classifiers: H(x) = sign(sum_t alpha_t * h_t(x)).

    Each member contributes its +/-1 label scaled by alpha; scaling every
    alpha by the same positive factor leaves all predictions unchanged.
    """

    members: tuple[EnsembleMember, ...]

    def __post_init__(self):
        if len(self.members) == 0:
            raise ValueError("ensemble must contain at least one member")

    def __len__(self) -> int:
        return len(self.members)

    def vote_matrix(self, X: np.ndarray) -> np.ndarray:
        """(n, T) matrix of member labels, in member order."""
        return np.stack([m.clf.predict(X) for m in self.members], axis=1)

    def scores(self, X: np.ndarray) -> np.ndarray:
        alphas = np.array([m.alpha for m in self.members])
        return self.vote_matrix(X) @ alphas

    def predict(self, X: np.ndarray) -> np.ndarray:
        return sign_labels(self.scores(X))

    def prefix_predictions(self, X: np.ndarray) -> np.ndarray:
        """(T, n) labels of each partial ensemble H_1..H_T, for convergence traces."""
        alphas = np.array([m.alpha for m in self.members])
        cum = np.cumsum(self.vote_matrix(X) * alphas, axis=1)
        return sign_labels(cum.T)

    def to_json(self) -> str:
        payload = {
            "members": [
                {
                    "alpha": m.alpha,
                    "cols": list(m.clf.cols),
                    "coeffs": [float(c) for c in m.clf.coeffs],
                    "intercept": m.clf.intercept,
                    "subspace": m.subspace,
                }
                for m in self.members
            ]
        }
        # json round-trips Python floats through repr, which is exact.
        return json.dumps(payload)

    @classmethod
    def from_json(cls, text: str) -> "Ensemble":
        payload = json.loads(text)
        members = tuple(
            EnsembleMember(
                alpha=float(m["alpha"]),
                clf=LinearClassifier(
                    coeffs=np.array(m["coeffs"], dtype=np.float64),
                    intercept=float(m["intercept"]),
                    cols=tuple(m["cols"]),
                ),
                subspace=m["subspace"],
            )
            for m in payload["members"]
        )
        return cls(members=members)


def accuracy(predictor, ds: Dataset) -> float:
    """Fraction of rows where the predictor's label matches ds.y.

    ``predictor`` is either an object with a ``predict(X)`` method or a
    callable mapping a feature matrix to labels.
    """
    if ds.n == 0:
        raise ValueError("accuracy of an empty dataset is undefined")
    predict = predictor.predict if hasattr(predictor, "predict") else predictor
    return float(np.mean(predict(ds.X) == ds.y))
