"""AdaBoost-style boosting where the private-feature learner is a random
linear classifier and only its error estimate is perturbed for privacy.

Two fitting modes are provided:

* ``brc_fit``: features are split into public and private sets. Each round
  trains a weighted public classifier and draws a random private classifier,
  perturbs the private error with Laplace noise, and keeps whichever
  classifier's error is farther from 0.5.
* ``brc_fit_all_private``: every feature (and the label) is private. Each
  round only draws a random classifier over all columns and uses its noisy
  error.

Observation weights on the private side are clipped to [1/c1, c2], which
bounds the sensitivity of the weighted error at c1*c2/n; the matching brute
force check lives in ``sensitivity_oracle``.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass

import numpy as np

from .data import Dataset, FeatureSplit
from .model import Ensemble, EnsembleMember, LinearClassifier
from .noise import PrivacyParams, laplace, random_linear_classifier


@dataclass(frozen=True)
class RoundRecord:
    """Diagnostics for one boosting round.

    ``chosen`` is "public" or "private" for split fits and "all" for the
    all-private variant; ``err_pub`` is None when no public classifier was
    trained that round.
    """

    t: int
    chosen: str
    err_pub: float | None
    err_pri_noisy: float
    alpha: float

    def to_dict(self) -> dict:
        return {
            "t": self.t,
            "chosen": self.chosen,
            "err_pub": self.err_pub,
            "err_pri_noisy": self.err_pri_noisy,
            "alpha": self.alpha,
        }


def records_to_jsonl(records) -> str:
    return "\n".join(json.dumps(r.to_dict()) for r in records)


def weighted_error(clf, ds: Dataset, weights) -> float:
    """sum(w_i * 1(y_i != h(x_i))) / sum(w_i) for strictly positive weights."""
    w = np.asarray(weights, dtype=np.float64)
    if w.shape != (ds.n,):
        raise ValueError(f"weights length {w.shape} does not match n={ds.n}")
    if not np.all(w > 0):
        raise ValueError("weights must be strictly positive")
    mis = clf.predict(ds.X) != ds.y
    return float(np.dot(w, mis) / np.sum(w))


def noisy_private_error(
    clf, ds: Dataset, w_pri, params: PrivacyParams, rng: np.random.Generator
) -> float:
    """Weighted error plus one Lap(c1*c2*rounds/(epsilon*n)) draw.

    The result may legitimately fall outside [0, 1]. A zero noise scale
    (epsilon = inf) adds nothing and consumes no draw.
    """
    lo, hi = 1.0 / params.c1, params.c2
    w = np.asarray(w_pri, dtype=np.float64)
    if np.any(w < lo - 1e-12) or np.any(w > hi + 1e-12):
        raise ValueError("private weights outside the clipping bounds [1/c1, c2]")
    err = weighted_error(clf, ds, w)
    scale = params.laplace_scale
    if scale > 0:
        err += laplace(scale, rng)
    return err


def clipped_update(w: float, alpha: float, misclassified: bool, c1: float, c2: float) -> float:
    """Multiplicative weight update that skips (not clamps) out-of-range results.

    candidate = w * exp(alpha * 1(misclassified)); returned if it stays in
    [1/c1, c2], otherwise w is left unchanged.
    """
    candidate = w * np.exp(alpha * (1.0 if misclassified else 0.0))
    if 1.0 / c1 <= candidate <= c2:
        return float(candidate)
    return float(w)


def _clipped_update_vec(w: np.ndarray, alpha: float, mis: np.ndarray, c1: float, c2: float) -> np.ndarray:
    candidate = w * np.exp(alpha * mis)
    ok = (candidate >= 1.0 / c1) & (candidate <= c2)
    return np.where(ok, candidate, w)


def _default_weak_learner(ds: Dataset, cols, weights) -> LinearClassifier:
    from .baselines import fit_logreg_weighted

    return fit_logreg_weighted(ds, cols, weights)


def brc_fit(
    train: Dataset,
    split: FeatureSplit,
    params: PrivacyParams,
    weak_learner=None,
    *,
    classifier_rng: np.random.Generator,
    noise_rng: np.random.Generator,
) -> tuple[Ensemble, list[RoundRecord]]:
    """Boost with a public/private feature split for ``params.rounds`` rounds.

    Per round: (a) fit a public classifier on the public columns with the
    public weights, (b) draw a random classifier on the private columns,
    (c) compute the exact public error and the noisy private error, (d) keep
    the classifier whose error is farther from 0.5 (ties go private),
    (e) set alpha = 0.5 - err of the chosen classifier, and (f) update only
    the chosen side's weights; public updates are unclipped, private updates
    are clipped to [1/c1, c2]. Exactly ``rounds`` Laplace draws are consumed
    (one per round, from ``noise_rng``), for a total privacy cost of epsilon.

    ``classifier_rng`` drives the random private classifiers, ``noise_rng``
    the Laplace noise; keeping the streams separate means adding consumers
    to one never perturbs the other. If ``split.public_cols`` is empty the
    public branch is skipped and every round is private.
    """
    if params.n != train.n:
        raise ValueError(f"params.n={params.n} does not match training size {train.n}")
    split.validate_for(train.d)
    if len(split.private_cols) == 0:
        raise ValueError("brc_fit requires a non-empty private column set")
    if weak_learner is None:
        weak_learner = _default_weak_learner

    n = train.n
    w_pub = np.ones(n)
    w_pri = np.ones(n)
    members: list[EnsembleMember] = []
    records: list[RoundRecord] = []

    for t in range(1, params.rounds + 1):
        h_pub = None
        err_pub = None
        if split.public_cols:
            h_pub = weak_learner(train, split.public_cols, w_pub)
            mis_pub = h_pub.predict(train.X) != train.y
            err_pub = float(np.dot(w_pub, mis_pub) / np.sum(w_pub))

        h_pri = random_linear_classifier(split.private_cols, classifier_rng)
        mis_pri = h_pri.predict(train.X) != train.y
        err_pri = float(np.dot(w_pri, mis_pri) / np.sum(w_pri))
        scale = params.laplace_scale
        if scale > 0:
            err_pri += laplace(scale, noise_rng)

        if h_pub is not None and abs(0.5 - err_pub) > abs(0.5 - err_pri):
            alpha = 0.5 - err_pub
            w_pub = w_pub * np.exp(alpha * mis_pub)
            members.append(EnsembleMember(alpha=alpha, clf=h_pub, subspace="public"))
            records.append(RoundRecord(t, "public", err_pub, err_pri, alpha))
        else:
            alpha = 0.5 - err_pri
            w_pri = _clipped_update_vec(w_pri, alpha, mis_pri, params.c1, params.c2)
            members.append(EnsembleMember(alpha=alpha, clf=h_pri, subspace="private"))
            records.append(RoundRecord(t, "private", err_pub, err_pri, alpha))

    return Ensemble(members=tuple(members)), records


def brc_fit_all_private(
    train: Dataset,
    params: PrivacyParams,
    *,
    classifier_rng: np.random.Generator,
    noise_rng: np.random.Generator,
    sampler=None,
) -> tuple[Ensemble, list[RoundRecord]]:
    """All-private variant: every round draws one random classifier over all
    columns, perturbs its weighted error, and applies clipped weight updates
    to the single weight vector.

    ``sampler(ds, rng) -> classifier`` replaces the default uniform random
    linear classifier; it must ignore the observation weights, since the
    only privacy cost accounted for is the noisy error estimate.
    """
    if params.n != train.n:
        raise ValueError(f"params.n={params.n} does not match training size {train.n}")
    if sampler is None:
        all_cols = tuple(range(train.d))

        def sampler(ds, rng):
            return random_linear_classifier(all_cols, rng)

    w = np.ones(train.n)
    members: list[EnsembleMember] = []
    records: list[RoundRecord] = []

    for t in range(1, params.rounds + 1):
        h = sampler(train, classifier_rng)
        mis = h.predict(train.X) != train.y
        err = float(np.dot(w, mis) / np.sum(w))
        scale = params.laplace_scale
        if scale > 0:
            err += laplace(scale, noise_rng)
        alpha = 0.5 - err
        w = _clipped_update_vec(w, alpha, mis, params.c1, params.c2)
        members.append(EnsembleMember(alpha=alpha, clf=h, subspace="all"))
        records.append(RoundRecord(t, "all", None, err, alpha))

    return Ensemble(members=tuple(members)), records


def sensitivity_oracle(
    clf,
    ds: Dataset,
    weights_grid,
    c1: float,
    c2: float,
    *,
    value_grid=None,
    max_n: int = 8,
    max_private_dim: int = 2,
) -> float:
    """Brute-force the sensitivity of the weighted error on small instances.

    Enumerates every neighbor of ``ds`` that differs in one row's private
    features (the columns ``clf`` reads), with replacement values drawn from
    a finite grid over [-1, 1], and every admissible weight the replaced row
    may carry in [1/c1, c2]; returns the maximum observed
    |g(clf, D) - g(clf, D')| over all base weight vectors in
    ``weights_grid``. The replaced row's label stays fixed (labels are
    public). The result must never exceed c1*c2/n.

    The per-row weight grid is {1/c1, 1, c2} plus 5 uniformly spaced interior
    points; g is monotone in the single replaced weight, so the extremes
    dominate and the grid is sufficient.
    """
    k = len(clf.cols)
    if ds.n > max_n or k > max_private_dim:
        raise ValueError(
            f"instance too large for exhaustive search (n={ds.n} > {max_n} "
            f"or private dim {k} > {max_private_dim})"
        )
    if value_grid is None:
        value_grid = np.linspace(-1.0, 1.0, 5)

    lo, hi = 1.0 / c1, c2
    row_weight_grid = np.unique(
        np.concatenate([[lo, 1.0, hi], np.linspace(lo, hi, 7)[1:-1]])
    )

    def g(X, y, w):
        mis = clf.predict(X) != y
        return float(np.dot(w, mis) / np.sum(w))

    worst = 0.0
    for w in weights_grid:
        w = np.asarray(w, dtype=np.float64)
        if w.shape != (ds.n,):
            raise ValueError("each weight vector must have one entry per row")
        if np.any(w < lo - 1e-12) or np.any(w > hi + 1e-12):
            raise ValueError("weight vector outside the admissible range [1/c1, c2]")
        g_base = g(ds.X, ds.y, w)
        for r in range(ds.n):
            for replacement in itertools.product(value_grid, repeat=k):
                X_nbr = ds.X.copy()
                X_nbr[r, list(clf.cols)] = replacement
                for w_r in row_weight_grid:
                    w_nbr = w.copy()
                    w_nbr[r] = w_r
                    worst = max(worst, abs(g_base - g(X_nbr, ds.y, w_nbr)))
    return worst
