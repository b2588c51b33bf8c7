"""Comparison classifiers: weighted/unweighted logistic regression, a
differentially private logistic regression via objective perturbation, and a
teacher-ensemble voting scheme that feeds a noisy aggregate label to a
student model as an extra feature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .data import Dataset, FeatureSplit
from .model import LinearClassifier, sign_labels
from .noise import laplace


@dataclass(frozen=True)
class LogRegHyper:
    """Full-batch gradient-descent settings for the logistic fits."""

    lam: float = 1e-3
    max_iters: int = 500
    step: float = 0.5
    tol: float = 1e-6

    def __post_init__(self):
        if self.lam < 0:
            raise ValueError("ridge coefficient must be >= 0")
        if self.max_iters < 1 or self.step <= 0 or self.tol <= 0:
            raise ValueError("max_iters >= 1, step > 0 and tol > 0 required")


def _sigmoid(t: np.ndarray) -> np.ndarray:
    out = np.empty_like(t)
    pos = t >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-t[pos]))
    e = np.exp(t[~pos])
    out[~pos] = e / (1.0 + e)
    return out


def weighted_logistic_loss(theta, intercept, X, y, weights, lam) -> float:
    """(1/sum w) * sum_i w_i * log(1 + exp(-y_i (theta.x_i + b))) + (lam/2)||theta||^2."""
    z = X @ theta + intercept
    margins = -y * z
    w = np.asarray(weights, dtype=np.float64)
    data = float(np.dot(w, np.logaddexp(0.0, margins)) / np.sum(w))
    return data + 0.5 * lam * float(np.dot(theta, theta))


def weighted_logistic_grad(theta, intercept, X, y, weights, lam):
    """Analytic gradient of ``weighted_logistic_loss`` w.r.t. (theta, intercept)."""
    z = X @ theta + intercept
    w = np.asarray(weights, dtype=np.float64)
    coeff = w * (-y) * _sigmoid(-y * z) / np.sum(w)
    return X.T @ coeff + lam * theta, float(np.sum(coeff))


def _descend(loss_fn, grad_fn, theta, intercept, hyper: LogRegHyper):
    """Full-batch descent with step halving on any loss increase.

    The step is halved (up to 20 times per iteration) until the candidate
    does not increase the loss, so the loss sequence is non-increasing.
    """
    loss = loss_fn(theta, intercept)
    if not math.isfinite(loss):
        raise RuntimeError("non-finite loss at initialization")
    step = hyper.step
    for _ in range(hyper.max_iters):
        g_theta, g_b = grad_fn(theta, intercept)
        if math.hypot(float(np.linalg.norm(g_theta)), g_b) <= hyper.tol:
            break
        accepted = False
        for _ in range(21):
            cand_theta = theta - step * g_theta
            cand_b = intercept - step * g_b
            cand_loss = loss_fn(cand_theta, cand_b)
            if math.isfinite(cand_loss) and cand_loss <= loss:
                accepted = True
                break
            step *= 0.5
        if not accepted:
            break
        theta, intercept, loss = cand_theta, cand_b, cand_loss
    if not math.isfinite(loss):
        raise RuntimeError("logistic fit diverged to a non-finite loss")
    return theta, intercept


def fit_logreg_weighted(
    ds: Dataset, cols, weights=None, hyper: LogRegHyper = LogRegHyper()
) -> LinearClassifier:
    """Minimize the weighted ridge-regularized logistic loss on ``cols``.

    Stops at the gradient-norm tolerance or after ``max_iters`` iterations
    and returns the classifier (theta, b) restricted to those columns.
    """
    cols = tuple(int(c) for c in cols)
    if len(cols) == 0:
        raise ValueError("fit requires a non-empty column set")
    if weights is None:
        weights = np.ones(ds.n)
    w = np.asarray(weights, dtype=np.float64)
    if w.shape != (ds.n,) or not np.all(w > 0):
        raise ValueError("weights must be strictly positive, one per row")

    X = ds.X[:, list(cols)]
    y = ds.y.astype(np.float64)
    theta0 = np.zeros(X.shape[1])
    theta, b = _descend(
        lambda t, c: weighted_logistic_loss(t, c, X, y, w, hyper.lam),
        lambda t, c: weighted_logistic_grad(t, c, X, y, w, hyper.lam),
        theta0,
        0.0,
        hyper,
    )
    return LinearClassifier(coeffs=theta, intercept=b, cols=cols)


def fit_logreg(ds: Dataset, cols, hyper: LogRegHyper = LogRegHyper()) -> LinearClassifier:
    """Unweighted logistic regression; identical to unit-weight fitting."""
    return fit_logreg_weighted(ds, cols, None, hyper)


def fit_dp_logreg(
    ds: Dataset,
    epsilon: float,
    hyper: LogRegHyper = LogRegHyper(),
    rng: np.random.Generator = None,
    *,
    lam_cap: float = 10.0,
) -> LinearClassifier:
    """Epsilon-DP logistic regression by objective perturbation.

    Appends a constant column, rescales rows to norm at most one, and
    minimizes

        (1/n) sum_i log(1 + exp(-y_i theta.x_i)) + (lam/2)||theta||^2
            + (b . theta)/n,

    where the direction of b is uniform and ||b|| ~ Gamma(d, 2/eps') with
    eps' = eps - 2*ln(1 + 1/(4*n*lam)). If eps' would be non-positive, lam
    is raised to 1/(4n(e^{eps/4}-1)), which makes eps' = eps/2; if that
    exceeds ``lam_cap`` the instance is too small and the fit fails.

    Consumes exactly d+1 draws from ``rng`` (one gamma, d normals), where d
    counts the constant column.
    """
    if not epsilon > 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    if rng is None:
        raise ValueError("fit_dp_logreg requires an explicit rng")

    n = ds.n
    lam = hyper.lam
    eps_prime = epsilon - 2.0 * math.log(1.0 + 1.0 / (4.0 * n * lam))
    if eps_prime <= 0:
        lam = 1.0 / (4.0 * n * (math.exp(epsilon / 4.0) - 1.0))
        if lam > lam_cap:
            raise ValueError(
                f"epsilon'={eps_prime:.3g} is unfixable: required lam {lam:.3g} "
                f"exceeds the admissible cap {lam_cap} (n={n} too small for eps={epsilon})"
            )
        eps_prime = epsilon / 2.0

    Xc = np.hstack([ds.X, np.ones((n, 1))])
    scale = max(1.0, float(np.max(np.linalg.norm(Xc, axis=1))))
    Xs = Xc / scale
    y = ds.y.astype(np.float64)
    d = Xs.shape[1]

    # Gamma(d, 2/eps') norm with a uniform direction gives ||b|| the density
    # proportional to exp(-eps' ||b|| / 2). Draws happen even at eps'=inf
    # (they are then zero) so the draw count never depends on the data.
    gamma_scale = 0.0 if math.isinf(eps_prime) else 2.0 / eps_prime
    norm_b = rng.gamma(shape=d, scale=gamma_scale)
    direction = rng.normal(size=d)
    direction /= np.linalg.norm(direction)
    b_vec = norm_b * direction

    ones = np.ones(n)

    def loss(t, _c):
        return weighted_logistic_loss(t, 0.0, Xs, y, ones, lam) + float(np.dot(b_vec, t)) / n

    def grad(t, _c):
        g_t, _ = weighted_logistic_grad(t, 0.0, Xs, y, ones, lam)
        return g_t + b_vec / n, 0.0

    theta, _ = _descend(loss, grad, np.zeros(d), 0.0, hyper)
    return LinearClassifier(
        coeffs=theta[:-1] / scale,
        intercept=float(theta[-1]) / scale,
        cols=tuple(range(ds.d)),
    )


@dataclass(frozen=True)
class PateConfig:
    """Teacher-ensemble settings for the noisy-vote baseline."""

    k_teachers: int = 25
    student_hyper: LogRegHyper = field(default_factory=LogRegHyper)
    teacher_hyper: LogRegHyper = field(default_factory=LogRegHyper)

    def __post_init__(self):
        if self.k_teachers < 2:
            raise ValueError("need at least two teachers")


class PateModel:
    """Teachers on private columns vote a label feature for a public student.

    Each vote query costs a slice of the budget: the whole epsilon is spread
    over ``queries`` query events by basic composition, and both label
    counts are released per query, so each count is perturbed with
    Lap(2 * queries / epsilon) (one individual's private features move at
    most one teacher's vote, so each count has sensitivity 1). Re-querying
    a row draws fresh noise and therefore costs another event; the budget
    must cover every event, not just distinct points.

    Prediction is stateful: it consumes noise draws from the model's rng,
    two per predicted row.
    """

    def __init__(self, teachers, student, public_cols, vote_scale, rng):
        self.teachers = teachers
        self.student = student
        self.public_cols = tuple(public_cols)
        self.vote_scale = vote_scale
        self._rng = rng

    def noisy_votes(self, X: np.ndarray) -> np.ndarray:
        """+/-1 winning label per row from noise-perturbed teacher vote counts."""
        plus = np.zeros(X.shape[0])
        for teacher in self.teachers:
            plus += teacher.predict(X) == 1
        minus = len(self.teachers) - plus
        if self.vote_scale > 0:
            plus = plus + laplace(self.vote_scale, self._rng, size=X.shape[0])
            minus = minus + laplace(self.vote_scale, self._rng, size=X.shape[0])
        return sign_labels(plus - minus)

    def _student_matrix(self, X: np.ndarray) -> np.ndarray:
        votes = self.noisy_votes(X).astype(np.float64)
        return np.hstack([X[:, list(self.public_cols)], votes[:, None]])

    def predict(self, X: np.ndarray) -> np.ndarray:
        return self.student.predict(self._student_matrix(X))


def fit_pate(
    train: Dataset,
    split: FeatureSplit,
    epsilon: float,
    cfg: PateConfig = PateConfig(),
    rng: np.random.Generator = None,
    *,
    extra_query_budget: int = 0,
) -> PateModel:
    """Train disjoint-shard teachers on private columns and a student on
    public columns plus the noisy winning-label feature.

    ``extra_query_budget`` reserves budget for vote queries made after
    training (each predicted row is one query event); the noise scale is
    fixed from queries = train.n + extra_query_budget, and querying more
    events than reserved would overrun the budget.
    """
    if not epsilon > 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    if rng is None:
        raise ValueError("fit_pate requires an explicit rng")
    split.validate_for(train.d)
    if len(split.private_cols) == 0 or len(split.public_cols) == 0:
        raise ValueError("PATE needs both public and private columns")
    if cfg.k_teachers > train.n // 10:
        raise ValueError(
            f"{cfg.k_teachers} teachers over {train.n} rows leaves shards below 10 rows"
        )

    shards = np.array_split(rng.permutation(train.n), cfg.k_teachers)
    teachers = []
    for shard in shards:
        if len(np.unique(train.y[shard])) < 2:
            raise ValueError("shard too small to train: only one label present")
        shard_ds = train.take(shard)
        teachers.append(fit_logreg(shard_ds, split.private_cols, cfg.teacher_hyper))

    queries = train.n + int(extra_query_budget)
    vote_scale = 0.0 if math.isinf(epsilon) else 2.0 * queries / epsilon
    model = PateModel(teachers, None, split.public_cols, vote_scale, rng)

    student_X = model._student_matrix(train.X)
    student_ds = Dataset(
        X=student_X,
        y=train.y,
        columns=tuple(train.columns[i] for i in split.public_cols) + (("vote", "numeric"),),
    )
    model.student = fit_logreg(student_ds, range(student_X.shape[1]), cfg.student_hyper)
    return model
