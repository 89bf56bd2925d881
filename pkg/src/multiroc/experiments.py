"""Seeded generators for the simulation studies.

Covers: multinomial-regression data with random or argmax labels, a
maximum-likelihood multinomial trainer on a covariate prefix, Dirichlet
class-skew resampling, the naive majority classifier, and the
misclassification-cost schedule parameterized by c.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize
from scipy.special import logsumexp, softmax

from .dataset import ScoredDataset
from .errors import EmptyClassAfterSampling, SeparationWarning
from .factorization import CostWeights
from .pairs import enumerate_pairs


@dataclass(frozen=True)
class SimulationConfig:
    n: int
    p: int
    k: int
    d: int
    seed: int
    label_mode: str = "random"

    def __post_init__(self):
        if self.k < 2:
            raise ValueError(f"need k >= 2, got {self.k}")
        if not 1 <= self.d <= self.p:
            raise ValueError(f"need 1 <= d <= p, got d={self.d}, p={self.p}")
        if self.n < 1:
            raise ValueError(f"need n >= 1, got {self.n}")
        if self.label_mode not in ("random", "deterministic"):
            raise ValueError(f"unknown label_mode {self.label_mode!r}")


def generate_multinomial(config: SimulationConfig):
    """Simulate covariates, coefficients, true probabilities and labels.

    X rows are standard normal in dimension p; the coefficient matrix has
    k-1 columns with unit-variance normal entries centered at 1. The class
    probabilities are the softmax of (1, X_i B): the first class carries a
    fixed unit logit. Labels are drawn from the row probabilities (random
    mode) or set to the row argmax (deterministic mode).

    Returns (dataset-with-true-probabilities, X, B).
    """
    rng = np.random.default_rng(config.seed)
    x = rng.standard_normal((config.n, config.p))
    b = rng.normal(1.0, 1.0, (config.p, config.k - 1))
    logits = np.column_stack([np.ones(config.n), x @ b])
    probs = softmax(logits, axis=1)
    if config.label_mode == "deterministic":
        labels = probs.argmax(axis=1)
    else:
        u = rng.random(config.n)
        labels = (probs.cumsum(axis=1) < u[:, None]).sum(axis=1)
    return ScoredDataset(probs, labels), x, b


def _nll_and_grad(coef_flat, x1, onehot, n):
    d1, k = x1.shape[1], onehot.shape[1]
    coef = coef_flat.reshape(d1, k - 1)
    logits = np.column_stack([np.zeros(x1.shape[0]), x1 @ coef])
    lse = logsumexp(logits, axis=1)
    nll = (lse.sum() - (logits * onehot).sum()) / n
    probs = np.exp(logits - lse[:, None])
    grad = x1.T @ (probs[:, 1:] - onehot[:, 1:]) / n
    return nll, grad.ravel()


def fit_multinomial(
    covariates: np.ndarray,
    labels: np.ndarray,
    *,
    k: int | None = None,
    max_iter: int = 1000,
    tol: float = 1e-8,
) -> ScoredDataset:
    """Maximum-likelihood multinomial-logistic probabilities on the same rows.

    An intercept column is added; class 0 is the reference. Optimized with
    L-BFGS on the analytic gradient, relative log-likelihood tolerance
    `tol`, at most `max_iter` iterations. Emits SeparationWarning when any
    fitted probability exceeds 1 - 1e-12 (the estimates are returned anyway).
    """
    x = np.asarray(covariates, dtype=float)
    labels = np.asarray(labels)
    if x.ndim != 2 or x.shape[0] != labels.shape[0]:
        raise ValueError("covariates must be (n, d) aligned with labels")
    n = x.shape[0]
    if k is None:
        k = int(labels.max()) + 1
    x1 = np.column_stack([np.ones(n), x])
    if np.linalg.matrix_rank(x1) < x1.shape[1]:
        raise ValueError("design matrix is rank deficient after adding intercept")
    onehot = np.zeros((n, k))
    onehot[np.arange(n), labels] = 1.0
    res = minimize(
        _nll_and_grad,
        np.zeros(x1.shape[1] * (k - 1)),
        args=(x1, onehot, n),
        jac=True,
        method="L-BFGS-B",
        options={"maxiter": max_iter, "ftol": tol},
    )
    coef = res.x.reshape(x1.shape[1], k - 1)
    probs = softmax(np.column_stack([np.zeros(n), x1 @ coef]), axis=1)
    if probs.max() > 1.0 - 1e-12:
        warnings.warn(
            "fitted probabilities reach the boundary: perfect separation",
            SeparationWarning,
            stacklevel=2,
        )
    return ScoredDataset(probs, labels)


def dirichlet_skew(
    dataset: ScoredDataset,
    alpha: float,
    seed: int,
    n_target: int | None = None,
):
    """Subsample classes disproportionately by a Dirichlet weight vector.

    Draws w ~ Dirichlet(alpha, ..., alpha) and keeps round(w_c * n_target)
    observations of class c without replacement (capped by the class pool).
    A draw that rounds any class to zero is rejected and redrawn, up to 100
    attempts. Observation rows are kept untouched; only membership changes.

    Returns (resampled dataset, realized skewness max_i,j w_i/w_j).
    """
    if alpha <= 0:
        raise ValueError(f"need alpha > 0, got {alpha}")
    rng = np.random.default_rng(seed)
    k = dataset.k
    pools = [np.flatnonzero(dataset.labels == c) for c in range(k)]
    if n_target is None:
        n_target = dataset.n
    for _attempt in range(100):
        w = rng.dirichlet(np.full(k, float(alpha)))
        sizes = np.minimum(
            np.round(w * n_target).astype(int), [p.size for p in pools]
        )
        if sizes.min() >= 1:
            break
    else:
        raise EmptyClassAfterSampling(
            "a class rounded to zero observations in 100 Dirichlet draws"
        )
    keep = np.concatenate(
        [rng.choice(pool, size=size, replace=False) for pool, size in zip(pools, sizes)]
    )
    keep.sort()
    z = float(w.max() / w.min())
    return ScoredDataset(dataset.probs[keep], dataset.labels[keep]), z


def majority_classifier(
    dataset: ScoredDataset, majority_class: int, margin: float = 0.2
) -> ScoredDataset:
    """Naive classifier: every row puts 0.5 + margin on the majority class
    and splits the remainder evenly over the other classes."""
    k = dataset.k
    if not 0 <= majority_class < k:
        raise ValueError(f"majority_class {majority_class} invalid for k={k}")
    row = np.full(k, (0.5 - margin) / (k - 1))
    row[majority_class] = 0.5 + margin
    probs = np.tile(row, (dataset.n, 1))
    return ScoredDataset(probs, dataset.labels)


def cost_schedule(k: int, majority_class: int, c: float, T: int) -> CostWeights:
    """Cost weights scaling the majority class by c.

    TPR weights: c on columns whose classification class is the majority,
    1/c on columns whose reference class is the majority, 1 elsewhere;
    FPR weights take the reciprocal pattern. Constant down each column.
    """
    if c <= 0:
        raise ValueError(f"need c > 0, got {c}")
    pairs = enumerate_pairs(k)
    col = np.ones(len(pairs))
    for pair in pairs:
        if pair.pos == majority_class:
            col[pair.flat] = c
        elif pair.neg == majority_class:
            col[pair.flat] = 1.0 / c
    q_tp = np.tile(col, (T, 1))
    q_fp = np.tile(1.0 / col, (T, 1))
    return CostWeights(q_tp, q_fp)
