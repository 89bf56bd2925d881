"""Weighted rank-1 binomial factorization of the stacked rate matrix.

The 2T x K matrix M (TPR rows stacked on FPR rows) is modeled cell-wise as
a scaled binomial proportion with logit link and rank-1 linear predictor
eta = lambda v^T. Each cell's binomial size is the pair cardinality that
produced the rate (n_pos for TPR rows, n_neg for FPR rows); misclassification
costs enter as multiplicative weights Q on the log-likelihood, so the
effective working weight per cell is trials * Q.

Fitting alternates Fisher-scoring updates of lambda and v, each a weighted
least-squares solve against the working response; the weighted deviance is
kept monotone by step halving. The shared threshold effect is extracted
afterwards by projecting eta onto the constant-column direction (row means).
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from scipy.special import expit, logit, xlogy

from .errors import NonPositiveWeight, NumericalDegeneracy
from .pairs import PairwiseRates

_DEN_FLOOR = 1e-280
_MU_FLOOR = 1e-15


@dataclass(frozen=True)
class CostWeights:
    """Per-cell multiplicative likelihood weights, one T x K matrix per half."""

    q_tp: np.ndarray
    q_fp: np.ndarray

    def __post_init__(self):
        q_tp = np.asarray(self.q_tp, dtype=float)
        q_fp = np.asarray(self.q_fp, dtype=float)
        if q_tp.shape != q_fp.shape or q_tp.ndim != 2:
            raise NonPositiveWeight("q_tp and q_fp must be 2-D with equal shape")
        for arr in (q_tp, q_fp):
            if not np.all(np.isfinite(arr)) or arr.min() <= 0.0:
                raise NonPositiveWeight("cost weights must be finite and > 0")
            arr.setflags(write=False)
        object.__setattr__(self, "q_tp", q_tp)
        object.__setattr__(self, "q_fp", q_fp)

    def stacked(self) -> np.ndarray:
        return np.vstack([self.q_tp, self.q_fp])


def cardinality_weights(
    rates: PairwiseRates, mode: str = "weighted", custom: CostWeights | None = None
) -> CostWeights:
    """Standard weight schedules.

    weighted:   Q = 1 everywhere, so each cell keeps its natural binomial
                weight (the pair cardinality).
    unweighted: Q = 1/trials, so every cell carries effective weight 1 and
                each binary pair counts equally regardless of class sizes.
    custom:     caller-supplied CostWeights, validated for shape.
    """
    T, K = rates.T, rates.K
    if mode == "weighted":
        ones = np.ones((T, K))
        return CostWeights(ones, ones.copy())
    if mode == "unweighted":
        q_tp = np.broadcast_to(1.0 / rates.n_pos, (T, K)).copy()
        q_fp = np.broadcast_to(1.0 / rates.n_neg, (T, K)).copy()
        return CostWeights(q_tp, q_fp)
    if mode == "custom":
        if custom is None:
            raise NonPositiveWeight("custom mode requires a CostWeights instance")
        if custom.q_tp.shape != (T, K):
            raise NonPositiveWeight(
                f"custom weights must be {(T, K)}, got {custom.q_tp.shape}"
            )
        return custom
    raise ValueError(f"unknown weight mode {mode!r}")


@dataclass(frozen=True)
class FactorizationFit:
    """Result of the rank-1 fit.

    `lam` has length 2T (TPR rows then FPR rows), `v` has length K with
    unit norm and its first nonzero component positive; `eta` is exactly
    the outer product lam v^T. `weights` are the effective per-cell weights
    (trials * Q) used both in the updates and in the deviance.
    """

    lam: np.ndarray
    v: np.ndarray
    eta: np.ndarray
    weights: np.ndarray
    deviance_trace: np.ndarray
    converged: bool
    iterations: int


@dataclass(frozen=True)
class CenteredComponents:
    """Shared threshold effects (row means of eta) and the centered residual."""

    lambda0_tp: np.ndarray
    lambda0_fp: np.ndarray
    residual: np.ndarray


def _unit_deviance(y: np.ndarray, mu: np.ndarray) -> np.ndarray:
    # standard binomial unit deviance with the 0 log 0 = 0 convention
    mu = np.clip(mu, _MU_FLOOR, 1.0 - _MU_FLOOR)
    return 2.0 * (
        xlogy(y, y) - xlogy(y, mu) + xlogy(1.0 - y, 1.0 - y) - xlogy(1.0 - y, 1.0 - mu)
    )


def deviance(rates: PairwiseRates, eta: np.ndarray, weights: np.ndarray) -> float:
    """Weighted binomial deviance of the stacked rate matrix at linear predictor eta."""
    m = rates.stacked()
    eta = np.asarray(eta, dtype=float)
    weights = np.asarray(weights, dtype=float)
    if eta.shape != m.shape or weights.shape != m.shape:
        raise ValueError(f"eta and weights must have shape {m.shape}")
    return _weighted_deviance(m, expit(eta), weights)


def _weighted_deviance(y, mu, w) -> float:
    return max(float(np.sum(w * _unit_deviance(y, mu))), 0.0)


def _leading_direction(eta0: np.ndarray, steps: int = 100, tol: float = 1e-10):
    """Leading right singular direction of eta0 by deterministic power iteration."""
    K = eta0.shape[1]
    gram = eta0.T @ eta0
    v = np.ones(K) / np.sqrt(K)
    for _ in range(steps):
        nxt = gram @ v
        norm = np.linalg.norm(nxt)
        if norm == 0.0:
            break
        nxt /= norm
        if np.linalg.norm(nxt - v) < tol:
            v = nxt
            break
        v = nxt
    return _fix_sign(eta0 @ v, v)


def _fix_sign(lam: np.ndarray, v: np.ndarray):
    nonzero = np.flatnonzero(v)
    if nonzero.size and v[nonzero[0]] < 0:
        return -lam, -v
    return lam, v


def _normalize(lam: np.ndarray, v: np.ndarray):
    norm = np.linalg.norm(v)
    if norm == 0.0:
        return lam, v
    return _fix_sign(lam * norm, v / norm)


def fit(
    rates: PairwiseRates,
    costs: CostWeights | None = None,
    *,
    max_iter: int = 500,
    tol: float = 1e-8,
    clamp_eps: float | None = None,
) -> FactorizationFit:
    """Fit the weighted rank-1 binomial model to the stacked rate matrix.

    Boundary rates are clamped into [clamp_eps, 1 - clamp_eps] before the
    working response is formed; the default clamp is the continuity
    correction 0.5 / max(trials). Initialization is the best rank-1
    least-squares approximation of the clamped logits. Convergence is a
    relative deviance change below `tol`; if max_iter is reached the best
    iterate is returned with converged=False.
    """
    m = rates.stacked()
    trials = rates.trials()
    if costs is None:
        costs = cardinality_weights(rates, "weighted")
    q = costs.stacked()
    if q.shape != m.shape:
        raise NonPositiveWeight(f"cost weights must be {rates.mtp.shape} per half")
    w = trials * q
    if clamp_eps is None:
        clamp_eps = 0.5 / trials.max()
    mc = np.clip(m, clamp_eps, 1.0 - clamp_eps)

    eta0 = logit(mc)
    lam, v = _leading_direction(eta0)
    eta = np.outer(lam, v)
    # the optimization target is the deviance of the clamped rates: it is
    # coherent with the clamped working response and keeps the optimum finite
    # when raw rates sit exactly on the boundary
    trace = [_weighted_deviance(mc, expit(eta), w)]
    converged = False
    iterations = 0

    for _ in range(max_iter):
        iterations += 1
        lam_prev, v_prev = lam, v
        mu = np.clip(expit(eta), _MU_FLOOR, 1.0 - _MU_FLOOR)
        var = mu * (1.0 - mu)
        s = w * var
        z = eta + (mc - mu) / var

        den_lam = s @ (v * v)
        if den_lam.min() < _DEN_FLOOR:
            raise NumericalDegeneracy(
                f"row normal-equation denominator underflowed "
                f"(min {den_lam.min():.3e}) at iteration {iterations}"
            )
        lam_new = ((s * z) @ v) / den_lam

        if not np.any(lam_new):
            # eta = 0 is a stationary point (e.g. constant 0.5 input)
            lam, v = lam_new, v_prev
            eta = np.outer(lam, v)
            trace.append(_weighted_deviance(mc, expit(eta), w))
            converged = True
            break

        den_v = (lam_new * lam_new) @ s
        if den_v.min() < _DEN_FLOOR:
            raise NumericalDegeneracy(
                f"column normal-equation denominator underflowed "
                f"(min {den_v.min():.3e}) at iteration {iterations}"
            )
        v_new = (lam_new @ (s * z)) / den_v

        lam_cand, v_cand = _normalize(lam_new, v_new)
        eta_cand = np.outer(lam_cand, v_cand)
        dev_cand = _weighted_deviance(mc, expit(eta_cand), w)

        # exact coordinate Fisher steps can overshoot; halve toward the
        # previous iterate until the deviance stops increasing
        step = 1.0
        for _halving in range(20):
            if dev_cand <= trace[-1] + 1e-12:
                break
            step *= 0.5
            lam_cand, v_cand = _normalize(
                lam_prev + step * (lam_new - lam_prev),
                v_prev + step * (v_new - v_prev),
            )
            eta_cand = np.outer(lam_cand, v_cand)
            dev_cand = _weighted_deviance(mc, expit(eta_cand), w)
        if dev_cand > trace[-1] + 1e-12:
            # no descent direction left; previous iterate is stationary enough
            converged = True
            break

        lam, v = lam_cand, v_cand
        eta = eta_cand
        rel = abs(trace[-1] - dev_cand) / max(trace[-1], 1e-12)
        trace.append(dev_cand)
        if rel < tol:
            converged = True
            break

    return FactorizationFit(
        lam=lam,
        v=v,
        eta=np.outer(lam, v),
        weights=w,
        deviance_trace=np.array(trace),
        converged=converged,
        iterations=iterations,
    )


def center(fit_result: FactorizationFit) -> CenteredComponents:
    """Project eta onto the constant-column direction: row means and residual."""
    eta = fit_result.eta
    if not np.all(np.isfinite(eta)):
        raise NumericalDegeneracy("eta contains non-finite values")
    lambda0 = eta.mean(axis=1)
    residual = eta - lambda0[:, None]
    T = eta.shape[0] // 2
    return CenteredComponents(
        lambda0_tp=lambda0[:T],
        lambda0_fp=lambda0[T:],
        residual=residual,
    )


def fit_to_json(fit_result: FactorizationFit, centered: CenteredComponents, path) -> None:
    """Serialize the factorization outputs (lam, v, threshold effects, trace)."""
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(
            {
                "lambda": fit_result.lam.tolist(),
                "v": fit_result.v.tolist(),
                "lambda0_tp": centered.lambda0_tp.tolist(),
                "lambda0_fp": centered.lambda0_fp.tolist(),
                "deviance_trace": fit_result.deviance_trace.tolist(),
                "converged": fit_result.converged,
                "iterations": fit_result.iterations,
            },
            fh,
        )
