"""Stacked pairwise TPR/FPR matrices over a threshold-quantile grid.

A k-class problem is reduced to K = k(k-1) ordered one-vs-one problems.
For the pair (i, j), observations of classes i and j are kept, the class-i
probability column is the score, and thresholds are empirical quantiles of
those scores at a decreasing grid of levels. An observation is classified
positive when its score is strictly greater than the threshold.
"""

from __future__ import annotations

import csv
import json
import warnings
from dataclasses import dataclass

import numpy as np

from .dataset import ScoredDataset, class_counts
from .errors import DegenerateGridWarning, EmptyScores, InvalidK

DEFAULT_T = 50


@dataclass(frozen=True)
class PairIndex:
    """Ordered class pair: `pos` is the classification class, `neg` the reference."""

    pos: int
    neg: int
    flat: int

    def __post_init__(self):
        if self.pos == self.neg:
            raise InvalidK(f"pair classes must differ, got ({self.pos}, {self.neg})")

    @property
    def header(self) -> str:
        return f"{self.pos}>{self.neg}"


def enumerate_pairs(k: int) -> list[PairIndex]:
    """All k(k-1) ordered pairs in the fixed order (0,1),(0,2),...,(1,0),(1,2),..."""
    if k < 2:
        raise InvalidK(f"need k >= 2, got {k}")
    pairs = []
    for i in range(k):
        for j in range(k):
            if j != i:
                pairs.append(PairIndex(i, j, len(pairs)))
    return pairs


def default_levels(T: int = DEFAULT_T) -> np.ndarray:
    """T quantile levels, evenly spaced and decreasing from 1 to 0 inclusive."""
    if T < 2:
        raise ValueError(f"need T >= 2, got {T}")
    return np.linspace(1.0, 0.0, T)


def _check_levels(levels: np.ndarray) -> np.ndarray:
    levels = np.asarray(levels, dtype=float)
    if levels.ndim != 1 or levels.size < 1:
        raise ValueError("levels must be a 1-D sequence")
    if levels.min() < 0.0 or levels.max() > 1.0:
        raise ValueError("levels must lie in [0, 1]")
    if levels.size > 1 and not np.all(np.diff(levels) < 0):
        raise ValueError("levels must be strictly decreasing")
    return levels


def threshold_grid(scores, levels) -> np.ndarray:
    """Empirical quantiles of `scores` at decreasing `levels` (linear interpolation)."""
    scores = np.asarray(scores, dtype=float)
    if scores.size == 0:
        raise EmptyScores("cannot take quantiles of an empty score vector")
    levels = _check_levels(levels)
    return np.quantile(scores, levels)


@dataclass(frozen=True)
class PairwiseRates:
    """Pairwise rate matrices: T thresholds (rows) by K = k(k-1) pairs (columns).

    `mtp[t, l]` / `mfp[t, l]` are the fractions of class-pos(l) / class-neg(l)
    observations whose pos(l)-column probability exceeds `thresholds[t, l]`.
    `n_pos` and `n_neg` are the per-pair positive/negative cardinalities, so
    rate times cardinality is always an integer count.
    """

    mtp: np.ndarray
    mfp: np.ndarray
    thresholds: np.ndarray
    n_pos: np.ndarray
    n_neg: np.ndarray
    quantile_levels: np.ndarray

    def __post_init__(self):
        for name in ("mtp", "mfp", "thresholds", "n_pos", "n_neg", "quantile_levels"):
            arr = np.asarray(getattr(self, name))
            arr = arr.astype(np.int64) if name in ("n_pos", "n_neg") else arr.astype(float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        T, K = self.mtp.shape
        if self.mfp.shape != (T, K) or self.thresholds.shape != (T, K):
            raise ValueError("mtp, mfp and thresholds must share shape (T, K)")
        if self.n_pos.shape != (K,) or self.n_neg.shape != (K,):
            raise ValueError("n_pos and n_neg must have length K")
        if self.quantile_levels.shape != (T,):
            raise ValueError("quantile_levels must have length T")

    @property
    def T(self) -> int:
        return self.mtp.shape[0]

    @property
    def K(self) -> int:
        return self.mtp.shape[1]

    @property
    def k(self) -> int:
        # K = k(k-1)
        return int(round((1 + np.sqrt(1 + 4 * self.K)) / 2))

    def pairs(self) -> list[PairIndex]:
        return enumerate_pairs(self.k)

    def stacked(self) -> np.ndarray:
        """The 2T x K matrix with TPR rows on top of FPR rows."""
        return np.vstack([self.mtp, self.mfp])

    def trials(self) -> np.ndarray:
        """Binomial sizes per cell of the stacked matrix: n_pos then n_neg rows."""
        T, K = self.mtp.shape
        top = np.broadcast_to(self.n_pos.astype(float), (T, K))
        bottom = np.broadcast_to(self.n_neg.astype(float), (T, K))
        return np.vstack([top, bottom])


def rate_matrices(dataset: ScoredDataset, levels=None) -> PairwiseRates:
    """Build the pairwise TPR/FPR matrices for every ordered class pair.

    Thresholds for pair (i, j) are quantiles of the class-i probability
    column restricted to observations of classes i and j. When those scores
    are all identical the quantile grid is degenerate (every rate would be
    zero under the strict rule); the column then falls back to an absolute
    threshold grid equal to the quantile levels themselves, turning the
    column into a step function, and a DegenerateGridWarning is emitted.
    """
    if levels is None:
        levels = default_levels()
    levels = _check_levels(levels)
    T = levels.size
    if T < 2:
        raise ValueError("need at least two threshold levels")
    counts = class_counts(dataset)
    pairs = enumerate_pairs(dataset.k)
    K = len(pairs)
    mtp = np.empty((T, K))
    mfp = np.empty((T, K))
    thresholds = np.empty((T, K))
    n_pos = np.empty(K, dtype=np.int64)
    n_neg = np.empty(K, dtype=np.int64)
    masks = [dataset.labels == c for c in range(dataset.k)]
    for pair in pairs:
        s_pos = dataset.probs[masks[pair.pos], pair.pos]
        s_neg = dataset.probs[masks[pair.neg], pair.pos]
        both = np.concatenate([s_pos, s_neg])
        if both.max() == both.min():
            warnings.warn(
                f"pair {pair.header}: all scores equal {both[0]!r}; "
                "using absolute thresholds at the quantile levels",
                DegenerateGridWarning,
                stacklevel=2,
            )
            thr = levels.copy()
        else:
            thr = threshold_grid(both, levels)
        thresholds[:, pair.flat] = thr
        mtp[:, pair.flat] = np.mean(s_pos[:, None] > thr[None, :], axis=0)
        mfp[:, pair.flat] = np.mean(s_neg[:, None] > thr[None, :], axis=0)
        n_pos[pair.flat] = counts[pair.pos]
        n_neg[pair.flat] = counts[pair.neg]
    return PairwiseRates(mtp, mfp, thresholds, n_pos, n_neg, levels)


def rates_to_csv(rates: PairwiseRates, tp_path, fp_path) -> None:
    """Write the TPR and FPR matrices as CSV, one file per matrix."""
    headers = [p.header for p in rates.pairs()]
    for path, mat in ((tp_path, rates.mtp), (fp_path, rates.mfp)):
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["level"] + headers)
            for level, row in zip(rates.quantile_levels, mat):
                writer.writerow([f"{level:.17g}"] + [f"{x:.17g}" for x in row])


def rates_to_json(rates: PairwiseRates, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(
            {
                "mtp": rates.mtp.tolist(),
                "mfp": rates.mfp.tolist(),
                "thresholds": rates.thresholds.tolist(),
                "n_pos": rates.n_pos.tolist(),
                "n_neg": rates.n_neg.tolist(),
                "quantile_levels": rates.quantile_levels.tolist(),
            },
            fh,
        )


def rates_from_json(path) -> PairwiseRates:
    with open(path, "r", encoding="utf-8") as fh:
        obj = json.load(fh)
    return PairwiseRates(
        np.array(obj["mtp"]),
        np.array(obj["mfp"]),
        np.array(obj["thresholds"]),
        np.array(obj["n_pos"]),
        np.array(obj["n_neg"]),
        np.array(obj["quantile_levels"]),
    )
