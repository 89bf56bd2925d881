"""Reference statistics: pairwise binary AUC via the rank-sum formula and
the pairwise average over all ordered class pairs.

Ties receive midranks, i.e. each tied comparison contributes one half.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata

from .dataset import ScoredDataset
from .errors import EmptyClass
from .pairs import PairIndex, enumerate_pairs


@dataclass(frozen=True)
class PairAuc:
    pair: PairIndex
    value: float


def mann_whitney_auc(dataset: ScoredDataset, pair: PairIndex) -> PairAuc:
    """Rank-sum AUC estimate for one ordered pair.

    Restricts to observations of the two classes, scores with the
    classification-class probability column, and returns U / (n0 * n1):
    the fraction of cross-class comparisons won by the positive class,
    ties counting one half.
    """
    s_pos = dataset.probs[dataset.labels == pair.pos, pair.pos]
    s_neg = dataset.probs[dataset.labels == pair.neg, pair.pos]
    n0, n1 = s_pos.size, s_neg.size
    if n0 == 0 or n1 == 0:
        raise EmptyClass(f"pair {pair.header} has an empty class")
    ranks = rankdata(np.concatenate([s_pos, s_neg]))
    u = ranks[:n0].sum() - n0 * (n0 + 1) / 2.0
    return PairAuc(pair, float(u / (n0 * n1)))


def hand_till_m(dataset: ScoredDataset, symmetrized: bool = False) -> float:
    """Average pairwise AUC over all k(k-1) ordered pairs.

    With symmetrized=True each unordered pair contributes the mean of its
    two directed AUCs (the original formulation); numerically this equals
    the plain ordered average, so the flag only changes the summation path.
    """
    pairs = enumerate_pairs(dataset.k)
    values = {(p.pos, p.neg): mann_whitney_auc(dataset, p).value for p in pairs}
    if symmetrized:
        acc = [
            0.5 * (values[(i, j)] + values[(j, i)])
            for i, j in values
            if i < j
        ]
        return float(np.mean(acc))
    return float(np.mean(list(values.values())))
