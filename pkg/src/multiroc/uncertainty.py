"""Parametric bootstrap of the fitted binomial model.

Each replicate redraws every cell count from Binomial(trials, logistic(eta)),
rebuilds the rate matrices, refits with the same costs, and recomputes the
area summary. Replicate b uses an RNG stream derived from (seed, b), so the
sample vector is independent of execution order and bitwise reproducible.
"""

from __future__ import annotations

import csv
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .errors import InsufficientReplicates, MismatchedB
from .factorization import CostWeights, FactorizationFit, center, fit
from .pairs import PairwiseRates
from .summary import RocCurve, curve, d_statistic


@dataclass(frozen=True)
class BootstrapResult:
    """Bootstrap samples of the D statistic with a percentile interval."""

    d_samples: np.ndarray
    ci: tuple[float, float]
    curves: list[RocCurve] | None
    seed: int
    B: int
    gamma: float
    dropped: int


def bootstrap(
    rates: PairwiseRates,
    fit_result: FactorizationFit,
    costs: CostWeights | None = None,
    B: int = 100,
    gamma: float = 0.95,
    seed: int = 0,
    keep_curves: bool = False,
    max_workers: int | None = None,
    fit_options: dict | None = None,
) -> BootstrapResult:
    """Percentile bootstrap CI for the D statistic at level gamma.

    Replicates whose refit fails to converge are dropped; more than 20%
    drops raise InsufficientReplicates.
    """
    if B < 2:
        raise ValueError(f"need B >= 2, got {B}")
    if not fit_result.converged:
        raise ValueError("bootstrap requires a converged fit")
    if not 0.0 < gamma < 1.0:
        raise ValueError(f"gamma must be in (0, 1), got {gamma}")
    fit_options = fit_options or {}
    mu = expit(fit_result.eta)
    trials = rates.trials().astype(np.int64)
    T = rates.T

    def one(rep: int):
        rng = np.random.default_rng([int(seed), int(rep)])
        counts = rng.binomial(trials, mu)
        m = counts / trials
        resampled = PairwiseRates(
            m[:T], m[T:], rates.thresholds, rates.n_pos, rates.n_neg,
            rates.quantile_levels,
        )
        refit = fit(resampled, costs, **fit_options)
        if not refit.converged:
            return None
        roc = curve(center(refit), rates.quantile_levels)
        return d_statistic(roc), roc

    if max_workers and max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            outcomes = list(pool.map(one, range(B)))
    else:
        outcomes = [one(rep) for rep in range(B)]

    kept = [o for o in outcomes if o is not None]
    dropped = B - len(kept)
    if dropped > 0.2 * B:
        raise InsufficientReplicates(
            f"{dropped} of {B} bootstrap refits failed to converge"
        )
    d_samples = np.array([d for d, _ in kept])
    lo, hi = np.quantile(d_samples, [(1.0 - gamma) / 2.0, (1.0 + gamma) / 2.0])
    curves = [c for _, c in kept] if keep_curves else None
    return BootstrapResult(
        d_samples=d_samples,
        ci=(float(lo), float(hi)),
        curves=curves,
        seed=int(seed),
        B=B,
        gamma=gamma,
        dropped=dropped,
    )


@dataclass(frozen=True)
class RankingTable:
    """Estimated probability of each observed model ordering (best first)."""

    models: tuple[str, ...]
    rows: dict[tuple[str, ...], float]

    def __post_init__(self):
        total = sum(self.rows.values())
        if self.rows and abs(total - 1.0) > 1e-9:
            raise ValueError(f"ranking probabilities sum to {total}, not 1")
        valid = set(self.models)
        for perm in self.rows:
            if set(perm) != valid or len(perm) != len(self.models):
                raise ValueError(f"{perm} is not a permutation of {self.models}")


def ranking_probabilities(
    results: list[tuple[str, BootstrapResult]],
) -> RankingTable:
    """Fraction of replicates realizing each ordering of the models by D.

    Replicates are paired by index across models; ties in a replicate are
    broken toward the earlier model in input order. Orderings that never
    occur are absent from the table.
    """
    if not results:
        raise MismatchedB("need at least one model")
    names = tuple(name for name, _ in results)
    bs = {res.d_samples.size for _, res in results}
    if len(bs) != 1:
        raise MismatchedB(f"unequal replicate counts: {sorted(bs)}")
    (b,) = bs
    samples = np.array([res.d_samples for _, res in results])  # (models, B)
    counts: dict[tuple[str, ...], int] = {}
    for rep in range(b):
        order = sorted(range(len(names)), key=lambda m: (-samples[m, rep], m))
        key = tuple(names[m] for m in order)
        counts[key] = counts.get(key, 0) + 1
    rows = {key: cnt / b for key, cnt in counts.items()}
    return RankingTable(models=names, rows=rows)


def bootstrap_to_json(result: BootstrapResult, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(
            {
                "d_samples": result.d_samples.tolist(),
                "ci": list(result.ci),
                "gamma": result.gamma,
                "seed": result.seed,
                "B": result.B,
                "dropped": result.dropped,
            },
            fh,
        )


def band_to_csv(result: BootstrapResult, path, grid_size: int = 101) -> None:
    """Pointwise 2.5%/97.5% envelope of the bootstrap curves on a common x grid."""
    if not result.curves:
        raise ValueError("bootstrap was run without keep_curves=True")
    grid = np.linspace(0.0, 1.0, grid_size)
    ys = np.array([np.interp(grid, c.x, c.y) for c in result.curves])
    lo, hi = np.quantile(ys, [0.025, 0.975], axis=0)
    med = np.median(ys, axis=0)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "lower", "median", "upper"])
        for row in zip(grid, lo, med, hi):
            writer.writerow([f"{val:.17g}" for val in row])


def ranking_to_csv(table: RankingTable, path, dataset_name: str = "") -> None:
    """One row of ordering probabilities, orderings as 'a>b>c' column headers."""
    keys = sorted(table.rows, key=lambda k: -table.rows[k])
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow((["dataset"] if dataset_name else []) + [">".join(k) for k in keys])
        writer.writerow(
            ([dataset_name] if dataset_name else [])
            + [f"{table.rows[k]:.4f}" for k in keys]
        )
