"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

The lines are written to the real stdout so they appear in the terminal
regardless of pytest capture. Criterion 6 is expected to fail; the analysis
of why lives in the project notes, not here.
"""

import sys
import time
import warnings

import numpy as np
import pytest
from scipy.special import expit
from sklearn.datasets import load_iris
from sklearn.metrics import roc_auc_score

from multiroc import (
    PairwiseRates,
    ScoredDataset,
    SimulationConfig,
    bootstrap,
    cardinality_weights,
    center,
    cost_schedule,
    curve,
    d_statistic,
    default_levels,
    dirichlet_skew,
    enumerate_pairs,
    fit,
    fit_multinomial,
    generate_multinomial,
    hand_till_m,
    majority_classifier,
    mann_whitney_auc,
    rate_matrices,
    ranking_probabilities,
)
from multiroc.errors import DegenerateGridWarning, SeparationWarning

from conftest import make_binary, make_random_multiclass

SEED = 42
TRACKED_FITS = []  # every fit performed by this module, checked in criterion 9


def report(num: int, ok: bool, desc: str) -> None:
    print(
        f"CRITERION {num:2d}: {'PASS' if ok else 'FAIL'} — {desc}",
        file=sys.__stdout__,
        flush=True,
    )


def tracked_fit(rates, costs=None, **opts):
    result = fit(rates, costs, **opts)
    TRACKED_FITS.append(result)
    return result


def pipeline_d(dataset: ScoredDataset, mode: str = "unweighted", T: int = 50) -> float:
    rates = rate_matrices(dataset, default_levels(T))
    result = tracked_fit(rates, cardinality_weights(rates, mode))
    assert result.converged
    return d_statistic(curve(center(result)))


@pytest.fixture(scope="module")
def sim_random():
    config = SimulationConfig(n=10_000, p=10, k=5, d=10, seed=SEED)
    return generate_multinomial(config)


def test_criterion_1_binary_equivalence():
    deviations, times = [], []
    for i in range(50):
        ds = make_binary(1000 + i, n=500, shift=0.06 * i)
        start = time.perf_counter()
        d = pipeline_d(ds, mode="weighted")
        times.append(time.perf_counter() - start)
        auc = roc_auc_score(1 - ds.labels, ds.probs[:, 0])
        deviations.append(abs(d - auc))
    ok = max(deviations) <= 0.02 and max(times) < 1.0
    report(
        1, ok,
        f"binary equivalence: max |D - AUC| = {max(deviations):.4f} (<= 0.02), "
        f"max runtime {max(times):.2f}s (< 1s)",
    )
    assert ok


def test_criterion_2_perfect_classifier():
    config = SimulationConfig(
        n=10_000, p=10, k=5, d=10, seed=SEED, label_mode="deterministic"
    )
    truth, _, _ = generate_multinomial(config)
    d = pipeline_d(truth)
    ok = d >= 0.995
    report(2, ok, f"perfect classifier: D = {d:.4f} (>= 0.995)")
    assert ok


def test_criterion_3_random_classifier(sim_random):
    truth, x, _ = sim_random
    noise = np.random.default_rng(SEED + 1).standard_normal(x.shape)
    fitted = fit_multinomial(noise, truth.labels, k=truth.k)
    d = pipeline_d(fitted)
    ok = 0.47 <= d <= 0.53
    report(3, ok, f"random classifier: D = {d:.4f} (in [0.47, 0.53])")
    assert ok


def _monotone_allowing_one_adjacent_swap(values) -> bool:
    values = list(values)
    if values == sorted(values):
        return True
    for i in range(len(values) - 1):
        swapped = values.copy()
        swapped[i], swapped[i + 1] = swapped[i + 1], swapped[i]
        if swapped == sorted(swapped):
            return True
    return False


def test_criterion_4_discriminative_ordering(sim_random):
    truth, x, _ = sim_random
    start = time.perf_counter()
    ds_values = []
    for d_cols in range(1, 11):
        fitted = fit_multinomial(x[:, :d_cols], truth.labels, k=truth.k)
        ds_values.append(pipeline_d(fitted))
    elapsed = time.perf_counter() - start
    ok = _monotone_allowing_one_adjacent_swap(ds_values) and elapsed < 120
    report(
        4, ok,
        "discriminative ordering: D(d=1..10) = "
        + ", ".join(f"{v:.3f}" for v in ds_values)
        + f"; {elapsed:.0f}s (< 120s)",
    )
    assert ok


def test_criterion_5_skew_invariance(sim_random):
    truth, x, _ = sim_random
    counts = np.bincount(truth.labels, minlength=truth.k)
    n_sub = int(counts.min())
    rng = np.random.default_rng(SEED + 17)
    balanced = np.concatenate([
        rng.choice(np.flatnonzero(truth.labels == c), n_sub, replace=False)
        for c in range(truth.k)
    ])
    balanced.sort()
    start = time.perf_counter()
    ranges = {}
    for d_cols in (2, 5, 9):
        fitted = fit_multinomial(
            x[balanced, :d_cols], truth.labels[balanced], k=truth.k
        )
        for alpha in (2, 5, 9):
            values = []
            for rep in range(30):
                skewed, _ = dirichlet_skew(
                    fitted, alpha, seed=SEED * 1000 + d_cols * 100 + alpha * 10 + rep
                )
                values.append(pipeline_d(skewed))
            ranges[(d_cols, alpha)] = max(values) - min(values)
    elapsed = time.perf_counter() - start
    worst = max(ranges.values())
    ok = worst < 0.05 and elapsed < 300
    report(
        5, ok,
        f"skew invariance: max unweighted-D range over 9 cells = {worst:.4f} "
        f"(< 0.05); {elapsed:.0f}s (< 300s)",
    )
    assert ok


def test_criterion_6_cost_weight_monotonicity(sim_random):
    truth, _, _ = sim_random
    majority = int(np.bincount(truth.labels, minlength=truth.k).argmax())
    naive = majority_classifier(truth, majority)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DegenerateGridWarning)
        rates = rate_matrices(naive, default_levels(50))
    cs = [round(0.1 * i, 1) for i in range(1, 10)] + [1.0] + [
        1.0 / (0.1 * i) for i in range(9, 0, -1)
    ]
    d_values = []
    for c in cs:
        costs = cost_schedule(truth.k, majority, c, 50)
        result = tracked_fit(rates, costs)
        d_values.append(d_statistic(curve(center(result))))
    by_c = dict(zip(cs, d_values))
    strictly_increasing = all(a < b for a, b in zip(d_values, d_values[1:]))
    ok = (
        strictly_increasing
        and 0.45 <= by_c[1.0] <= 0.55
        and by_c[10.0] > 0.9
        and by_c[0.1] < 0.1
    )
    report(
        6, ok,
        f"cost-weight monotonicity: strictly increasing = {strictly_increasing}, "
        f"D(1) = {by_c[1.0]:.4f}, D(10) = {by_c[10.0]:.4f}, D(0.1) = {by_c[0.1]:.4f}"
        + ("" if ok else " [known blocker: see decisions ledger]"),
    )
    assert ok


def test_criterion_7_u_statistic_oracle():
    rng = np.random.default_rng(SEED + 2)
    failures = 0
    for _ in range(100):
        n = int(rng.integers(10, 201))
        scores = np.round(rng.random(n), int(rng.integers(1, 4)))  # force ties
        labels = np.concatenate([[0, 1], rng.integers(0, 2, n - 2)])
        ds = ScoredDataset(np.column_stack([scores, 1 - scores]), labels)
        pair = enumerate_pairs(2)[0]
        estimate = mann_whitney_auc(ds, pair).value
        s_pos = scores[labels == 0]
        s_neg = scores[labels == 1]
        wins = sum(
            1.0 if a > b else 0.5 if a == b else 0.0 for a in s_pos for b in s_neg
        )
        exact = wins / (len(s_pos) * len(s_neg))
        if abs(estimate - exact) > 1e-12:
            failures += 1
    ok = failures == 0
    report(7, ok, f"U-statistic oracle: {100 - failures}/100 instances exact")
    assert ok


def test_criterion_8_hand_till():
    rng = np.random.default_rng(SEED + 3)
    # perfect classifier: own-class score strictly above every cross score
    n, k = 500, 4
    labels = np.concatenate([np.arange(k), rng.integers(0, k, n - k)])
    own = rng.uniform(0.8, 0.9, n)
    probs = ((1 - own) / (k - 1))[:, None] * np.ones((n, k))
    probs[np.arange(n), labels] = own
    m_perfect = hand_till_m(ScoredDataset(probs, labels))

    random_ds = make_random_multiclass(SEED + 4, n=3000, k=5)
    m_random = hand_till_m(random_ds)
    ok = m_perfect == 1.0 and 0.45 <= m_random <= 0.55
    report(
        8, ok,
        f"Hand-Till: perfect = {m_perfect} (exactly 1.0), "
        f"random = {m_random:.4f} (in [0.45, 0.55])",
    )
    assert ok


def test_criterion_9_irls_health():
    # rank-1 recovery on synthetic binomial data with known eta
    rng = np.random.default_rng(SEED + 5)
    T, k, trials = 20, 4, 10_000
    K = k * (k - 1)
    lam = rng.normal(0.0, 1.2, size=2 * T)
    v = rng.normal(size=K)
    v /= np.linalg.norm(v)
    eta_true = np.outer(lam, v)
    m = rng.binomial(trials, expit(eta_true)) / trials
    rates = PairwiseRates(
        m[:T], m[T:], np.tile(np.linspace(0.9, 0.1, T)[:, None], (1, K)),
        np.full(K, trials), np.full(K, trials), np.linspace(1.0, 0.0, T),
    )
    result = tracked_fit(rates)
    rms = float(np.sqrt(np.mean((result.eta - eta_true) ** 2)))

    bad_traces = sum(
        1 for f in TRACKED_FITS if np.any(np.diff(f.deviance_trace) > 1e-10)
    )
    ok = rms <= 0.05 and bad_traces == 0
    report(
        9, ok,
        f"IRLS health: rank-1 recovery RMS = {rms:.4f} (<= 0.05); "
        f"{len(TRACKED_FITS)} tracked fits, {bad_traces} with increasing deviance",
    )
    assert ok


def test_criterion_10_bootstrap_determinism_and_scaling():
    ds = make_random_multiclass(SEED + 6, n=2000, k=3)
    rates = rate_matrices(ds, default_levels(20))
    result = tracked_fit(rates)
    a = bootstrap(rates, result, B=24, seed=77)
    b = bootstrap(rates, result, B=24, seed=77)
    bitwise = bool(np.array_equal(a.d_samples, b.d_samples))

    big = PairwiseRates(
        rates.mtp, rates.mfp, rates.thresholds,
        4 * rates.n_pos, 4 * rates.n_neg, rates.quantile_levels,
    )
    big_fit = tracked_fit(big)
    widths, widths4 = [], []
    for seed in range(10):
        widths.append(np.subtract(*bootstrap(rates, result, B=24, seed=seed).ci[::-1]))
        widths4.append(np.subtract(*bootstrap(big, big_fit, B=24, seed=seed).ci[::-1]))
    shrinks = float(np.median(widths4)) < float(np.median(widths))
    ok = bitwise and shrinks
    report(
        10, ok,
        f"bootstrap: bitwise deterministic = {bitwise}; median CI width "
        f"{np.median(widths):.4f} -> {np.median(widths4):.4f} with 4x trials",
    )
    assert ok


def test_criterion_11_ranking_matches_baseline_on_public_data():
    iris = load_iris()
    x, labels = iris.data, iris.target
    rng = np.random.default_rng(SEED + 7)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", SeparationWarning)
        informative = fit_multinomial(x, labels)
    noise_model = fit_multinomial(rng.standard_normal(x.shape), labels)

    models = {"informative": informative, "noise": noise_model}
    boots, d_by_model, m_by_model = {}, {}, {}
    for name, ds in models.items():
        rates = rate_matrices(ds, default_levels(50))
        costs = cardinality_weights(rates, "unweighted")
        result = tracked_fit(rates, costs)
        d_by_model[name] = d_statistic(curve(center(result)))
        m_by_model[name] = hand_till_m(ds)
        boots[name] = bootstrap(rates, result, costs, B=50, seed=SEED)
    table = ranking_probabilities([(n, boots[n]) for n in models])
    m_order = tuple(sorted(models, key=lambda n: -m_by_model[n]))
    d_order = tuple(sorted(models, key=lambda n: -d_by_model[n]))
    ok = table.rows.get(m_order, 0.0) == 1.0 and d_order == m_order
    report(
        11, ok,
        f"public-data substitute: ranking P({'>'.join(m_order)}) = "
        f"{table.rows.get(m_order, 0.0):.2f} (= 1.0), D and Hand-Till orders agree",
    )
    assert ok
