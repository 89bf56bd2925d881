"""Pair enumeration, quantile threshold grids, and the rate matrices."""

import warnings

import numpy as np
import pytest

from multiroc import (
    ScoredDataset,
    default_levels,
    enumerate_pairs,
    rate_matrices,
    threshold_grid,
)
from multiroc.errors import DegenerateGridWarning, EmptyScores, InvalidK
from multiroc.pairs import rates_from_json, rates_to_csv, rates_to_json

from conftest import make_random_multiclass


def test_enumerate_pairs_k2():
    pairs = [(p.pos, p.neg) for p in enumerate_pairs(2)]
    assert pairs == [(0, 1), (1, 0)]


def test_enumerate_pairs_k3_order():
    pairs = [(p.pos, p.neg) for p in enumerate_pairs(3)]
    assert pairs == [(0, 1), (0, 2), (1, 0), (1, 2), (2, 0), (2, 1)]
    assert [p.flat for p in enumerate_pairs(3)] == list(range(6))


def test_enumerate_pairs_counts_and_errors():
    assert len(enumerate_pairs(5)) == 20
    with pytest.raises(InvalidK):
        enumerate_pairs(1)


def test_threshold_grid_order_statistics():
    thr = threshold_grid([0.1, 0.2, 0.3, 0.4, 0.5], [1.0, 0.5, 0.0])
    np.testing.assert_allclose(thr, [0.5, 0.3, 0.1])


def test_threshold_grid_constant_scores():
    thr = threshold_grid([0.4] * 10, [1.0, 0.6, 0.2])
    np.testing.assert_allclose(thr, 0.4)


def test_threshold_grid_uniform_monte_carlo():
    # quantiles of a uniform sample track the levels themselves
    rng = np.random.default_rng(3)
    scores = rng.random(10_000)
    levels = np.linspace(0.95, 0.05, 19)
    thr = threshold_grid(scores, levels)
    assert np.max(np.abs(thr - levels)) < 0.05


def test_threshold_grid_errors():
    with pytest.raises(EmptyScores):
        threshold_grid([], [1.0, 0.0])
    with pytest.raises(ValueError):
        threshold_grid([0.5], [0.0, 1.0])  # increasing levels
    with pytest.raises(ValueError):
        threshold_grid([0.5], [1.5, 0.0])  # outside [0, 1]


def test_default_levels():
    levels = default_levels(5)
    np.testing.assert_allclose(levels, [1.0, 0.75, 0.5, 0.25, 0.0])
    with pytest.raises(ValueError):
        default_levels(1)


def test_perfect_separation_binary():
    probs = np.array([[0.9, 0.1], [0.8, 0.2], [0.1, 0.9], [0.2, 0.8]])
    ds = ScoredDataset(probs, np.array([0, 0, 1, 1]))
    rates = rate_matrices(ds, np.array([1.0, 0.75, 0.5, 0.25, 0.0]))
    col = 0  # pair (0, 1)
    assert rates.mtp[:, col].max() == 1.0
    # FPR stays zero until the threshold drops below the best class-1 score
    high = rates.thresholds[:, col] >= 0.2
    assert np.all(rates.mfp[high, col] == 0.0)
    assert rates.mfp[-1, col] > 0.0  # lowest threshold classifies something


def test_binary_symmetry_complementary_columns():
    # with probs[:,1] = 1 - probs[:,0], the (0,1) TPR at level tau mirrors
    # the (1,0) FPR at level 1 - tau
    rng = np.random.default_rng(17)
    p0 = rng.random(40)
    labels = np.concatenate([np.zeros(20, int), np.ones(20, int)])
    ds = ScoredDataset(np.column_stack([p0, 1.0 - p0]), labels)
    levels = np.linspace(0.98, 0.02, 25)  # symmetric: levels + reversed = 1
    rates = rate_matrices(ds, levels)
    T = levels.size
    for t in range(T):
        assert rates.mtp[t, 0] == pytest.approx(1.0 - rates.mfp[T - 1 - t, 1], abs=1e-12)


def test_random_classifier_rates_agree():
    ds = make_random_multiclass(23, n=4000, k=3)
    rates = rate_matrices(ds, np.linspace(0.9, 0.1, 9))
    for pair in rates.pairs():
        n0 = rates.n_pos[pair.flat]
        n1 = rates.n_neg[pair.flat]
        for t in range(rates.T):
            p = rates.mfp[t, pair.flat]
            se = np.sqrt(max(p * (1 - p), 1e-4) * (1 / n0 + 1 / n1))
            assert abs(rates.mtp[t, pair.flat] - p) < 3 * se


def test_column_monotonicity_and_integrality(random_multiclass):
    rates = rate_matrices(random_multiclass, default_levels(20))
    assert np.all(np.diff(rates.mtp, axis=0) >= 0)
    assert np.all(np.diff(rates.mfp, axis=0) >= 0)
    counts_tp = rates.mtp * rates.n_pos
    counts_fp = rates.mfp * rates.n_neg
    np.testing.assert_allclose(counts_tp, np.round(counts_tp), atol=1e-9)
    np.testing.assert_allclose(counts_fp, np.round(counts_fp), atol=1e-9)


def test_permutation_invariance(random_multiclass):
    levels = default_levels(10)
    base = rate_matrices(random_multiclass, levels)
    rng = np.random.default_rng(1)
    perm = rng.permutation(random_multiclass.n)
    shuffled = ScoredDataset(
        random_multiclass.probs[perm], random_multiclass.labels[perm]
    )
    other = rate_matrices(shuffled, levels)
    np.testing.assert_array_equal(base.mtp, other.mtp)
    np.testing.assert_array_equal(base.mfp, other.mfp)
    # quantile interpolation accumulates in a data-dependent order, so the
    # thresholds can differ by a rounding error even though the rates agree
    np.testing.assert_allclose(base.thresholds, other.thresholds, atol=1e-12)


def test_duplication_doubles_counts_only(random_multiclass):
    levels = default_levels(10)
    base = rate_matrices(random_multiclass, levels)
    doubled = ScoredDataset(
        np.vstack([random_multiclass.probs, random_multiclass.probs]),
        np.concatenate([random_multiclass.labels, random_multiclass.labels]),
    )
    other = rate_matrices(doubled, levels)
    # interpolated quantiles of the doubled sample can land up to one
    # observation away from the originals, so rates may move by ~1/count
    tol = 2.0 / min(base.n_pos.min(), base.n_neg.min())
    np.testing.assert_allclose(other.mtp, base.mtp, atol=tol)
    np.testing.assert_allclose(other.mfp, base.mfp, atol=tol)
    np.testing.assert_array_equal(other.n_pos, 2 * base.n_pos)
    np.testing.assert_array_equal(other.n_neg, 2 * base.n_neg)


def test_degenerate_column_becomes_step():
    # constant scores: absolute thresholds at the levels, column = step function
    n = 40
    probs = np.tile([0.7, 0.1, 0.2], (n, 1))
    labels = np.concatenate([np.zeros(20, int), np.ones(10, int), np.full(10, 2)])
    ds = ScoredDataset(probs, labels)
    levels = np.linspace(1.0, 0.0, 11)
    with pytest.warns(DegenerateGridWarning):
        rates = rate_matrices(ds, levels)
    np.testing.assert_array_equal(rates.thresholds[:, 0], levels)
    np.testing.assert_array_equal(rates.mtp[:, 0], (0.7 > levels).astype(float))
    np.testing.assert_array_equal(rates.mtp[:, 0], rates.mfp[:, 0])


def test_trials_layout(random_multiclass):
    rates = rate_matrices(random_multiclass, default_levels(5))
    trials = rates.trials()
    assert trials.shape == (2 * rates.T, rates.K)
    np.testing.assert_array_equal(trials[0], rates.n_pos)
    np.testing.assert_array_equal(trials[-1], rates.n_neg)


def test_rates_serialization_round_trip(tmp_path, random_multiclass):
    rates = rate_matrices(random_multiclass, default_levels(8))
    json_path = tmp_path / "rates.json"
    rates_to_json(rates, json_path)
    back = rates_from_json(json_path)
    np.testing.assert_array_equal(back.mtp, rates.mtp)
    np.testing.assert_array_equal(back.mfp, rates.mfp)
    np.testing.assert_array_equal(back.n_pos, rates.n_pos)

    rates_to_csv(rates, tmp_path / "tp.csv", tmp_path / "fp.csv")
    header = (tmp_path / "tp.csv").read_text().splitlines()[0]
    assert header.split(",")[1:] == [p.header for p in rates.pairs()]
