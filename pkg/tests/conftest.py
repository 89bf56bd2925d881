"""Shared fixtures: small deterministic datasets reused across test modules."""

import numpy as np
import pytest

from multiroc import ScoredDataset


def make_binary(seed: int, n: int = 200, shift: float = 1.0) -> ScoredDataset:
    """Binary dataset whose class-0 scores are shifted up by `shift` logits."""
    rng = np.random.default_rng(seed)
    labels = rng.integers(0, 2, size=n)
    labels[:2] = [0, 1]  # both classes guaranteed
    logits = rng.normal(0.0, 1.5, size=n) + shift * (labels == 0)
    p0 = 1.0 / (1.0 + np.exp(-logits))
    return ScoredDataset(np.column_stack([p0, 1.0 - p0]), labels)


def make_random_multiclass(seed: int, n: int = 300, k: int = 3) -> ScoredDataset:
    """Scores independent of labels: a random classifier."""
    rng = np.random.default_rng(seed)
    probs = rng.dirichlet(np.ones(k), size=n)
    labels = np.concatenate([np.arange(k), rng.integers(0, k, size=n - k)])
    return ScoredDataset(probs, labels)


@pytest.fixture(scope="session")
def binary_dataset() -> ScoredDataset:
    return make_binary(11, n=400)


@pytest.fixture(scope="session")
def random_multiclass() -> ScoredDataset:
    return make_random_multiclass(13, n=600, k=3)
