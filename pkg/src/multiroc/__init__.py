"""Multiclass ROC curves and AUC-like summaries via weighted rank-1
binomial matrix factorization."""

__version__ = "0.1.0"

from .baselines import PairAuc, hand_till_m, mann_whitney_auc
from .dataset import ScoredDataset, class_counts, load_dataset, save_dataset
from .experiments import (
    SimulationConfig,
    cost_schedule,
    dirichlet_skew,
    fit_multinomial,
    generate_multinomial,
    majority_classifier,
)
from .factorization import (
    CenteredComponents,
    CostWeights,
    FactorizationFit,
    cardinality_weights,
    center,
    deviance,
    fit,
)
from .pairs import (
    PairIndex,
    PairwiseRates,
    default_levels,
    enumerate_pairs,
    rate_matrices,
    threshold_grid,
)
from .summary import RocCurve, curve, curve_to_csv, curve_to_svg, d_statistic
from .uncertainty import (
    BootstrapResult,
    RankingTable,
    bootstrap,
    ranking_probabilities,
)

__all__ = [
    "BootstrapResult",
    "CenteredComponents",
    "CostWeights",
    "FactorizationFit",
    "PairAuc",
    "PairIndex",
    "PairwiseRates",
    "RankingTable",
    "RocCurve",
    "ScoredDataset",
    "SimulationConfig",
    "bootstrap",
    "cardinality_weights",
    "center",
    "class_counts",
    "cost_schedule",
    "curve",
    "curve_to_csv",
    "curve_to_svg",
    "d_statistic",
    "default_levels",
    "deviance",
    "dirichlet_skew",
    "enumerate_pairs",
    "fit",
    "fit_multinomial",
    "generate_multinomial",
    "hand_till_m",
    "load_dataset",
    "majority_classifier",
    "mann_whitney_auc",
    "ranking_probabilities",
    "rate_matrices",
    "save_dataset",
    "threshold_grid",
]
