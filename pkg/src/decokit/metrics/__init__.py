"""Evaluation metrics: diversity, coherence, frontier divergence, sign test."""

from .coherence import CoherenceScore, CorpusCoherence, coherence, corpus_coherence
from .diversity import (
    REP_NS,
    CorpusDiversity,
    DiversityReport,
    corpus_diversity,
    diversity,
    rep_n,
)
from .features import (
    FEATURE_NAMES,
    bigram_count_features,
    extract_features,
    mean_representation_features,
)
from .frontier import (
    DEFAULT_GRID_POINTS,
    DEFAULT_SCALING,
    FrontierScore,
    default_mixture_grid,
    frontier_from_histograms,
    frontier_score,
    kl_divergence,
    kmeans_quantize,
)
from .signtest import (
    SIGNIFICANCE_LEVEL,
    PairwiseComparison,
    SignTestResult,
    Verdict,
    exact_binomial_p,
    sign_test,
)

__all__ = [
    "CoherenceScore",
    "CorpusCoherence",
    "CorpusDiversity",
    "DEFAULT_GRID_POINTS",
    "DEFAULT_SCALING",
    "DiversityReport",
    "FEATURE_NAMES",
    "FrontierScore",
    "PairwiseComparison",
    "REP_NS",
    "SIGNIFICANCE_LEVEL",
    "SignTestResult",
    "Verdict",
    "bigram_count_features",
    "coherence",
    "corpus_coherence",
    "corpus_diversity",
    "default_mixture_grid",
    "diversity",
    "exact_binomial_p",
    "extract_features",
    "frontier_from_histograms",
    "frontier_score",
    "kl_divergence",
    "kmeans_quantize",
    "mean_representation_features",
    "rep_n",
    "sign_test",
]
