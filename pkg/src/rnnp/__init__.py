"""Prototype-based few-shot classification that tolerates corrupted support labels.

The baseline classifies queries by distance to observed-label class means.
The robust variant densifies each episode with hybrid points mixed from
support pairs, then re-estimates the prototypes with a few soft k-means
rounds over supports, hybrids, and the single query being classified; the
final support responsibilities double as rectified labels.
"""

from .datagen import (
    FILE_FORMATS,
    MixtureSpec,
    bayes_accuracy,
    generate_mixture,
    load_embeddings,
    write_embeddings,
)
from .episodes import (
    CorruptionSpec,
    EmbeddingSet,
    Episode,
    corrupt_labels,
    count_corrupted,
    sample_episode,
)
from .errors import (
    DegenerateClassError,
    DegenerateInputError,
    EmbeddingFormatError,
    InvalidInputError,
)
from .harness import (
    BENCHMARK_SEPARATION,
    ExperimentConfig,
    MethodSpec,
    default_config,
    load_pool,
    run_experiment,
    run_rectification_analysis,
    run_sweep,
    save_rectification,
    save_reports,
    save_sweep,
)
from .metrics import EvalReport, episode_accuracy, mean_ci95, paired_delta, reports_to_csv
from .nnp import ClassProbabilities, PrototypeSet, classify, compute_prototypes
from .refine import (
    CLUSTERING_MODES,
    HYBRID_LABELINGS,
    HYBRID_SOURCES,
    RefinementTrace,
    RnnpConfig,
    classify_rnnp,
    generate_hybrids,
    rectification_delta,
    refine_for_query,
    soft_assign,
    update_centers,
)
from .vecmath import (
    VALID_METRICS,
    cosine_distance,
    pairwise_distances,
    softmax,
    squared_euclidean,
    weighted_mean,
)

__version__ = "0.1.0"

__all__ = [
    "BENCHMARK_SEPARATION",
    "CLUSTERING_MODES",
    "ClassProbabilities",
    "CorruptionSpec",
    "DegenerateClassError",
    "DegenerateInputError",
    "EmbeddingFormatError",
    "EmbeddingSet",
    "Episode",
    "EvalReport",
    "ExperimentConfig",
    "FILE_FORMATS",
    "HYBRID_LABELINGS",
    "HYBRID_SOURCES",
    "InvalidInputError",
    "MethodSpec",
    "MixtureSpec",
    "PrototypeSet",
    "RefinementTrace",
    "RnnpConfig",
    "VALID_METRICS",
    "bayes_accuracy",
    "classify",
    "classify_rnnp",
    "compute_prototypes",
    "corrupt_labels",
    "cosine_distance",
    "count_corrupted",
    "default_config",
    "episode_accuracy",
    "generate_hybrids",
    "generate_mixture",
    "load_embeddings",
    "load_pool",
    "mean_ci95",
    "paired_delta",
    "pairwise_distances",
    "rectification_delta",
    "refine_for_query",
    "reports_to_csv",
    "run_experiment",
    "run_rectification_analysis",
    "run_sweep",
    "sample_episode",
    "save_rectification",
    "save_reports",
    "save_sweep",
    "soft_assign",
    "softmax",
    "squared_euclidean",
    "update_centers",
    "weighted_mean",
    "write_embeddings",
]
