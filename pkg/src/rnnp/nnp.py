"""Mean-prototype nearest-neighbor classifier.

The baseline few-shot classifier: average each class's support features
into a prototype, then score a query by a softmax over the negated
distances to the prototypes and predict the argmax class.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .episodes import Episode
from .errors import DegenerateClassError, InvalidInputError
from .vecmath import FeatureVec, _pairwise_raw, _softmax_raw, as_matrix, as_vector

LABEL_SOURCES = ("observed", "true")


@dataclass(frozen=True)
class PrototypeSet:
    """One prototype row per episode class, indexed by class id."""

    prototypes: np.ndarray

    def __post_init__(self):
        protos = as_matrix(self.prototypes).copy()
        protos.setflags(write=False)
        object.__setattr__(self, "prototypes", protos)

    @property
    def n_classes(self) -> int:
        return self.prototypes.shape[0]

    @property
    def dim(self) -> int:
        return self.prototypes.shape[1]


@dataclass(frozen=True)
class ClassProbabilities:
    """Class membership probabilities for one query; rows sum to 1."""

    probs: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=np.float64)
        if p.ndim != 1 or p.size == 0 or not np.all(np.isfinite(p)):
            raise InvalidInputError(f"expected a finite 1-D probability vector, got shape {p.shape}")
        if p.min() < 0.0 or p.max() > 1.0 or abs(p.sum() - 1.0) > 1e-9:
            raise InvalidInputError("probabilities must lie in [0,1] and sum to 1 within 1e-9")
        p = p.copy()
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)


def compute_prototypes(episode: Episode, label_source: str = "observed") -> PrototypeSet:
    """Average support features per class into prototypes.

    Args:
        episode: the task providing supports.
        label_source: "observed" groups by the (possibly corrupted) labels
            the classifier is allowed to see; "true" groups by ground truth.

    Raises:
        DegenerateClassError: some class has zero supports under the chosen
            labels (possible after corruption when K is small); callers that
            iterate over many episodes should record and skip such episodes.
    """
    if label_source not in LABEL_SOURCES:
        raise InvalidInputError(f"label_source must be one of {LABEL_SOURCES}, got {label_source!r}")
    labels = (episode.support_observed_labels if label_source == "observed"
              else episode.support_true_labels)
    feats = episode.support_features
    protos = np.empty((episode.n_way, feats.shape[1]), dtype=np.float64)
    for c in range(episode.n_way):
        rows = feats[labels == c]
        if rows.shape[0] == 0:
            raise DegenerateClassError(f"class {c} has no supports under {label_source} labels")
        protos[c] = rows.mean(axis=0)
    return PrototypeSet(prototypes=protos)


def _classify_arrays(prototypes: np.ndarray, query: np.ndarray,
                     metric: str) -> tuple[np.ndarray, int]:
    """The arithmetic of classify() on bare arrays; hot-loop entry point."""
    dists = _pairwise_raw(query[None, :], prototypes, metric)[0]
    probs = _softmax_raw(-dists)
    return probs, int(np.argmax(probs))


def class_scores(prototypes: PrototypeSet, query: FeatureVec,
                 metric: str = "sqeuclidean") -> np.ndarray:
    """Raw probability vector for one query."""
    q = as_vector(query)
    if q.shape[0] != prototypes.dim:
        raise InvalidInputError(f"query dim {q.shape[0]} does not match prototype dim {prototypes.dim}")
    return _classify_arrays(prototypes.prototypes, q, metric)[0]


def classify(prototypes: PrototypeSet, query: FeatureVec,
             metric: str = "sqeuclidean") -> tuple[ClassProbabilities, int]:
    """Classify one query against a prototype set.

    Probabilities are a softmax over the negated query-to-prototype
    distances (computed with max-subtraction so large distances cannot
    underflow everything at once). The predicted class is the argmax;
    exact ties resolve to the lowest class index.
    """
    q = as_vector(query)
    if q.shape[0] != prototypes.dim:
        raise InvalidInputError(f"query dim {q.shape[0]} does not match prototype dim {prototypes.dim}")
    probs, pred = _classify_arrays(prototypes.prototypes, q, metric)
    return ClassProbabilities(probs=probs), pred
