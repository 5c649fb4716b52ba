"""Label-noise-robust prototype refinement.

The idea: corrupted support labels drag the per-class mean prototypes
toward wrong classes. To pull them back, each support feature is blended
with partner features into a cloud of unlabeled hybrid points, and then,
separately for every query, a few rounds of soft k-means run over
supports + hybrids + that one query, starting from the plain per-class
means. The refined cluster centers replace the prototypes for
classification, and the final soft assignment of each support doubles as
a rectified label for diagnostics.

Exactly one query participates per clustering run; queries never help
classify each other.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .episodes import Episode, _check_seed
from .errors import DegenerateInputError, InvalidInputError
from .nnp import ClassProbabilities, PrototypeSet, classify, compute_prototypes
from .vecmath import VALID_METRICS, _pairwise_raw, _softmax_raw, as_matrix, as_vector

CLUSTERING_MODES = ("soft", "hard")
HYBRID_SOURCES = ("same_class", "different_class", "gaussian_noise")
HYBRID_LABELINGS = ("unlabeled_cluster", "labeled_direct")

# A cluster whose total responsibility falls below this keeps its previous
# center instead of dividing by (near) zero.
EMPTY_CLUSTER_EPS = 1e-12


@dataclass(frozen=True)
class RnnpConfig:
    """Hyper-parameters of the refinement.

    beta: hybrids generated per support feature.
    alpha: blend weight of the primary parent, strictly inside (0, 1).
    iterations: soft k-means rounds per query (0 disables refinement).
    clustering_mode: "soft" (fractional responsibilities) or "hard"
        (nearest-center assignment).
    hybrid_source: "same_class" blends each support with observed
        classmates; "different_class" blends across observed classes;
        "gaussian_noise" replaces hybrids with draws from a diagonal
        Gaussian fitted to the support set.
    hybrid_labeling: "unlabeled_cluster" lets hybrids float free in the
        clustering; "labeled_direct" skips clustering and folds each
        hybrid into its parent's class mean.
    metric: distance used throughout ("sqeuclidean" or "cosine").
    seed: drives partner subsampling and noise draws.
    """

    beta: int
    alpha: float = 0.8
    iterations: int = 3
    clustering_mode: str = "soft"
    hybrid_source: str = "same_class"
    hybrid_labeling: str = "unlabeled_cluster"
    metric: str = "sqeuclidean"
    seed: int = 0

    def __post_init__(self):
        if not isinstance(self.beta, (int, np.integer)) or isinstance(self.beta, bool) or self.beta < 1:
            raise InvalidInputError(f"beta must be an integer >= 1, got {self.beta!r}")
        if not isinstance(self.alpha, (int, float)) or isinstance(self.alpha, bool):
            raise InvalidInputError(f"alpha must be a real number, got {self.alpha!r}")
        if not 0.0 < self.alpha < 1.0:
            raise InvalidInputError(f"alpha must lie strictly inside (0, 1), got {self.alpha}")
        if (not isinstance(self.iterations, (int, np.integer))
                or isinstance(self.iterations, bool) or self.iterations < 0):
            raise InvalidInputError(f"iterations must be an integer >= 0, got {self.iterations!r}")
        if self.clustering_mode not in CLUSTERING_MODES:
            raise InvalidInputError(f"clustering_mode must be one of {CLUSTERING_MODES}")
        if self.hybrid_source not in HYBRID_SOURCES:
            raise InvalidInputError(f"hybrid_source must be one of {HYBRID_SOURCES}")
        if self.hybrid_labeling not in HYBRID_LABELINGS:
            raise InvalidInputError(f"hybrid_labeling must be one of {HYBRID_LABELINGS}")
        if self.hybrid_source == "gaussian_noise" and self.hybrid_labeling == "labeled_direct":
            raise InvalidInputError("gaussian_noise hybrids have no parent class to label them with")
        if self.metric not in VALID_METRICS:
            raise InvalidInputError(f"metric must be one of {VALID_METRICS}")
        object.__setattr__(self, "beta", int(self.beta))
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "iterations", int(self.iterations))
        object.__setattr__(self, "seed", _check_seed(self.seed))


@dataclass(frozen=True)
class RefinementTrace:
    """Diagnostics from one refinement run.

    support_responsibilities holds the assignment computed in the final
    clustering round (for zero iterations: the assignment at the initial
    centers), one row per support, one column per class. rectified_labels
    are the per-row argmax, the class the clustering believes each support
    belongs to.
    """

    initial_prototypes: PrototypeSet
    refined_prototypes: PrototypeSet
    support_responsibilities: np.ndarray
    rectified_labels: np.ndarray

    def __post_init__(self):
        resp = as_matrix(self.support_responsibilities).copy()
        n = self.initial_prototypes.n_classes
        if resp.shape[1] != n or self.refined_prototypes.n_classes != n:
            raise InvalidInputError("responsibility columns must match the class count")
        if np.max(np.abs(resp.sum(axis=1) - 1.0)) > 1e-9:
            raise InvalidInputError("responsibility rows must sum to 1 within 1e-9")
        rect = np.asarray(self.rectified_labels)
        if rect.shape != (resp.shape[0],) or not np.issubdtype(rect.dtype, np.integer):
            raise InvalidInputError("rectified_labels must be one integer per support")
        rect = rect.astype(np.int64, copy=True)
        if rect.size and (rect.min() < 0 or rect.max() >= n):
            raise InvalidInputError(f"rectified labels must lie in 0..{n - 1}")
        resp.setflags(write=False)
        rect.setflags(write=False)
        object.__setattr__(self, "support_responsibilities", resp)
        object.__setattr__(self, "rectified_labels", rect)


def _check_episode_config(episode: Episode, config: RnnpConfig) -> None:
    if config.hybrid_source == "same_class" and config.beta > episode.k_shot - 1:
        raise InvalidInputError(
            f"beta={config.beta} exceeds K-1={episode.k_shot - 1} distinct same-class partners"
        )


def build_hybrids(episode: Episode, config: RnnpConfig) -> tuple[np.ndarray, np.ndarray | None]:
    """Hybrid features plus, when parents exist, the parent observed labels.

    Randomized choices come from np.random.default_rng([config.seed,
    episode.seed]) and are consumed as follows. For each support s in row
    order, the candidate partners are the supports with the same
    (same_class) or a different (different_class) observed label, j != s,
    in ascending row order:

    * more candidates than beta: one rng.permutation(len(candidates)) call
      picks the first beta, in permuted order (the only rng consumption);
    * exactly beta: all candidates, ascending, no rng draw;
    * fewer than beta but at least one: candidates cycled in ascending
      order until beta partners are emitted (corruption can shrink an
      observed group this far; the hybrid count contract stays N*K*beta);
    * none: the support is paired with itself, so the hybrid equals it.

    Each partner j emits alpha * z_s + (1 - alpha) * z_j with parent label
    observed[s]. gaussian_noise instead draws all N*K*beta rows in one
    rng.normal call from the support set's per-dimension mean and
    (population) standard deviation, and has no parent labels.
    """
    _check_episode_config(episode, config)
    sup = episode.support_features
    kn = sup.shape[0]
    beta = config.beta
    rng = np.random.default_rng([config.seed, episode.seed])

    if config.hybrid_source == "gaussian_noise":
        loc = sup.mean(axis=0)
        scale = sup.std(axis=0)
        return rng.normal(loc, scale, size=(kn * beta, sup.shape[1])), None

    obs = episode.support_observed_labels
    same = config.hybrid_source == "same_class"
    feats = np.empty((kn * beta, sup.shape[1]), dtype=np.float64)
    parents = np.empty(kn * beta, dtype=np.int64)
    alpha = config.alpha
    row = 0
    for s in range(kn):
        if same:
            cands = np.flatnonzero(obs == obs[s])
            cands = cands[cands != s]
        else:
            cands = np.flatnonzero(obs != obs[s])
        m = len(cands)
        if m > beta:
            chosen = cands[rng.permutation(m)[:beta]]
        elif m == beta:
            chosen = cands
        elif m > 0:
            chosen = cands[np.arange(beta) % m]
        else:
            chosen = np.full(beta, s)
        z_s = sup[s]
        for j in chosen:
            feats[row] = alpha * z_s + (1.0 - alpha) * sup[j]
            parents[row] = obs[s]
            row += 1
    return feats, parents


def generate_hybrids(episode: Episode, config: RnnpConfig) -> np.ndarray:
    """Hybrid features only; see build_hybrids for the full contract."""
    return build_hybrids(episode, config)[0]


def _assign_raw(pool: np.ndarray, centers: np.ndarray, mode: str, metric: str,
                pool_sqnorms: np.ndarray | None = None) -> np.ndarray:
    if metric == "sqeuclidean":
        # Expanded identity: one small matmul instead of a (m, n, d)
        # difference tensor. The loop passes pool_sqnorms in so the pool
        # term is computed once per refinement, not once per round.
        pn = pool_sqnorms if pool_sqnorms is not None \
            else np.einsum("md,md->m", pool, pool)
        cn = np.einsum("nd,nd->n", centers, centers)
        dists = pn[:, None] - 2.0 * (pool @ centers.T) + cn[None, :]
    else:
        dists = _pairwise_raw(pool, centers, metric)
    if mode == "soft":
        return _softmax_raw(-dists)
    resp = np.zeros_like(dists)
    resp[np.arange(dists.shape[0]), np.argmin(dists, axis=1)] = 1.0
    return resp


def _update_raw(pool: np.ndarray, resp: np.ndarray, previous: np.ndarray) -> np.ndarray:
    mass = resp.sum(axis=0)
    new = resp.T @ pool
    alive = mass >= EMPTY_CLUSTER_EPS
    new[alive] /= mass[alive, None]
    new[~alive] = previous[~alive]
    return new


def soft_assign(features, centers: PrototypeSet, mode: str = "soft",
                metric: str = "sqeuclidean") -> np.ndarray:
    """Responsibility of every center for every feature; rows sum to 1.

    Soft rows are a softmax over the negated distances to the centers
    (max-subtraction inside, so remote features cannot underflow to an
    all-zero row). Hard rows are one-hot on the nearest center, exact
    ties to the lowest index.
    """
    if mode not in CLUSTERING_MODES:
        raise InvalidInputError(f"mode must be one of {CLUSTERING_MODES}")
    return _assign_raw(as_matrix(features), centers.prototypes, mode, metric)


def update_centers(features, responsibilities,
                   previous: PrototypeSet | None = None) -> PrototypeSet:
    """Responsibility-weighted means of the features, one per column.

    A column whose total responsibility is below 1e-12 keeps the
    corresponding center from `previous`; without `previous` such a
    column is an error.
    """
    feats = as_matrix(features)
    resp = as_matrix(responsibilities)
    if resp.shape[0] != feats.shape[0]:
        raise InvalidInputError(f"expected {feats.shape[0]} responsibility rows, got {resp.shape[0]}")
    if np.any(resp < 0.0):
        raise InvalidInputError("responsibilities must be non-negative")
    if np.max(np.abs(resp.sum(axis=1) - 1.0)) > 1e-9:
        raise InvalidInputError("responsibility rows must sum to 1 within 1e-9")
    if previous is not None:
        if previous.n_classes != resp.shape[1] or previous.dim != feats.shape[1]:
            raise InvalidInputError("previous centers do not match the responsibility shape")
        prev = previous.prototypes
    else:
        mass = resp.sum(axis=0)
        if np.any(mass < EMPTY_CLUSTER_EPS):
            dead = int(np.flatnonzero(mass < EMPTY_CLUSTER_EPS)[0])
            raise DegenerateInputError(
                f"cluster {dead} has zero total responsibility and no previous center to keep"
            )
        prev = np.zeros((resp.shape[1], feats.shape[1]))
    return PrototypeSet(prototypes=_update_raw(feats, resp, prev))


def _refine_arrays(pool: np.ndarray, centers0: np.ndarray,
                   config: RnnpConfig) -> tuple[np.ndarray, np.ndarray]:
    """Run the clustering loop; returns (final centers, final assignment).

    The returned assignment is the one computed in the last round, i.e.
    the one the final center update used; with zero iterations it is
    evaluated at the initial centers.
    """
    centers = centers0
    resp = None
    pn = np.einsum("md,md->m", pool, pool) if config.metric == "sqeuclidean" else None
    for _ in range(config.iterations):
        resp = _assign_raw(pool, centers, config.clustering_mode, config.metric, pn)
        centers = _update_raw(pool, resp, centers)
    if resp is None:
        resp = _assign_raw(pool, centers, config.clustering_mode, config.metric, pn)
    return centers, resp


def refine_for_query(episode: Episode, query, config: RnnpConfig) -> RefinementTrace:
    """Refine the episode's prototypes for one query.

    Builds the clustering pool as supports, then hybrids, then the single
    query, in that order; initializes the centers at the per-class means
    of the supports under observed labels; and alternates assignment and
    center update config.iterations times. No other query participates.

    Raises:
        DegenerateClassError: some class has no observed supports, so
            initial prototypes cannot be formed.
    """
    q = as_vector(query)
    if q.shape[0] != episode.dim:
        raise InvalidInputError(f"query dim {q.shape[0]} does not match episode dim {episode.dim}")
    _check_episode_config(episode, config)
    initial = compute_prototypes(episode, "observed")
    hybrids = build_hybrids(episode, config)[0]
    pool = np.vstack([episode.support_features, hybrids, q[None, :]])
    centers, resp = _refine_arrays(pool, initial.prototypes, config)
    kn = episode.support_features.shape[0]
    support_resp = resp[:kn]
    return RefinementTrace(
        initial_prototypes=initial,
        refined_prototypes=PrototypeSet(prototypes=centers),
        support_responsibilities=support_resp,
        rectified_labels=np.argmax(support_resp, axis=1),
    )


def _direct_prototypes(episode: Episode, config: RnnpConfig) -> tuple[PrototypeSet, PrototypeSet]:
    """(initial, direct) prototypes for the labeled_direct shortcut."""
    initial = compute_prototypes(episode, "observed")
    hybrids, parents = build_hybrids(episode, config)
    feats = np.vstack([episode.support_features, hybrids])
    labels = np.concatenate([episode.support_observed_labels, parents])
    protos = np.empty_like(initial.prototypes)
    for c in range(episode.n_way):
        protos[c] = feats[labels == c].mean(axis=0)
    return initial, PrototypeSet(prototypes=protos)


def classify_rnnp(episode: Episode, query,
                  config: RnnpConfig) -> tuple[ClassProbabilities, int, RefinementTrace]:
    """Classify one query with refined prototypes.

    unlabeled_cluster runs refine_for_query and scores the query against
    the refined centers. labeled_direct skips clustering entirely: each
    hybrid inherits its parent's observed label, prototypes are plain
    means of supports plus hybrids per class, and the trace reports the
    observed labels unchanged (structurally, nothing was rectified).
    """
    if config.hybrid_labeling == "unlabeled_cluster":
        trace = refine_for_query(episode, query, config)
        probs, pred = classify(trace.refined_prototypes, query, metric=config.metric)
        return probs, pred, trace

    q = as_vector(query)
    if q.shape[0] != episode.dim:
        raise InvalidInputError(f"query dim {q.shape[0]} does not match episode dim {episode.dim}")
    initial, direct = _direct_prototypes(episode, config)
    kn = episode.support_features.shape[0]
    one_hot = np.zeros((kn, episode.n_way))
    one_hot[np.arange(kn), episode.support_observed_labels] = 1.0
    trace = RefinementTrace(
        initial_prototypes=initial,
        refined_prototypes=direct,
        support_responsibilities=one_hot,
        rectified_labels=episode.support_observed_labels.copy(),
    )
    probs, pred = classify(direct, q, metric=config.metric)
    return probs, pred, trace


def rectification_delta(episode: Episode, trace: RefinementTrace) -> tuple[int, int]:
    """Correct observed labels before refinement vs correct rectified labels after."""
    true = episode.support_true_labels
    if trace.rectified_labels.shape != true.shape:
        raise InvalidInputError("trace does not match the episode's support count")
    if trace.initial_prototypes.n_classes != episode.n_way:
        raise InvalidInputError("trace does not match the episode's class count")
    before = int(np.sum(episode.support_observed_labels == true))
    after = int(np.sum(trace.rectified_labels == true))
    return before, after
