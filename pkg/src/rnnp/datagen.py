"""Embedding pools: synthetic Gaussian mixtures and file ingestion.

The synthetic generator stands in for a feature extractor at desk scale:
class means come from a seeded standard Gaussian, rescaled so the mean
pairwise distance between class means equals `separation`, and samples
add unit-variance isotropic noise. One knob (separation, in units of the
within-class standard deviation) controls problem hardness. The true
means are kept on the returned set so the optimal nearest-true-mean rule
can serve as an accuracy ceiling in tests.

File formats:
  CSV   header `label,f0,...,f{d-1}`, one sample per row, UTF-8, LF.
  JSONL one object per line, integer `label`, number array `features`.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .episodes import EmbeddingSet, _check_seed
from .errors import DegenerateInputError, EmbeddingFormatError, InvalidInputError
from .vecmath import pairwise_distances

FILE_FORMATS = ("csv", "jsonl")


@dataclass(frozen=True)
class MixtureSpec:
    """Parameters of a synthetic isotropic Gaussian mixture pool."""

    num_classes: int
    dim: int
    separation: float
    samples_per_class: int
    seed: int

    def __post_init__(self):
        if not isinstance(self.num_classes, (int, np.integer)) or self.num_classes < 1:
            raise InvalidInputError(f"num_classes must be an integer >= 1, got {self.num_classes!r}")
        if not isinstance(self.dim, (int, np.integer)) or self.dim < 1:
            raise InvalidInputError(f"dim must be an integer >= 1, got {self.dim!r}")
        if not isinstance(self.separation, (int, float)) or isinstance(self.separation, bool):
            raise InvalidInputError(f"separation must be a real number, got {self.separation!r}")
        if not (math.isfinite(self.separation) and self.separation >= 0.0):
            raise InvalidInputError(f"separation must be finite and >= 0, got {self.separation}")
        if not isinstance(self.samples_per_class, (int, np.integer)) or self.samples_per_class < 1:
            raise InvalidInputError(
                f"samples_per_class must be an integer >= 1, got {self.samples_per_class!r}"
            )
        object.__setattr__(self, "num_classes", int(self.num_classes))
        object.__setattr__(self, "dim", int(self.dim))
        object.__setattr__(self, "separation", float(self.separation))
        object.__setattr__(self, "samples_per_class", int(self.samples_per_class))
        object.__setattr__(self, "seed", _check_seed(self.seed))


def generate_mixture(spec: MixtureSpec) -> EmbeddingSet:
    """Sample a labeled pool from the mixture; deterministic given the seed.

    Stream order from np.random.default_rng(spec.seed): first one
    standard_normal draw of all class means, then one standard_normal
    draw of samples per class, in class order. Class labels are 0..C-1,
    class-major. With a single class the raw mean is kept unscaled
    (there is no pairwise distance to normalize).
    """
    rng = np.random.default_rng(spec.seed)
    c, d = spec.num_classes, spec.dim
    raw = rng.standard_normal((c, d))
    if c > 1:
        dists = np.sqrt(pairwise_distances(raw, raw))
        mean_pairwise = float(dists[np.triu_indices(c, k=1)].mean())
        if mean_pairwise == 0.0:
            raise DegenerateInputError("drawn class means coincide; cannot rescale")
        means = raw * (spec.separation / mean_pairwise)
    else:
        means = raw
    s = spec.samples_per_class
    feats = np.empty((c * s, d), dtype=np.float64)
    for i in range(c):
        feats[i * s:(i + 1) * s] = means[i] + rng.standard_normal((s, d))
    labels = np.repeat(np.arange(c, dtype=np.int64), s)
    return EmbeddingSet(
        features=feats, labels=labels,
        class_means={i: means[i].copy() for i in range(c)},
    )


def bayes_accuracy(pool: EmbeddingSet, test_samples: EmbeddingSet) -> float:
    """Accuracy of the nearest-true-mean rule on the test samples.

    This is the optimal classifier for equal-weight isotropic Gaussian
    classes, so it upper-bounds (in expectation) anything built from the
    pool's finite supports. The pool must carry generator means.
    """
    if pool.class_means is None:
        raise InvalidInputError("pool has no known class means (not synthetically generated)")
    classes = sorted(pool.class_means)
    means = np.vstack([pool.class_means[c] for c in classes])
    dists = pairwise_distances(test_samples.features, means)
    nearest = np.asarray(classes, dtype=np.int64)[np.argmin(dists, axis=1)]
    return float(np.mean(nearest == test_samples.labels))


def write_embeddings(pool: EmbeddingSet, path, file_format: str = "csv") -> None:
    """Write a pool to disk; load_embeddings reproduces it bit-exactly."""
    if file_format not in FILE_FORMATS:
        raise InvalidInputError(f"file_format must be one of {FILE_FORMATS}")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        if file_format == "csv":
            dim = pool.features.shape[1]
            fh.write("label," + ",".join(f"f{i}" for i in range(dim)) + "\n")
            for label, row in zip(pool.labels, pool.features):
                fh.write(str(int(label)) + "," + ",".join(repr(float(x)) for x in row) + "\n")
        else:
            for label, row in zip(pool.labels, pool.features):
                fh.write(json.dumps({"label": int(label), "features": [float(x) for x in row]}))
                fh.write("\n")


def load_embeddings(path, file_format: str = "csv") -> EmbeddingSet:
    """Parse a CSV or JSONL embeddings file into a pool.

    Raises:
        EmbeddingFormatError: empty file, malformed row, ragged
            dimensions, or non-finite values; messages carry the
            offending line number.
    """
    if file_format not in FILE_FORMATS:
        raise InvalidInputError(f"file_format must be one of {FILE_FORMATS}")
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if file_format == "csv":
        labels, rows = _parse_csv(lines)
    else:
        labels, rows = _parse_jsonl(lines)
    if not rows:
        raise EmbeddingFormatError(f"{path}: file contains no samples")
    return EmbeddingSet(
        features=np.array(rows, dtype=np.float64),
        labels=np.array(labels, dtype=np.int64),
    )


def _parse_csv(lines):
    if not lines:
        raise EmbeddingFormatError("line 1: empty file")
    header = lines[0].split(",")
    if header[0] != "label" or len(header) < 2:
        raise EmbeddingFormatError("line 1: header must be 'label,f0,...'")
    dim = len(header) - 1
    labels, rows = [], []
    for num, line in enumerate(lines[1:], start=2):
        if line == "":
            continue
        parts = line.split(",")
        if len(parts) != dim + 1:
            raise EmbeddingFormatError(f"line {num}: expected {dim + 1} fields, got {len(parts)}")
        try:
            label = int(parts[0])
            values = [float(p) for p in parts[1:]]
        except ValueError as exc:
            raise EmbeddingFormatError(f"line {num}: {exc}") from exc
        if not all(math.isfinite(v) for v in values):
            raise EmbeddingFormatError(f"line {num}: non-finite feature value")
        labels.append(label)
        rows.append(values)
    return labels, rows


def _parse_jsonl(lines):
    labels, rows = [], []
    dim = None
    for num, line in enumerate(lines, start=1):
        if line == "":
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise EmbeddingFormatError(f"line {num}: invalid JSON: {exc}") from exc
        if not isinstance(obj, dict) or "label" not in obj or "features" not in obj:
            raise EmbeddingFormatError(f"line {num}: object needs 'label' and 'features'")
        label = obj["label"]
        feats = obj["features"]
        if not isinstance(label, int) or isinstance(label, bool):
            raise EmbeddingFormatError(f"line {num}: label must be an integer")
        if not isinstance(feats, list) or len(feats) == 0:
            raise EmbeddingFormatError(f"line {num}: features must be a non-empty array")
        if not all(isinstance(v, (int, float)) and not isinstance(v, bool)
                   and math.isfinite(v) for v in feats):
            raise EmbeddingFormatError(f"line {num}: features must be finite numbers")
        if dim is None:
            dim = len(feats)
        elif len(feats) != dim:
            raise EmbeddingFormatError(f"line {num}: expected {dim} features, got {len(feats)}")
        labels.append(label)
        rows.append([float(v) for v in feats])
    return labels, rows
