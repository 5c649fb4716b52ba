"""Experiment orchestration: paired method evaluation over many episodes.

One run samples n_episodes episodes (seeds seed+i), corrupts each at every
requested rate (corruption seeds come from a separate stream, (seed XOR a
fixed salt) + i, so changing the rate never reshuffles episode
composition), evaluates every configured method on bit-identical inputs,
and aggregates per (method, rate). Workers parallelize across episodes;
results are collected in episode-index order, so the worker count never
changes any output value.
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .datagen import MixtureSpec, generate_mixture, load_embeddings
from .episodes import CorruptionSpec, EmbeddingSet, corrupt_labels, sample_episode, _check_seed
from .errors import DegenerateClassError, InvalidInputError
from .metrics import EvalReport, episode_accuracy, reports_to_csv
from .nnp import PrototypeSet, _classify_arrays, compute_prototypes
from .refine import RnnpConfig, _direct_prototypes, _refine_arrays, build_hybrids

CORRUPTION_SEED_SALT = 0x9E3779B97F4A7C15

# Mean pairwise class-mean distance (in within-class standard deviations)
# at which clean 5-shot 5-way accuracy on the default 20-class dim-64
# mixture lands inside the 80-90% band (measured: 0.887 over 1000 episodes).
BENCHMARK_SEPARATION = 5.25

SWEEP_AXES = ("alpha", "beta", "iterations")
METHOD_NAMES = ("nnp", "rnnp")


@dataclass(frozen=True)
class MethodSpec:
    """One evaluated method: the baseline or a refinement variant."""

    method: str
    rnnp: RnnpConfig | None = None
    label: str | None = None

    def __post_init__(self):
        if self.method not in METHOD_NAMES:
            raise InvalidInputError(f"method must be one of {METHOD_NAMES}, got {self.method!r}")
        if self.method == "rnnp" and self.rnnp is None:
            raise InvalidInputError("method 'rnnp' needs its hyper-parameters")
        if self.method == "nnp" and self.rnnp is not None:
            raise InvalidInputError("method 'nnp' takes no hyper-parameters")
        if self.label is None:
            object.__setattr__(self, "label", self.method)

    def to_dict(self) -> dict:
        d = {"method": self.method, "label": self.label}
        if self.rnnp is not None:
            d.update(
                alpha=self.rnnp.alpha, beta=self.rnnp.beta, iterations=self.rnnp.iterations,
                clustering_mode=self.rnnp.clustering_mode, hybrid_source=self.rnnp.hybrid_source,
                hybrid_labeling=self.rnnp.hybrid_labeling, metric=self.rnnp.metric,
                seed=self.rnnp.seed,
            )
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "MethodSpec":
        d = dict(d)
        method = d.pop("method", None)
        label = d.pop("label", None)
        if method == "nnp":
            if d:
                raise InvalidInputError(f"method 'nnp' takes no extra keys, got {sorted(d)}")
            return cls(method="nnp", label=label)
        if method == "rnnp":
            try:
                cfg = RnnpConfig(**d)
            except TypeError as exc:
                raise InvalidInputError(f"bad rnnp method keys: {exc}") from exc
            return cls(method="rnnp", rnnp=cfg, label=label)
        raise InvalidInputError(f"method must be one of {METHOD_NAMES}, got {method!r}")


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything one run needs; JSON config files mirror it field-for-field.

    workers and output_dir are runtime knobs: they never influence results
    and are excluded from report snapshots.
    """

    methods: tuple
    mixture: MixtureSpec | None = None
    data_path: str | None = None
    data_format: str | None = None
    n_way: int = 5
    k_shot: int = 5
    queries_per_class: int = 15
    n_episodes: int = 1000
    corruption_rates: tuple = (0.0, 0.2, 0.4)
    seed: int = 7
    best_of: int = 1
    workers: int | None = None
    output_dir: str | None = None

    def __post_init__(self):
        if (self.mixture is None) == (self.data_path is None):
            raise InvalidInputError("exactly one of mixture / data_path must be set")
        if self.data_path is not None and self.data_format not in ("csv", "jsonl"):
            raise InvalidInputError("data_format must be 'csv' or 'jsonl' when data_path is set")
        for name, lo in (("n_way", 2), ("k_shot", 1), ("queries_per_class", 1), ("n_episodes", 1)):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or isinstance(v, bool) or v < lo:
                raise InvalidInputError(f"{name} must be an integer >= {lo}, got {v!r}")
        object.__setattr__(self, "seed", _check_seed(self.seed))
        if not isinstance(self.best_of, (int, np.integer)) or self.best_of < 1:
            raise InvalidInputError(f"best_of must be an integer >= 1, got {self.best_of!r}")
        if self.workers is not None and (not isinstance(self.workers, (int, np.integer)) or self.workers < 1):
            raise InvalidInputError(f"workers must be an integer >= 1 or None, got {self.workers!r}")

        methods = tuple(self.methods)
        if not methods:
            raise InvalidInputError("methods must not be empty")
        labels = [m.label for m in methods]
        if len(set(labels)) != len(labels):
            raise InvalidInputError(f"duplicate method labels: {labels}")
        for i, m in enumerate(methods):
            if m.method == "rnnp" and m.rnnp.hybrid_source == "same_class" \
                    and m.rnnp.beta > self.k_shot - 1:
                raise InvalidInputError(
                    f"methods[{i}].beta={m.rnnp.beta} exceeds K-1={self.k_shot - 1}"
                )
        object.__setattr__(self, "methods", methods)

        rates = tuple(float(r) for r in self.corruption_rates)
        if not rates:
            raise InvalidInputError("corruption_rates must not be empty")
        for i, r in enumerate(rates):
            if not 0.0 <= r <= 1.0:
                raise InvalidInputError(f"corruption_rates[{i}] must lie in [0, 1], got {r}")
            if abs(r * self.k_shot - round(r * self.k_shot)) > 1e-9:
                raise InvalidInputError(
                    f"corruption_rates[{i}]={r} times k_shot={self.k_shot} is not an integer"
                )
        object.__setattr__(self, "corruption_rates", rates)

    def to_dict(self) -> dict:
        return {
            "mixture": None if self.mixture is None else {
                "num_classes": self.mixture.num_classes, "dim": self.mixture.dim,
                "separation": self.mixture.separation,
                "samples_per_class": self.mixture.samples_per_class, "seed": self.mixture.seed,
            },
            "data_path": self.data_path,
            "data_format": self.data_format,
            "n_way": self.n_way,
            "k_shot": self.k_shot,
            "queries_per_class": self.queries_per_class,
            "n_episodes": self.n_episodes,
            "corruption_rates": list(self.corruption_rates),
            "methods": [m.to_dict() for m in self.methods],
            "seed": self.seed,
            "best_of": self.best_of,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        d = dict(d)
        known = {
            "mixture", "data_path", "data_format", "n_way", "k_shot", "queries_per_class",
            "n_episodes", "corruption_rates", "methods", "seed", "best_of", "workers",
            "output_dir",
        }
        unknown = set(d) - known
        if unknown:
            raise InvalidInputError(f"unknown config keys: {sorted(unknown)}")
        if d.get("mixture") is not None:
            try:
                d["mixture"] = MixtureSpec(**d["mixture"])
            except TypeError as exc:
                raise InvalidInputError(f"bad mixture keys: {exc}") from exc
        if "methods" in d:
            d["methods"] = tuple(MethodSpec.from_dict(m) for m in d["methods"])
        if "corruption_rates" in d:
            d["corruption_rates"] = tuple(d["corruption_rates"])
        return cls(**d)


def default_config(**overrides) -> ExperimentConfig:
    """The benchmark setup: 20-class dim-64 mixture, baseline vs refinement."""
    base = dict(
        mixture=MixtureSpec(num_classes=20, dim=64, separation=BENCHMARK_SEPARATION,
                            samples_per_class=50, seed=11),
        methods=(
            MethodSpec(method="nnp"),
            MethodSpec(method="rnnp", rnnp=RnnpConfig(beta=4)),
        ),
    )
    base.update(overrides)
    return ExperimentConfig(**base)


def load_pool(config: ExperimentConfig) -> EmbeddingSet:
    if config.mixture is not None:
        return generate_mixture(config.mixture)
    return load_embeddings(config.data_path, config.data_format)


def _evaluate_rnnp_episode(episode, rcfg: RnnpConfig, initial: PrototypeSet):
    """Accuracy plus (correct_before, mean correct_after) for one episode.

    Equivalent to calling classify_rnnp per query; hybrids and initial
    prototypes are built once since they do not depend on the query.
    """
    true = episode.support_true_labels
    before = int(np.sum(episode.support_observed_labels == true))
    if rcfg.hybrid_labeling == "labeled_direct":
        _, direct = _direct_prototypes(episode, rcfg)
        preds = [_classify_arrays(direct.prototypes, q, rcfg.metric)[1]
                 for q in episode.query_features]
        acc = episode_accuracy(preds, episode.query_labels)
        return acc, before, float(before)

    hybrids = build_hybrids(episode, rcfg)[0]
    pool_rows = np.vstack([episode.support_features, hybrids,
                           np.zeros((1, episode.dim))])
    kn = episode.support_features.shape[0]
    preds = []
    afters = []
    for q in episode.query_features:
        pool_rows[-1] = q
        centers, resp = _refine_arrays(pool_rows, initial.prototypes, rcfg)
        preds.append(_classify_arrays(centers, q, rcfg.metric)[1])
        rectified = np.argmax(resp[:kn], axis=1)
        afters.append(int(np.sum(rectified == true)))
    acc = episode_accuracy(preds, episode.query_labels)
    return acc, before, float(np.mean(afters))


def _evaluate_episode(pool: EmbeddingSet, config: ExperimentConfig, index: int) -> dict:
    """All (method, rate) results for one episode index.

    Returns {(label, rate): {"accuracy": ..., "rectification": [b, a]} | None};
    None marks a degenerate corruption (some class lost every observed
    support), which skips the episode for every method at that rate.
    """
    episode = sample_episode(pool, config.n_way, config.k_shot,
                             config.queries_per_class, config.seed + index)
    corr_seed = (config.seed ^ CORRUPTION_SEED_SALT) + index
    out = {}
    for rate in config.corruption_rates:
        corrupted = corrupt_labels(episode, CorruptionSpec(rate=rate, seed=corr_seed))
        try:
            protos = compute_prototypes(corrupted, "observed")
        except DegenerateClassError:
            for m in config.methods:
                out[(m.label, rate)] = None
            continue
        for m in config.methods:
            if m.method == "nnp":
                preds = [_classify_arrays(protos.prototypes, q, "sqeuclidean")[1]
                         for q in corrupted.query_features]
                out[(m.label, rate)] = {
                    "accuracy": episode_accuracy(preds, corrupted.query_labels)
                }
            else:
                acc, before, after = _evaluate_rnnp_episode(corrupted, m.rnnp, protos)
                out[(m.label, rate)] = {"accuracy": acc, "rectification": [before, after]}
    return out


_WORKER_POOL = None
_WORKER_CONFIG = None


def _init_worker(pool, config):
    global _WORKER_POOL, _WORKER_CONFIG
    _WORKER_POOL = pool
    _WORKER_CONFIG = config


def _worker_task(index):
    return _evaluate_episode(_WORKER_POOL, _WORKER_CONFIG, index)


def _run_single(config: ExperimentConfig) -> list:
    pool = load_pool(config)
    if len(pool.class_index) < config.n_way:
        raise InvalidInputError(
            f"pool has {len(pool.class_index)} classes, episodes need {config.n_way}"
        )
    workers = config.workers if config.workers is not None else (os.cpu_count() or 1)
    n = config.n_episodes
    if workers <= 1 or n < 4:
        rows = [_evaluate_episode(pool, config, i) for i in range(n)]
    else:
        chunk = max(1, n // (workers * 8))
        with ProcessPoolExecutor(max_workers=workers, initializer=_init_worker,
                                 initargs=(pool, config)) as ex:
            rows = list(ex.map(_worker_task, range(n), chunksize=chunk))

    reports = []
    for m in config.methods:
        for rate in config.corruption_rates:
            accs, indices, rect_rows = [], [], []
            skipped = 0
            for i, row in enumerate(rows):
                cell = row[(m.label, rate)]
                if cell is None:
                    skipped += 1
                    continue
                accs.append(cell["accuracy"])
                indices.append(i)
                if "rectification" in cell:
                    rect_rows.append(cell["rectification"])
            if len(accs) < 2:
                raise InvalidInputError(
                    f"method {m.label} at rate {rate}: only {len(accs)} evaluable episodes; "
                    "need at least 2 to aggregate"
                )
            rectification = None
            per_episode_rect = None
            if rect_rows:
                per_episode_rect = rect_rows
                rectification = {
                    "mean_correct_before": float(np.mean([r[0] for r in rect_rows])),
                    "mean_correct_after": float(np.mean([r[1] for r in rect_rows])),
                }
            snapshot = {"seed": config.seed, "experiment": config.to_dict(),
                        "method": m.to_dict()}
            reports.append(EvalReport.from_accuracies(
                method=m.label, corruption_rate=rate, n_way=config.n_way,
                k_shot=config.k_shot, queries_per_class=config.queries_per_class,
                per_episode_accuracies=accs, skipped_episodes=skipped, config=snapshot,
                rectification=rectification, per_episode_rectification=per_episode_rect,
                episode_indices=indices,
            ))
    return reports


def run_experiment(config: ExperimentConfig) -> list:
    """Evaluate every configured method at every corruption rate.

    Reports come back method-major (all rates of the first method, then
    the second, ...). With best_of > 1 the whole run repeats under shifted
    base seeds and, per (method, rate), the report with the best mean
    accuracy is kept; note that picked runs may differ between slots, so
    best-of output is for headline reporting, not paired comparison.
    """
    if config.best_of == 1:
        return _run_single(config)
    runs = []
    for r in range(config.best_of):
        shifted = replace(config, seed=config.seed + r * 10_000_019)
        runs.append(_run_single(shifted))
    best = []
    for slot in range(len(runs[0])):
        candidates = [run[slot] for run in runs]
        best.append(max(candidates, key=lambda rep: rep.mean_accuracy))
    return best


def _single_rnnp_method(config: ExperimentConfig) -> MethodSpec:
    rnnp_methods = [m for m in config.methods if m.method == "rnnp"]
    if len(rnnp_methods) != 1 or len(config.methods) != 1:
        raise InvalidInputError("this analysis needs exactly one configured method, of type rnnp")
    return rnnp_methods[0]


def run_sweep(config: ExperimentConfig, sweep_axis: str, values) -> list:
    """One report per value of alpha, beta, or iterations; streams stay paired.

    Needs a single rnnp method and a single corruption rate, so the
    emitted table is unambiguous about what varied.
    """
    if sweep_axis not in SWEEP_AXES:
        raise InvalidInputError(f"sweep_axis must be one of {SWEEP_AXES}, got {sweep_axis!r}")
    values = list(values)
    if not values:
        raise InvalidInputError("sweep needs at least one value")
    method = _single_rnnp_method(config)
    if len(config.corruption_rates) != 1:
        raise InvalidInputError("sweep needs exactly one corruption rate")
    reports = []
    for v in values:
        if sweep_axis in ("beta", "iterations"):
            if isinstance(v, float) and not v.is_integer():
                raise InvalidInputError(f"{sweep_axis} values must be integers, got {v}")
            v = int(v)
        else:
            v = float(v)
        swept = replace(method.rnnp, **{sweep_axis: v})
        cfg = replace(config, methods=(replace(method, rnnp=swept),))
        report = _run_single(cfg)[0] if cfg.best_of == 1 else run_experiment(cfg)[0]
        report.config["sweep"] = {"axis": sweep_axis, "value": v}
        reports.append(report)
    return reports


def run_rectification_analysis(config: ExperimentConfig) -> dict:
    """Per-episode correct-label counts before and after refinement.

    correct_before counts observed==true supports (query-independent);
    correct_after averages the per-query rectified counts of the episode.
    Returns {"rows": [(episode_index, before, after), ...],
    "mean_correct_before": ..., "mean_correct_after": ...}.
    """
    _single_rnnp_method(config)
    if len(config.corruption_rates) != 1:
        raise InvalidInputError("rectification analysis needs exactly one corruption rate")
    report = run_experiment(config)[0]
    rows = [(i, int(b), float(a)) for i, (b, a) in
            zip(report.episode_indices, report.per_episode_rectification)]
    return {
        "rows": rows,
        "mean_correct_before": report.rectification["mean_correct_before"],
        "mean_correct_after": report.rectification["mean_correct_after"],
    }


def save_reports(config: ExperimentConfig, reports, out_dir) -> tuple[str, str]:
    """Write report.json (full) and report.csv (flat) into out_dir."""
    os.makedirs(out_dir, exist_ok=True)
    payload = {"config": config.to_dict(), "reports": [r.to_dict() for r in reports]}
    json_path = os.path.join(out_dir, "report.json")
    with open(json_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(json.dumps(payload, sort_keys=True, indent=2))
        fh.write("\n")
    csv_path = os.path.join(out_dir, "report.csv")
    with open(csv_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(reports_to_csv(reports))
    return json_path, csv_path


def save_sweep(sweep_axis: str, reports, out_dir) -> str:
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, f"sweep_{sweep_axis}.csv")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("value,mean,ci95\n")
        for r in reports:
            v = r.config["sweep"]["value"]
            value_text = repr(v) if isinstance(v, float) else str(v)
            fh.write(f"{value_text},{r.mean_accuracy!r},{r.ci95!r}\n")
    return path


def save_rectification(result: dict, out_dir) -> str:
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, "rectification.csv")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("episode_index,correct_before,correct_after\n")
        for i, before, after in result["rows"]:
            fh.write(f"{i},{before},{after!r}\n")
        fh.write(f"mean,{result['mean_correct_before']!r},{result['mean_correct_after']!r}\n")
    return path
