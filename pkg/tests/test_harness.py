"""Harness behavior: pairing, ordering, determinism, worker independence."""

import json

import numpy as np
import pytest

from rnnp.datagen import MixtureSpec
from rnnp.errors import InvalidInputError
from rnnp.harness import (
    ExperimentConfig,
    MethodSpec,
    default_config,
    run_experiment,
    run_rectification_analysis,
    run_sweep,
    save_rectification,
    save_reports,
    save_sweep,
)
from rnnp.metrics import EvalReport, paired_delta
from rnnp.refine import RnnpConfig


def tiny_mixture(separation=6.0, seed=3):
    return MixtureSpec(num_classes=6, dim=4, separation=separation,
                       samples_per_class=10, seed=seed)


def tiny_config(**overrides):
    base = dict(
        mixture=tiny_mixture(),
        methods=(
            MethodSpec(method="nnp"),
            MethodSpec(method="rnnp", rnnp=RnnpConfig(beta=2, iterations=2)),
        ),
        n_way=3,
        k_shot=5,
        queries_per_class=4,
        n_episodes=6,
        corruption_rates=(0.0, 0.4),
        seed=5,
        workers=1,
    )
    base.update(overrides)
    return ExperimentConfig(**base)


class TestConfigValidation:
    def test_needs_exactly_one_data_source(self):
        with pytest.raises(InvalidInputError):
            ExperimentConfig(methods=(MethodSpec(method="nnp"),))
        with pytest.raises(InvalidInputError):
            ExperimentConfig(methods=(MethodSpec(method="nnp"),),
                             mixture=tiny_mixture(), data_path="x.csv", data_format="csv")

    def test_rejects_non_integral_rate_for_k_shot(self):
        with pytest.raises(InvalidInputError):
            tiny_config(corruption_rates=(0.3,))

    def test_rejects_beta_above_k_minus_one(self):
        with pytest.raises(InvalidInputError):
            tiny_config(methods=(
                MethodSpec(method="rnnp", rnnp=RnnpConfig(beta=5)),
            ))

    def test_rejects_duplicate_labels(self):
        with pytest.raises(InvalidInputError):
            tiny_config(methods=(
                MethodSpec(method="rnnp", rnnp=RnnpConfig(beta=2), label="m"),
                MethodSpec(method="rnnp", rnnp=RnnpConfig(beta=3), label="m"),
            ))

    def test_method_spec_shape(self):
        with pytest.raises(InvalidInputError):
            MethodSpec(method="rnnp")
        with pytest.raises(InvalidInputError):
            MethodSpec(method="nnp", rnnp=RnnpConfig(beta=2))
        with pytest.raises(InvalidInputError):
            MethodSpec(method="other")
        assert MethodSpec(method="nnp").label == "nnp"

    def test_round_trip_through_dict(self):
        cfg = tiny_config()
        again = ExperimentConfig.from_dict(cfg.to_dict())
        assert again.to_dict() == cfg.to_dict()
        assert again.methods == cfg.methods
        assert again.mixture == cfg.mixture

    def test_runtime_knobs_stay_out_of_snapshot(self):
        d = tiny_config(workers=4, output_dir="/tmp/somewhere").to_dict()
        assert "workers" not in d
        assert "output_dir" not in d

    def test_from_dict_rejects_unknown_keys(self):
        d = tiny_config().to_dict()
        d["typo"] = 1
        with pytest.raises(InvalidInputError):
            ExperimentConfig.from_dict(d)

    def test_default_config_is_valid(self):
        cfg = default_config()
        assert cfg.n_way == 5 and cfg.k_shot == 5
        assert [m.method for m in cfg.methods] == ["nnp", "rnnp"]
        assert cfg.corruption_rates == (0.0, 0.2, 0.4)


class TestRunExperiment:
    def test_reports_are_method_major(self):
        cfg = tiny_config()
        reports = run_experiment(cfg)
        got = [(r.method, r.corruption_rate) for r in reports]
        want = [(m.label, rate) for m in cfg.methods for rate in cfg.corruption_rates]
        assert got == want

    def test_streams_are_paired(self):
        cfg = tiny_config()
        reports = {(r.method, r.corruption_rate): r for r in run_experiment(cfg)}
        a = reports[("rnnp", 0.4)]
        b = reports[("nnp", 0.4)]
        # same episodes in the same order, so a paired comparison is legal
        assert a.episode_indices == b.episode_indices
        paired_delta(a, b)
        # rates share episode composition too (corruption seed is rate-free)
        paired_delta(reports[("nnp", 0.0)], reports[("nnp", 0.4)])

    def test_zero_iterations_matches_baseline_exactly(self):
        cfg = tiny_config(methods=(
            MethodSpec(method="nnp"),
            MethodSpec(method="rnnp", rnnp=RnnpConfig(beta=2, iterations=0)),
        ))
        reports = {(r.method, r.corruption_rate): r for r in run_experiment(cfg)}
        for rate in cfg.corruption_rates:
            assert reports[("rnnp", rate)].per_episode_accuracies == \
                reports[("nnp", rate)].per_episode_accuracies

    def test_rerun_is_identical(self):
        cfg = tiny_config()
        first = [r.to_dict() for r in run_experiment(cfg)]
        second = [r.to_dict() for r in run_experiment(cfg)]
        assert first == second

    def test_worker_count_does_not_change_results(self):
        serial = [r.to_dict() for r in run_experiment(tiny_config(n_episodes=8, workers=1))]
        parallel = [r.to_dict() for r in run_experiment(tiny_config(n_episodes=8, workers=2))]
        assert serial == parallel

    def test_rectification_fields_only_on_rnnp(self):
        reports = {(r.method, r.corruption_rate): r for r in run_experiment(tiny_config())}
        nnp_rep = reports[("nnp", 0.4)]
        rnnp_rep = reports[("rnnp", 0.4)]
        assert nnp_rep.rectification is None
        assert rnnp_rep.rectification is not None
        assert len(rnnp_rep.per_episode_rectification) == rnnp_rep.n_episodes
        # 40% of 5 shots corrupted in each of 3 classes: 9 of 15 labels correct
        for before, after in rnnp_rep.per_episode_rectification:
            assert before == 9
            assert 0.0 <= after <= 15.0
        assert rnnp_rep.rectification["mean_correct_before"] == 9.0

    def test_degenerate_corruptions_are_skipped_for_all_methods(self):
        # K=1 at rate 1 reassigns every label; only derangement outcomes
        # keep all classes non-empty, the rest must be skipped.
        cfg = tiny_config(
            methods=(MethodSpec(method="nnp"),
                     MethodSpec(method="rnnp", rnnp=RnnpConfig(beta=1, hybrid_source="different_class"))),
            k_shot=1, queries_per_class=2, n_episodes=40, corruption_rates=(1.0,),
        )
        reports = run_experiment(cfg)
        assert reports[0].skipped_episodes > 0
        assert reports[0].skipped_episodes + reports[0].n_episodes == 40
        assert reports[0].episode_indices == reports[1].episode_indices
        idx = reports[0].episode_indices
        assert idx == sorted(idx) and len(set(idx)) == len(idx)

    def test_best_of_takes_the_best_mean_per_slot(self):
        cfg = tiny_config(methods=(MethodSpec(method="nnp"),), n_episodes=4,
                          corruption_rates=(0.4,))
        from dataclasses import replace

        runs = [run_experiment(replace(cfg, seed=cfg.seed + r * 10_000_019))
                for r in range(3)]
        best = run_experiment(replace(cfg, best_of=3))
        assert best[0].mean_accuracy == max(run[0].mean_accuracy for run in runs)


class TestSweep:
    def test_sweep_needs_single_rnnp_method_and_rate(self):
        with pytest.raises(InvalidInputError):
            run_sweep(tiny_config(), "alpha", [0.5])
        solo = tiny_config(methods=(MethodSpec(method="rnnp", rnnp=RnnpConfig(beta=2)),))
        with pytest.raises(InvalidInputError):
            run_sweep(solo, "alpha", [0.5])  # two corruption rates configured
        with pytest.raises(InvalidInputError):
            run_sweep(solo, "gamma", [0.5])

    def test_iterations_sweep_hits_baseline_at_zero(self):
        solo = tiny_config(
            methods=(MethodSpec(method="rnnp", rnnp=RnnpConfig(beta=2)),),
            corruption_rates=(0.4,),
        )
        reports = run_sweep(solo, "iterations", [0, 2])
        assert [r.config["sweep"]["value"] for r in reports] == [0, 2]
        baseline = run_experiment(tiny_config(methods=(MethodSpec(method="nnp"),),
                                              corruption_rates=(0.4,)))[0]
        assert reports[0].per_episode_accuracies == baseline.per_episode_accuracies

    def test_beta_sweep_rejects_fractional_values(self):
        solo = tiny_config(methods=(MethodSpec(method="rnnp", rnnp=RnnpConfig(beta=2)),),
                           corruption_rates=(0.4,))
        with pytest.raises(InvalidInputError):
            run_sweep(solo, "beta", [1.5])


class TestRectificationAnalysis:
    def test_clean_separable_episodes_keep_all_labels(self):
        cfg = tiny_config(
            mixture=tiny_mixture(separation=25.0),
            methods=(MethodSpec(method="rnnp", rnnp=RnnpConfig(beta=2)),),
            corruption_rates=(0.0,),
            n_episodes=4,
        )
        result = run_rectification_analysis(cfg)
        assert len(result["rows"]) == 4
        for i, (idx, before, after) in enumerate(result["rows"]):
            assert idx == i
            assert before == 15
            assert after == 15.0
        assert result["mean_correct_before"] == 15.0
        assert result["mean_correct_after"] == 15.0


class TestSaving:
    def test_report_files_round_trip(self, tmp_path):
        cfg = tiny_config(n_episodes=4)
        reports = run_experiment(cfg)
        json_path, csv_path = save_reports(cfg, reports, tmp_path)
        payload = json.loads(open(json_path, encoding="utf-8").read())
        assert payload["config"] == cfg.to_dict()
        again = [EvalReport.from_dict(d) for d in payload["reports"]]
        assert [r.to_dict() for r in again] == [r.to_dict() for r in reports]
        lines = open(csv_path, encoding="utf-8").read().splitlines()
        assert lines[0] == "method,corruption_rate,k_shot,mean,ci95,n_episodes"
        assert len(lines) == 1 + len(reports)

    def test_saving_twice_is_byte_identical(self, tmp_path):
        cfg = tiny_config(n_episodes=4)
        reports = run_experiment(cfg)
        save_reports(cfg, reports, tmp_path / "a")
        save_reports(cfg, reports, tmp_path / "b")
        for name in ("report.json", "report.csv"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_sweep_csv_shape(self, tmp_path):
        solo = tiny_config(methods=(MethodSpec(method="rnnp", rnnp=RnnpConfig(beta=2)),),
                           corruption_rates=(0.4,), n_episodes=4)
        reports = run_sweep(solo, "alpha", [0.6, 0.8])
        path = save_sweep("alpha", reports, tmp_path)
        lines = open(path, encoding="utf-8").read().splitlines()
        assert lines[0] == "value,mean,ci95"
        assert len(lines) == 3
        assert lines[1].startswith("0.6,")

    def test_rectification_csv_has_mean_row(self, tmp_path):
        cfg = tiny_config(
            methods=(MethodSpec(method="rnnp", rnnp=RnnpConfig(beta=2)),),
            corruption_rates=(0.4,), n_episodes=4,
        )
        result = run_rectification_analysis(cfg)
        path = save_rectification(result, tmp_path)
        lines = open(path, encoding="utf-8").read().splitlines()
        assert lines[0] == "episode_index,correct_before,correct_after"
        assert len(lines) == 1 + 4 + 1
        assert lines[-1].startswith("mean,")


class TestEpisodeAveragesMatchPublicApi:
    def test_harness_rnnp_accuracy_matches_per_query_calls(self):
        from rnnp.episodes import CorruptionSpec, corrupt_labels, sample_episode
        from rnnp.datagen import generate_mixture
        from rnnp.refine import classify_rnnp

        cfg = tiny_config(corruption_rates=(0.4,))
        pool = generate_mixture(cfg.mixture)
        reports = {r.method: r for r in run_experiment(cfg)}
        rcfg = cfg.methods[1].rnnp
        import rnnp.harness as hz

        for i in range(cfg.n_episodes):
            ep = sample_episode(pool, cfg.n_way, cfg.k_shot, cfg.queries_per_class,
                                cfg.seed + i)
            corr = corrupt_labels(
                ep, CorruptionSpec(rate=0.4, seed=(cfg.seed ^ hz.CORRUPTION_SEED_SALT) + i))
            preds = [classify_rnnp(corr, q, rcfg)[1] for q in corr.query_features]
            acc = float(np.mean(np.asarray(preds) == corr.query_labels))
            assert acc == reports["rnnp"].per_episode_accuracies[i]
