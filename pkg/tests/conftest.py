"""Session-scoped benchmark runs shared by the acceptance tests.

Both fixtures use the same base seed, so every report they produce is
episode-paired with every other and paired deltas are legal across runs.
"""

import time

import pytest

from rnnp.harness import MethodSpec, default_config, run_experiment
from rnnp.refine import RnnpConfig


@pytest.fixture(scope="session")
def benchmark_run():
    """Baseline vs refinement at 0/20/40% corruption, 1000 episodes, timed."""
    cfg = default_config(workers=1)
    t0 = time.perf_counter()
    reports = run_experiment(cfg)
    duration = time.perf_counter() - t0
    return {
        "config": cfg,
        "duration": duration,
        "reports": {(r.method, r.corruption_rate): r for r in reports},
    }


@pytest.fixture(scope="session")
def ablation_run():
    """Hard clustering and alternative hybrid sources at 40% corruption."""
    cfg = default_config(
        workers=1,
        corruption_rates=(0.4,),
        methods=(
            MethodSpec(method="rnnp", rnnp=RnnpConfig(beta=4, clustering_mode="hard"),
                       label="hard_same"),
            MethodSpec(method="rnnp", rnnp=RnnpConfig(beta=4, hybrid_source="different_class"),
                       label="soft_different"),
            MethodSpec(method="rnnp", rnnp=RnnpConfig(beta=4, hybrid_source="gaussian_noise"),
                       label="soft_noise"),
        ),
    )
    return {r.method: r for r in run_experiment(cfg)}
