"""Session-scoped simulation runs shared by the harness and acceptance tests."""

import pytest

from byzrank import harness

ROOT_SEED = 2024


@pytest.fixture(scope="session")
def opposite_sweep():
    # default synthetic setting: n=200, k=100, p=20 ln n / n, 10 trials
    cfg = harness.ExperimentConfig(strategies=["opposite"], bf_grid=[0.0, 0.3], trials=10, seed=ROOT_SEED)
    return harness.run_synthetic_sweep(cfg)


@pytest.fixture(scope="session")
def fixed_order_rc():
    cfg = harness.ExperimentConfig(strategies=["fixed_order"], bf_grid=[0.2], algorithms=["rc"], trials=10,
                                   seed=ROOT_SEED)
    return harness.run_synthetic_sweep(cfg)


@pytest.fixture(scope="session")
def scaling_table():
    grid = harness.run_scaling_sweep(harness.scaling_config(bf_grid=[0.1], trials=10, seed=ROOT_SEED))
    tail = harness.run_scaling_sweep(harness.scaling_config(bf_grid=[0.2], n_grid=[250], trials=10,
                                                            seed=ROOT_SEED))
    return harness.ResultTable(grid.scores + tail.scores)


@pytest.fixture(scope="session")
def failure_table():
    return harness.run_failure_demo(n=200, b=10.0, C=20.0, k=100, trials=10, seed=ROOT_SEED)


@pytest.fixture(scope="session")
def dataset_table():
    cfg = harness.ExperimentConfig(strategies=["opposite_random_flips"], bf_grid=[0.0, 0.2],
                                   algorithms=["rc", "bsr"], trials=10, seed=ROOT_SEED)
    return harness.run_ranking_dataset(None, cfg)


def pytest_terminal_summary(terminalreporter):
    lines = []
    for outcome in ("passed", "failed", "error"):
        for report in terminalreporter.stats.get(outcome, []):
            if "test_acceptance" not in getattr(report, "nodeid", "") or report.when != "call" and outcome != "error":
                continue
            props = dict(getattr(report, "user_properties", []))
            line = props.get("acceptance") or f"FAIL (no result recorded): {report.nodeid}"
            lines.append((report.nodeid, line))
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)
