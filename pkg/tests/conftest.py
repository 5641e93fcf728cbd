import numpy as np
import pytest

from bcsurv.tabular import (
    encode_and_normalize,
    fit_encoding,
    load_schema,
    synthesize_table,
    train_test_split,
)

ACCEPTANCE_RESULTS = []


@pytest.fixture(scope="session")
def schema():
    return load_schema()


@pytest.fixture(scope="session")
def planted(schema):
    """Synthetic 2000-row cohort split 80/20 (stratified, seed 0)."""
    table = synthesize_table(schema, 2000, seed=0)
    m = encode_and_normalize(table, fit_encoding(table), "Dead")
    split = train_test_split(m.n, 0.8, 0, m.labels, stratified=True)
    return m.subset(split.train), m.subset(split.test)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_runtest_logreport(report):
    criterion = dict(report.user_properties).get("criterion")
    if criterion is None:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        ACCEPTANCE_RESULTS.append((criterion, report.outcome.upper(), report))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for criterion, outcome, report in ACCEPTANCE_RESULTS:
        line = f"{outcome:7s} {criterion}"
        if outcome == "SKIPPED" and isinstance(report.longrepr, tuple):
            line += f"  ({report.longrepr[2]})"
        terminalreporter.write_line(line)
