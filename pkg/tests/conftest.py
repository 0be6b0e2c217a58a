import time

import pytest

from shellentropy.pipeline import RunConfig, run_pipeline

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def cluster_report():
    start = time.perf_counter()
    report = run_pipeline(RunConfig(mode="cluster_ws"))
    report.elapsed = time.perf_counter() - start
    return report


@pytest.fixture(scope="session")
def nucleus_report():
    return run_pipeline(RunConfig(mode="nucleus_ho"))


@pytest.fixture(scope="session")
def record():
    def _record(criterion, ok, detail):
        ACCEPTANCE_LINES.append(f"[{'PASS' if ok else 'FAIL'}] {criterion}: {detail}")
        return ok

    return _record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
