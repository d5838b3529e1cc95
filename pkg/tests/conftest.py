import json
from pathlib import Path

import numpy as np
import pytest

from cubfuzzy import FrequencyTable, RatingMatrix, RatingScale

DATA = Path(__file__).parent / "data"


@pytest.fixture
def scale7():
    return RatingScale(7)


@pytest.fixture(scope="session")
def orientation_counts():
    doc = json.loads((DATA / "orientation_2002_counts.json").read_text())
    return {k: np.array(v) for k, v in doc["counts"].items()}


@pytest.fixture(scope="session")
def orientation_matrix(orientation_counts):
    items = tuple(orientation_counts)
    cols = [np.repeat(np.arange(1, 8), orientation_counts[i]) for i in items]
    return RatingMatrix(items, np.column_stack(cols), RatingScale(7))


@pytest.fixture
def flat_freq():
    return FrequencyTable.from_counts(np.ones(7))


ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance():
    """Record one summary line per acceptance criterion."""

    def record(criterion, ok, detail=""):
        ACCEPTANCE_LINES.append(f"[{'PASS' if ok else 'FAIL'}] criterion {criterion}: {detail}")
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    skipped = [
        r for r in terminalreporter.stats.get("skipped", []) if "test_acceptance" in str(r.nodeid)
    ]
    if not ACCEPTANCE_LINES and not skipped:
        return
    terminalreporter.section("acceptance criteria")
    for line in ACCEPTANCE_LINES:
        terminalreporter.write_line(line)
    for r in skipped:
        reason = r.longrepr[2] if isinstance(r.longrepr, tuple) else str(r.longrepr)
        terminalreporter.write_line(f"[SKIP] {r.nodeid.split('::')[-1]}: {reason}")
