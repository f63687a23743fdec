import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from sleephmm.simulation import MissingSpec, make_scenario, run_study  # noqa: E402

# criterion number -> (passed, detail); filled by test_acceptance.py
ACCEPTANCE: dict = {}


class StudyCache:
    """Replicate studies shared between acceptance tests in one session."""

    def __init__(self):
        self._studies = {}

    def get(self, scenario: int, missing_days: int, replicates: int, seed: int):
        key = (scenario, missing_days, replicates, seed)
        if key not in self._studies:
            self._studies[key] = run_study(
                make_scenario(scenario),
                missing=MissingSpec.last_days(missing_days),
                replicates=replicates,
                seed=seed,
            )
        return self._studies[key]


@pytest.fixture(scope="session")
def studies():
    return StudyCache()


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        passed, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if passed else 'FAIL'} - {detail}")
