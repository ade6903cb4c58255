"""Session-scoped caches for the expensive ring-model runs.

The acceptance tests examine the same ten case runs from several
angles. Computing a desk run takes on the order of a minute and a
full-length run several minutes, so each is computed at most once per
session and handed out through factory fixtures.
"""

import pytest

from framecast.dynamics import desk_preset, paper_preset, run_case

DESK_CASES = ("1.1", "1.2", "1.3", "1.4", "1.5", "2.1", "3.1")
PAPER_CASES = ("2.2", "3.2", "4")


@pytest.fixture(scope="session")
def desk_runs():
    cache = {}

    def get(case_id):
        if case_id not in cache:
            cache[case_id] = run_case(desk_preset(case_id), spectrum_samples=20)
        return cache[case_id]

    return get


@pytest.fixture(scope="session")
def paper_runs():
    cache = {}

    def get(case_id):
        if case_id not in cache:
            cache[case_id] = run_case(paper_preset(case_id), spectrum_samples=20)
        return cache[case_id]

    return get
