from functools import lru_cache

import numpy as np
import pytest

from risopt.em_model import assemble_network, paper_scenario

# (label, passed, detail) recorded by the acceptance tests
ACCEPTANCE = []


@lru_cache(maxsize=None)
def paper_network(M=8, d_over_lambda=0.25):
    """Coupled network of the 28 GHz preset; shared across the session."""
    return assemble_network(paper_scenario(M, d_over_lambda))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def criterion():
    def record(label, passed, detail=""):
        ACCEPTANCE.append((label, bool(passed), detail))
        return bool(passed)

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for label, passed, detail in ACCEPTANCE:
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {label}  {detail}")
