import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from snpshare import SnpMatrix, generate_synthetic  # noqa: E402


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def small_matrix():
    return SnpMatrix.from_array([[0, 1, 2], [2, 0, 1], [1, 1, 0], [0, 2, 2]])


@pytest.fixture(scope="session")
def gwas_data():
    """n=200/group, m=1000, 50 planted SNPs. Shared by the heavier tests."""
    return generate_synthetic(200, 200, 1000, n_assoc=50, maf_shift=0.25, seed=2024)


_ACCEPTANCE = []


@pytest.fixture
def verdict(request):
    """Record a criterion outcome; lines are echoed in the terminal summary."""
    def record(label, ok, detail=""):
        line = f"{'PASS' if ok else 'FAIL'} criterion {label}: {detail}"
        print(line)
        _ACCEPTANCE.append(line)
        assert ok, line
    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE:
            terminalreporter.write_line(line)
