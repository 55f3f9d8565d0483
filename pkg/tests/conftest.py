import itertools

import numpy as np
import pytest
from hypothesis import settings

from binoa.core import BinaryArray

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

# Lines recorded by tests/test_acceptance.py, echoed after the run.
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def naive_strength_ok(matrix: np.ndarray, t: int) -> bool:
    """Recount every t-subset and tuple straight from the 0/1 matrix."""
    N, n = matrix.shape
    if N % (1 << t):
        return False
    lam = N // (1 << t)
    for cols in itertools.combinations(range(n), t):
        for tup in itertools.product((0, 1), repeat=t):
            hits = sum(all(row[c] == v for c, v in zip(cols, tup)) for row in matrix)
            if hits != lam:
                return False
    return True


def even_weight(n: int) -> BinaryArray:
    return BinaryArray(n, [w for w in range(1 << n) if bin(w).count("1") % 2 == 0])


@pytest.fixture(scope="session")
def nr():
    from binoa.boolean import nordstrom_robinson

    return nordstrom_robinson()
