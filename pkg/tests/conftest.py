import numpy as np
import pytest

from polaropinion.model import Ensemble


def random_ensemble(rng, n_max=200, dims=(1, 2, 3)):
    n = int(rng.integers(2, n_max + 1))
    d = int(rng.choice(dims))
    kind = rng.integers(3)
    if kind == 0:
        z = rng.normal(size=(n, d)) * rng.uniform(0.1, 10)
    elif kind == 1:
        z = rng.uniform(-5, 5, size=(n, d))
    else:
        # a few tight blobs
        centers = rng.uniform(-5, 5, size=(3, d))
        z = centers[rng.integers(3, size=n)] + 0.3 * rng.normal(size=(n, d))
    return Ensemble(z)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def unit_square():
    return np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])


# one line per acceptance criterion, printed after the run
CRITERIA = []


def report(number, title, passed, detail=""):
    line = f"criterion {number:>2} {'PASS' if passed else 'FAIL'}  {title}"
    if detail:
        line += f"  [{detail}]"
    CRITERIA.append((number, line))
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if CRITERIA:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(CRITERIA):
            terminalreporter.write_line(line)
