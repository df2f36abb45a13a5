import random

import numpy as np
import pytest

from pagerank_games.graph import generate, k_parameter, random_tree


def random_q(n, rng):
    w = np.array([rng.random() + 0.05 for _ in range(n)])
    return w / w.sum()


def random_connected(rng, n_min=2, n_max=7, k_max=None):
    """Connected gnp sample, optionally rejecting k(G) > k_max."""
    while True:
        n = rng.randint(n_min, n_max)
        G = generate("gnp", n, p=rng.uniform(0.25, 0.85), seed=rng.randrange(2 ** 31), connected=True)
        if G.n < n_min:
            continue
        if k_max is not None and k_parameter(G).k > k_max:
            continue
        return G


def random_trees(count, n_min, n_max, seed):
    rng = random.Random(seed)
    return [random_tree(rng.randint(n_min, n_max), rng) for _ in range(count)]


@pytest.fixture
def rng():
    return random.Random(12345)


ACCEPTANCE_LINES = []


@pytest.fixture
def criterion(request):
    """Record one PASS/FAIL line per acceptance criterion and print it."""

    def record(number, ok, detail):
        line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split(":")[0].split()[1])):
            terminalreporter.write_line(line)
