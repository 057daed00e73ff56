import itertools

import numpy as np
import pytest

ACCEPTANCE = {}


def fib_sphere(n, radius=1.0, center=(0.0, 0.0, 0.0)):
    """Near-uniform points on a sphere surface (Fibonacci lattice)."""
    i = np.arange(n) + 0.5
    phi = np.arccos(1 - 2 * i / n)
    theta = np.pi * (1 + 5 ** 0.5) * i
    unit = np.c_[np.cos(theta) * np.sin(phi), np.sin(theta) * np.sin(phi), np.cos(phi)]
    return unit * radius + np.asarray(center, dtype=float)


def random_rotation(rng):
    q, r = np.linalg.qr(rng.normal(size=(3, 3)))
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


def brute_force_assignment(cost):
    """(min cost, lexicographically first optimal permutation) by enumeration."""
    cost = np.asarray(cost, dtype=float)
    n = len(cost)
    perms = np.array(list(itertools.permutations(range(n))))  # lexicographic order
    totals = np.zeros(len(perms))
    for i in range(n):  # accumulate row by row, like a hand summation
        totals += cost[i, perms[:, i]]
    k = int(np.argmin(totals))  # first minimum = lexicographically smallest
    return float(totals[k]), tuple(perms[k].tolist())


def partition_sets(labels):
    labels = np.asarray(labels)
    return {frozenset(np.flatnonzero(labels == v).tolist()) for v in np.unique(labels)}


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def criterion(request):
    """Record one acceptance criterion result for the terminal summary."""
    name = request.node.name
    ACCEPTANCE[name] = "FAIL"

    def passed(detail=""):
        ACCEPTANCE[name] = "PASS" + (f"  ({detail})" if detail else "")

    return passed


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, status in ACCEPTANCE.items():
        terminalreporter.write_line(f"{status.split()[0]:4}  {name}{status[4:]}")
