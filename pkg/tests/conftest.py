import itertools

import numpy as np
import pytest

from permcorr import new_coefficient_matrix


def random_symmetric_hollow(n, rng, low=-1.0, high=1.0):
    u = np.triu(rng.uniform(low, high, (n, n)), 1)
    return new_coefficient_matrix(u + u.T, "symmetric", hollow=True)


def random_antisymmetric(n, rng):
    u = np.triu(rng.uniform(-1.0, 1.0, (n, n)), 1)
    return new_coefficient_matrix(u - u.T, "antisymmetric", hollow=True)


def random_symmetric(n, rng):
    u = np.triu(rng.uniform(-1.0, 1.0, (n, n)))
    return new_coefficient_matrix(u + np.triu(u, 1).T, "symmetric")


def random_general(n, rng):
    return new_coefficient_matrix(rng.uniform(-1.0, 1.0, (n, n)), "general")


def centered_symmetric_hollow(n, rng):
    u = np.triu(rng.uniform(-1.0, 1.0, (n, n)), 1)
    u = u + u.T
    u = u - u.sum() / (n * (n - 1))
    np.fill_diagonal(u, 0.0)
    return new_coefficient_matrix(u, "symmetric", hollow=True)


def brute_force_gammas(a, b):
    """Γ for every permutation by plain Python loops, independent of the engine."""
    ea, eb = a.entries.tolist(), b.entries.tolist()
    n = len(ea)
    out = []
    for p in itertools.permutations(range(n)):
        out.append(sum(ea[i][j] * eb[p[i]][p[j]] for i in range(n) for j in range(n)))
    return np.array(out)


def naive_distinct_sum(e, labels):
    """Σ e[x,y] e[z,w] over index tuples whose tie pattern equals ``labels`` exactly."""
    n = e.shape[0]
    total = 0.0
    for t in itertools.product(range(n), repeat=4):
        if all((t[p] == t[q]) == (labels[p] == labels[q]) for p in range(4) for q in range(4)):
            total += e[t[0], t[1]] * e[t[2], t[3]]
    return total


def pair_matrix(n=3):
    b = np.zeros((n, n))
    b[0, 1] = b[1, 0] = 1.0
    return new_coefficient_matrix(b, "symmetric", hollow=True)


def complete_graph(n):
    return new_coefficient_matrix(1.0 - np.eye(n), "symmetric", hollow=True)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# one line per acceptance criterion, repeated at the end of the run
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
