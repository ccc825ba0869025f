import itertools
import random
from fractions import Fraction

import pytest

from dcrv import new_model

F = Fraction


def brute_sequence_law(p, delta, n):
    """Every sequence with its probability, written straight from the definitions.

    Later draws take ``p_j + delta * (1 - p_j)`` for the first draw's
    category and ``(1 - delta) * p_j`` otherwise.  Independent of the
    library's enumeration code.
    """
    K = len(p)
    out = {}
    for e in itertools.product(range(1, K + 1), repeat=n):
        first = e[0]
        prob = p[first - 1]
        for v in e[1:]:
            if v == first:
                prob *= p[v - 1] + delta * (1 - p[v - 1])
            else:
                prob *= (1 - delta) * p[v - 1]
        out[e] = prob
    return out


def brute_count_law(p, delta, n):
    K = len(p)
    out = {}
    for e, m in brute_sequence_law(p, delta, n).items():
        x = tuple(e.count(c) for c in range(1, K + 1))
        out[x] = out.get(x, 0) + m
    return out


def random_fraction_p(rng, K, denom=20):
    w = [rng.randint(1, denom) for _ in range(K)]
    s = sum(w)
    return [F(v, s) for v in w]


DELTAS = [F(0), F(1, 4), F(1, 2), F(3, 4), F(1)]


def model_grid(Ks=(2, 3), per_cell=5, seed=2024):
    """(K, delta, model) grid with random rational p per cell."""
    rng = random.Random(seed)
    grid = []
    for K in Ks:
        for d in DELTAS:
            for _ in range(per_cell):
                grid.append(new_model(random_fraction_p(rng, K), d))
    return grid


@pytest.fixture
def uniform3():
    return new_model([F(1, 3)] * 3, F(1, 2))


@pytest.fixture
def skewed3():
    return new_model(["0.2", "0.3", "0.5"], "0.4")


# Acceptance bookkeeping: tests marked ``acceptance("ACnn", "title")`` get one
# PASS/FAIL line each in the terminal summary.

_ACCEPTANCE = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(cid, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("acceptance")
    if mark is None:
        return
    cid, title = mark.args
    if rep.when == "call" or (rep.when == "setup" and rep.outcome != "passed"):
        _ACCEPTANCE[cid] = (title, rep.outcome, rep.duration)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for cid in sorted(_ACCEPTANCE):
        title, outcome, duration = _ACCEPTANCE[cid]
        status = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"{cid} {status} ({duration:.2f}s) {title}")
