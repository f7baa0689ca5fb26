import os
import sys
from fractions import Fraction as F

import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, os.path.dirname(__file__))

from setrisk.market import (  # noqa: E402
    EligibleSpace,
    OnePeriodMarket,
    RandomPortfolio,
    ScenarioSpace,
    SolvencyCone,
    frictionless_cone,
)
from setrisk.superhedge import ScenarioTree  # noqa: E402

# one line per acceptance criterion, printed in the terminal summary
ACCEPTANCE_RESULTS: list = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_RESULTS:
            terminalreporter.write_line(line)


settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def toy_market(eligible=None, probs=None):
    ki = frictionless_cone((1, 1))
    kt = (frictionless_cone((1, 2)), ki, SolvencyCone.from_inequalities([(2, 1)]))
    space = ScenarioSpace(probs) if probs else ScenarioSpace.uniform(3)
    return OnePeriodMarket(space, ki, kt, eligible or EligibleSpace.full(2))


def toy_claim():
    return RandomPortfolio(((-16, 0), (1, 0), (-7, 0)))


def illiquid_market(n=2, d=2):
    k = SolvencyCone.orthant(d)
    return OnePeriodMarket(ScenarioSpace.uniform(n), k, (k,) * n, EligibleSpace.full(d))


def mismatched_market(n=1, eligible=None):
    """Initial and terminal cones that disagree: K_I is not inside K_T."""
    ki = SolvencyCone.from_inequalities([(2, 1), (0, 1)])
    kt = SolvencyCone.from_inequalities([(1, 2), (1, 0)])
    return OnePeriodMarket(ScenarioSpace.uniform(n), ki, (kt,) * n, eligible or EligibleSpace.full(2))


def bin2_tree():
    s = {0: F(1), 1: F(2), 2: F(1, 2), 3: F(4), 4: F(1), 5: F(1), 6: F(1, 4)}
    parents = (None, 0, 0, 1, 1, 2, 2)
    probs = (None,) + (F(1, 2),) * 6
    return ScenarioTree(parents, probs, tuple(frictionless_cone((1, s[k])) for k in range(7))), s


@pytest.fixture
def toy():
    return toy_market()


@pytest.fixture
def toy_x():
    return toy_claim()


def random_tree(rng, periods=2, spread=True, max_branch=2):
    """Random two-asset tree whose cones bracket a positive martingale price ratio.

    Leaf values ``Z_T`` are drawn positive, interior nodes take conditional
    means, and each node's bid-ask cone has rates ``s (1 + e)`` and
    ``(1 + e') / s`` around ``s = z2 / z1``.  With ``spread`` the bracket is
    strict, so the martingale is a strictly consistent pricing process.
    """
    from setrisk.market import bidask_cone

    parents, probs = [None], [None]
    level = [0]
    for _ in range(periods):
        nxt = []
        for node in level:
            b = rng.randint(1, max_branch)
            for _ in range(b):
                parents.append(node)
                probs.append(F(1, b))
                nxt.append(len(parents) - 1)
        level = nxt
    kids = [[] for _ in parents]
    for k, p in enumerate(parents):
        if p is not None:
            kids[p].append(k)
    z = {}
    for k in reversed(range(len(parents))):
        if not kids[k]:
            z[k] = (F(rng.randint(1, 6)), F(rng.randint(1, 6)))
        else:
            z[k] = tuple(sum(probs[c] * z[c][i] for c in kids[k]) for i in range(2))
    cones = []
    for k in range(len(parents)):
        s = z[k][1] / z[k][0]
        e1 = F(rng.randint(int(spread), 3), 4)
        e2 = F(rng.randint(int(spread), 3), 4)
        cones.append(bidask_cone([[1, s * (1 + e1)], [(1 + e2) / s, 1]]))
    return ScenarioTree(tuple(parents), tuple(probs), tuple(cones))
