import random
from fractions import Fraction as F

import pytest
from hypothesis import given, strategies as st

from oracles import dot, lp_min_bruteforce, random_hrep, random_vector
from setrisk.lp import INF, EmptySet, LinearProgram, solve, strict_feasible, support_value
from setrisk.polyhedra import HRep, Polyhedron


def _h(rows, rhs=None, eqs=()):
    rhs = rhs or [0] * len(rows)
    return HRep(len(rows[0]), tuple(zip(rows, rhs)), tuple(eqs))


def test_optimal_with_certificate():
    out = solve(LinearProgram((1, 1), _h([(1, 2), (2, 1)], [16, 14])))
    assert out.status == "optimal"
    assert out.value == 10
    assert dot((1, 1), out.point) == 10
    lam = out.certificate
    assert all(x >= 0 for x in lam)
    assert 16 * lam[0] + 14 * lam[1] == 10


def test_unbounded_ray():
    out = solve(LinearProgram((1, 0), _h([(1, 2), (2, 1)], [16, 14])))
    assert out.status == "unbounded"
    r = out.certificate
    assert r[0] < 0 and r[0] + 2 * r[1] >= 0 and 2 * r[0] + r[1] >= 0


def test_infeasible_farkas():
    out = solve(LinearProgram((0,), _h([(1,), (-1,)], [1, 0])))
    assert out.status == "infeasible"
    lam = out.certificate
    assert lam[0] - lam[1] == 0 and lam[0] > 0


def test_maximize_and_equalities():
    h = HRep(3, (((1, 0, 0), 0), ((0, 1, 0), 0), ((0, 0, 1), 0)), (((1, 1, 1), 1),))
    out = solve(LinearProgram((1, 2, 3), h, "maximize"))
    assert out.status == "optimal" and out.value == 3 and out.point == (0, 0, 1)


def test_degenerate_problem_terminates():
    # many redundant tight rows at the optimum
    rows = [(1, 0), (0, 1), (1, 1), (2, 1), (1, 2), (3, 3)]
    out = solve(LinearProgram((1, 1), _h(rows)))
    assert out.status == "optimal" and out.value == 0


def test_support_value():
    p = Polyhedron.from_inequalities([(1, 2), (2, 1)], [16, 14])
    assert support_value(p, (-1, -1)) == -10
    assert support_value(p, (1, 1)) == INF
    with pytest.raises(EmptySet):
        support_value(Polyhedron.empty(2), (1, 1))
    with pytest.raises(ValueError):
        support_value(p, (1,))


def test_strict_feasible():
    orth = _h([(1, 0), (0, 1)])
    x = strict_feasible(orth, [0, 1])
    assert x[0] > 0 and x[1] > 0
    # x >= 0 and -x >= 0 cannot hold strictly
    assert strict_feasible(_h([(1,), (-1,)]), [0]) is None
    assert strict_feasible(_h([(1,), (-1,)]), []) is not None
    with pytest.raises(IndexError):
        strict_feasible(orth, [5])


def test_rejects_bad_objective():
    with pytest.raises(ValueError):
        LinearProgram((1,), _h([(1, 0)]))
    with pytest.raises(ValueError):
        LinearProgram((1, 0), _h([(1, 0)]), "best")


@given(st.integers(0, 10_000))
def test_matches_bruteforce_oracle(seed):
    rng = random.Random(seed)
    n = rng.randint(1, 3)
    h = random_hrep(rng, n, rng.randint(1, 5))
    # keep the feasible set pointed so the vertex oracle applies
    for i in range(n):
        e = [F(0)] * n
        e[i] = F(1)
        h.append((tuple(e), F(-6)))
    c = random_vector(rng, n)
    expected = lp_min_bruteforce(c, h, [], n)
    out = solve(LinearProgram(c, HRep(n, tuple(h))))
    if expected in ("infeasible", "unbounded"):
        assert out.status == expected
    else:
        assert out.status == "optimal" and out.value == expected
