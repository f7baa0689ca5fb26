"""Independent brute-force oracles and random instance generators for the tests.

Nothing here imports the package's linear algebra, double description or
simplex code: vertices and extreme rays are found by enumerating tight
constraint subsets and solving them with a local Gaussian elimination.
"""
from __future__ import annotations

import itertools
import random
from fractions import Fraction

F = Fraction


def gauss_solve(rows, rhs):
    """All solutions of ``rows x = rhs``: (particular, nullspace basis) or None."""
    n = len(rows[0]) if rows else 0
    m = [list(map(F, r)) + [F(b)] for r, b in zip(rows, rhs)]
    piv_cols = []
    r = 0
    for c in range(n):
        p = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if p is None:
            continue
        m[r], m[p] = m[p], m[r]
        pv = m[r][c]
        m[r] = [x / pv for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        piv_cols.append(c)
        r += 1
    if any(all(x == 0 for x in row[:n]) and row[n] != 0 for row in m):
        return None
    x = [F(0)] * n
    for i, c in enumerate(piv_cols):
        x[c] = m[i][n]
    free = [c for c in range(n) if c not in piv_cols]
    basis = []
    for f in free:
        v = [F(0)] * n
        v[f] = F(1)
        for i, c in enumerate(piv_cols):
            v[c] = -m[i][f]
        basis.append(tuple(v))
    return tuple(x), basis


def rank(rows, n):
    sol = gauss_solve(rows, [0] * len(rows)) if rows else ((F(0),) * n, [None] * n)
    return n - len(sol[1])


def dot(a, b):
    return sum((F(x) * F(y) for x, y in zip(a, b)), F(0))


def normalize(v):
    """Scale a nonzero rational vector so its entries are coprime integers."""
    import math

    v = [F(x) for x in v]
    den = 1
    for x in v:
        den = den * x.denominator // math.gcd(den, x.denominator)
    ints = [int(x * den) for x in v]
    g = 0
    for x in ints:
        g = math.gcd(g, abs(x))
    return tuple(x // g for x in ints)


def feasible(ineqs, eqs, x):
    return all(dot(a, x) >= b for a, b in ineqs) and all(dot(a, x) == b for a, b in eqs)


def brute_vertices(ineqs, eqs, n):
    """Vertices of ``{a.x >= b, e.x = f}`` (empty list if the set has lineality)."""
    out = set()
    for k in range(0, n + 1):
        for sub in itertools.combinations(range(len(ineqs)), k):
            rows = [ineqs[i][0] for i in sub] + [e for e, _ in eqs]
            rhs = [ineqs[i][1] for i in sub] + [f for _, f in eqs]
            if not rows:
                continue
            sol = gauss_solve(rows, rhs)
            if sol is None or sol[1]:
                continue
            x = sol[0]
            if feasible(ineqs, eqs, x):
                out.add(tuple(x))
    return out


def brute_extreme_rays(ineqs, eqs, n):
    """Extreme rays (normalized) of the recession cone, assuming it is pointed."""
    hom = [(a, 0) for a, _ in ineqs]
    heq = [(e, 0) for e, _ in eqs]
    out = set()
    for k in range(0, n):
        for sub in itertools.combinations(range(len(hom)), k):
            rows = [hom[i][0] for i in sub] + [e for e, _ in heq]
            if rows:
                sol = gauss_solve(rows, [0] * len(rows))
                null = sol[1]
            else:
                null = [tuple(F(int(i == j)) for j in range(n)) for i in range(n)]
            if len(null) != 1:
                continue
            for s in (1, -1):
                r = tuple(s * x for x in null[0])
                if all(dot(a, r) >= 0 for a, _ in hom):
                    out.add(normalize(r))
    return out


def lp_min_bruteforce(c, ineqs, eqs, n):
    """Minimum of ``c.x`` over a pointed polyhedron via vertices and rays."""
    verts = brute_vertices(ineqs, eqs, n)
    if not verts:
        return "infeasible"
    for r in brute_extreme_rays(ineqs, eqs, n):
        if dot(c, r) < 0:
            return "unbounded"
    return min(dot(c, v) for v in verts)


# ---------------------------------------------------------------------------
# random instances


def random_vector(rng, n, lo=-3, hi=3, den=(1, 2)):
    return tuple(F(rng.randint(lo, hi), rng.choice(den)) for _ in range(n))


def random_hrep(rng, n, m, bounded=False):
    ineqs = []
    for _ in range(m):
        a = random_vector(rng, n)
        if not any(a):
            a = tuple(F(int(i == 0)) for i in range(n))
        ineqs.append((a, F(rng.randint(-4, 2))))
    if bounded:
        for i in range(n):
            e = [F(0)] * n
            e[i] = F(1)
            ineqs.append((tuple(e), F(-5)))
            e = [F(0)] * n
            e[i] = F(-1)
            ineqs.append((tuple(e), F(-5)))
    return ineqs


def random_cone_generators(rng, n, k):
    gens = []
    while len(gens) < k:
        g = random_vector(rng, n)
        if any(g):
            gens.append(g)
    return gens


def random_rate(rng):
    return rng.choice([F(1), F(5, 4), F(3, 2), F(2), F(3)])


def random_bidask_pi(rng, d):
    return [[F(1) if i == j else random_rate(rng) for j in range(d)] for i in range(d)]


# ---------------------------------------------------------------------------
# binomial pricing


def binomial_price(parents, prices, payoff):
    """Replication price in units of asset 1 for a frictionless two-asset binomial tree.

    ``prices[k]`` is the price of asset 2 at node ``k`` (asset 1 is the numeraire),
    every internal node has exactly two children whose prices straddle the
    parent's, and ``payoff`` maps each leaf to a pair ``(a, b)`` of asset units.
    Values are computed by backward induction with the one-step risk-neutral
    weights; nothing here touches the package.
    """
    kids = {}
    for k, p in enumerate(parents):
        if p is not None:
            kids.setdefault(p, []).append(k)
    value = {}
    for k in reversed(range(len(parents))):
        if k not in kids:
            a, b = payoff[k]
            value[k] = F(a) + F(b) * F(prices[k])
            continue
        up, down = kids[k]
        su, sd, s = F(prices[up]), F(prices[down]), F(prices[k])
        q = (s - sd) / (su - sd)
        value[k] = q * value[up] + (1 - q) * value[down]
    return value[0]


def in_cone(v, gens):
    """Whether ``v`` is a nonnegative combination of ``gens`` (Caratheodory enumeration)."""
    n = len(v)
    if not any(v):
        return True
    for k in range(1, min(n, len(gens)) + 1):
        for sub in itertools.combinations(gens, k):
            cols = [[F(g[i]) for g in sub] for i in range(n)]
            sol = gauss_solve(cols, list(v))
            if sol is None or sol[1]:
                continue
            if all(c >= 0 for c in sol[0]):
                return True
    return False


def extreme_generators(gens):
    """Normalized extreme rays of a pointed ``cone(gens)``: generators outside the cone of the rest."""
    dirs = sorted({normalize(g) for g in gens if any(g)})
    return {g for g in dirs if not in_cone(g, [h for h in dirs if h != g])}
