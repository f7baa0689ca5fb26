"""Acceptance sets in scenario space R^{n*d}.

An :class:`AcceptanceSet` is a finite union of polyhedra (a single polyhedron
for every convex family; several members for value at risk).  Closures are
never taken explicitly: every set built here is polyhedral and therefore
closed, which :func:`_assert_polyhedral` documents at construction time.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .linalg import dot, frac, vec
from .lp import strict_feasible
from .market import (
    OnePeriodMarket,
    RandomPortfolio,
    eligible_initial_cone,
    from_density,
    scenario_cone,
)
from .polyhedra import (
    HRep,
    Polyhedron,
    VRep,
    dual_cone,
    intersect,
    linear_preimage,
    minkowski_sum,
    recession_cone,
    subset,
)

__all__ = [
    "AcceptanceSet",
    "AxiomReport",
    "UnionNotSupported",
    "AxiomViolation",
    "EmptyDualSet",
    "LambdaOutOfRange",
    "check_axioms",
    "augment",
    "augment_union",
    "scenario_acceptance",
    "orthant_acceptance",
    "worst_case_acceptance",
    "no_arbitrage",
    "var_acceptance",
    "avar_dual_cone",
    "avar_acceptance",
    "covered",
    "constant_embedding",
    "eligible_embedding",
]


class UnionNotSupported(ValueError):
    pass


class AxiomViolation(ValueError):
    pass


class EmptyDualSet(ValueError):
    pass


class LambdaOutOfRange(ValueError):
    pass


@dataclass(frozen=True)
class AcceptanceSet:
    market: OnePeriodMarket
    members: tuple
    label: str = ""

    def __post_init__(self):
        members = tuple(p.canonicalize() for p in self.members)
        if not members:
            raise ValueError("an acceptance set needs at least one member")
        N = self.market.n * self.market.d
        if any(p.dim != N for p in members):
            raise ValueError(f"members must live in R^{N}")
        unique = []
        for p in members:
            if p not in unique:
                unique.append(p)
        object.__setattr__(self, "members", tuple(unique))

    @classmethod
    def from_region(cls, market: OnePeriodMarket, region: Polyhedron, label: str = "") -> "AcceptanceSet":
        return cls(market, (region,), label)

    @property
    def is_union(self) -> bool:
        return len(self.members) > 1

    @property
    def region(self) -> Polyhedron:
        if self.is_union:
            raise UnionNotSupported("acceptance set is a union of polyhedra")
        return self.members[0]

    def contains(self, x: RandomPortfolio) -> bool:
        self.market.check_portfolio(x)
        flat = x.flat()
        return any(p.raw_hrep().satisfied_by(flat) for p in self.members)


# ---------------------------------------------------------------------------
# embeddings


def constant_embedding(m: OnePeriodMarket) -> list:
    """(n*d) x d matrix of ``u -> u 1``."""
    return [[Fraction(int(k == j)) for j in range(m.d)] for _ in range(m.n) for k in range(m.d)]


def eligible_embedding(m: OnePeriodMarket) -> list:
    """(n*d) x m matrix of ``c -> (B c) 1``."""
    return m.repeat_matrix()


def _repeat_cone(m: OnePeriodMarket, cone: Polyhedron) -> Polyhedron:
    v = cone.vrep
    rep = lambda x: tuple(x) * m.n
    return Polyhedron.cone([rep(r) for r in v.rays], [rep(l) for l in v.lineality], dim=m.n * m.d)


# ---------------------------------------------------------------------------
# exact union coverage


def covered(q: Polyhedron, members: Sequence[Polyhedron]) -> bool:
    """Exact decision of ``q <= union(members)``.

    ``q`` minus the union is a union of systems "q plus one strictly violated row
    per member"; each such system is tested for strict feasibility by LP, with
    depth-first pruning on partial systems.
    """
    if q.is_empty:
        return True
    if any(subset(q, p) for p in members):
        return True
    hq = q.raw_hrep()
    choices = []
    for p in members:
        h = p.hrep
        if h.is_empty_marker:
            continue
        opts = [(tuple(-x for x in a), -b) for a, b in h.inequalities]
        for c, d in h.equalities:
            opts.append((tuple(-x for x in c), -d))
            opts.append((c, d))
        choices.append(opts)

    base = list(hq.inequalities)

    def feasible(strict_rows):
        rows = base + strict_rows
        idx = list(range(len(base), len(rows)))
        return strict_feasible(HRep(q.dim, tuple(rows), hq.equalities), idx) is not None

    def search(i, strict_rows):
        if i == len(choices):
            return True
        for row in choices[i]:
            nxt = strict_rows + [row]
            if feasible(nxt) and search(i + 1, nxt):
                return True
        return False

    return not search(0, [])


# ---------------------------------------------------------------------------
# axioms


@dataclass(frozen=True)
class AxiomReport:
    nonempty_det: bool
    proper_det: bool
    monotone: bool
    a1a: bool
    a1b: bool
    convex: bool
    cone: bool
    kT_compatible: bool
    kI_compatible: bool

    @property
    def acceptance_set(self) -> bool:
        return self.nonempty_det and self.proper_det and self.monotone

    @property
    def market_compatible(self) -> bool:
        return self.kT_compatible and self.kI_compatible

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


def check_axioms(a: AcceptanceSet) -> AxiomReport:
    m = a.market
    N = m.n * m.d
    members = a.members
    det = [linear_preimage(p, constant_embedding(m)) for p in members]
    elig = [linear_preimage(p, eligible_embedding(m)) for p in members]
    orthant = Polyhedron.orthant(N)
    kt = scenario_cone(m)
    try:
        kim = _repeat_cone(m, eligible_initial_cone(m).ambient)
    except ValueError:
        kim = Polyhedron.origin(N)

    def closed_under(extra: Polyhedron) -> bool:
        return all(covered(minkowski_sum(p, extra), members) for p in members if not p.is_empty)

    if a.is_union:
        hull = Polyhedron(
            vrep=VRep(
                N,
                tuple(x for p in members for x in p.vrep.vertices),
                tuple(r for p in members for r in p.vrep.rays),
                tuple(l for p in members for l in p.vrep.lineality),
            )
        )
        convex = covered(hull, members)
    else:
        convex = True
    return AxiomReport(
        nonempty_det=any(not s.is_empty for s in det),
        proper_det=not covered(Polyhedron.full(m.d), det),
        monotone=closed_under(orthant),
        a1a=any(not s.is_empty for s in elig),
        a1b=not covered(Polyhedron.full(m.eligible.m), elig),
        convex=convex,
        cone=all(p.is_cone for p in members),
        kT_compatible=closed_under(kt),
        kI_compatible=closed_under(kim),
    )


# ---------------------------------------------------------------------------
# constructions


def _assert_polyhedral(p: Polyhedron) -> Polyhedron:
    # cl and cl_M are identities on polyhedra; canonicalization certifies polyhedrality
    return p.canonicalize()


def augment(a: AcceptanceSet) -> AcceptanceSet:
    """``A + L(K_T) + K_I^M 1``."""
    if a.is_union:
        raise UnionNotSupported("augment each member with augment_union")
    return AcceptanceSet.from_region(a.market, _augment_region(a.market, a.region), a.label and f"aug({a.label})")


def _augment_region(m: OnePeriodMarket, region: Polyhedron) -> Polyhedron:
    extra = minkowski_sum(scenario_cone(m), _repeat_cone(m, eligible_initial_cone(m).ambient))
    return _assert_polyhedral(minkowski_sum(region, extra))


def augment_union(a: AcceptanceSet) -> AcceptanceSet:
    return AcceptanceSet(a.market, tuple(_augment_region(a.market, p) for p in a.members), a.label)


def scenario_acceptance(m: OnePeriodMarket) -> AcceptanceSet:
    """``L(K_T) = {X : X(w) in K_T(w) for all w}``."""
    return AcceptanceSet.from_region(m, scenario_cone(m), "L(K_T)")


def orthant_acceptance(m: OnePeriodMarket) -> AcceptanceSet:
    return AcceptanceSet.from_region(m, Polyhedron.orthant(m.n * m.d), "L_+")


def worst_case_acceptance(m: OnePeriodMarket) -> AcceptanceSet:
    """``L(K_T) + K_I^M 1``."""
    region = minkowski_sum(scenario_cone(m), _repeat_cone(m, eligible_initial_cone(m).ambient))
    return AcceptanceSet.from_region(m, _assert_polyhedral(region), "WC")


def no_arbitrage(m: OnePeriodMarket) -> bool:
    """``(L(K_T) + K_I 1) & -L(R^d_+) == {0}``."""
    N = m.n * m.d
    c = minkowski_sum(scenario_cone(m), _repeat_cone(m, m.k_initial.cone))
    neg = Polyhedron.from_inequalities([tuple(-int(i == j) for j in range(N)) for i in range(N)])
    v = intersect(c, neg).vrep
    return not v.rays and not v.lineality


def _check_d(dset: Polyhedron, d: int, w: int) -> None:
    name = f"D(w{w + 1})"
    if dset.is_empty:
        raise AxiomViolation(f"(D0) violated: {name} is empty")
    if not subset(Polyhedron.orthant(d), dset):
        raise AxiomViolation(f"(D1a) violated: R^d_+ not contained in {name}")
    h = dset.raw_hrep()
    neg_rows = tuple((tuple(-int(i == j) for j in range(d)), 0) for i in range(d))
    rows = h.inequalities + neg_rows
    strict = range(len(h.inequalities), len(rows))
    if strict_feasible(HRep(d, rows, h.equalities), strict) is not None:
        raise AxiomViolation(f"(D1b) violated: {name} meets -int R^d_+")
    if not subset(Polyhedron.orthant(d), recession_cone(dset)):
        raise AxiomViolation(f"(D2) violated: {name} + R^d_+ not contained in {name}")


def var_acceptance(
    m: OnePeriodMarket,
    alpha,
    d_alpha: Sequence[Polyhedron] | None = None,
    augment_initial: bool = False,
) -> AcceptanceSet:
    """Value-at-risk acceptance set as a union over minimal scenario subsets.

    Member ``S`` is ``{X : X(w) in D(w) for w in S}`` for every inclusion-minimal
    ``S`` with ``P(S) >= 1 - alpha``.  With ``augment_initial`` each member gets
    ``+ K_I^M 1``.
    """
    alpha = frac(alpha)
    if not 0 <= alpha <= 1:
        raise ValueError("alpha must lie in [0, 1]")
    n, d = m.n, m.d
    ds = [k.cone for k in m.k_terminal] if d_alpha is None else list(d_alpha)
    if len(ds) != n:
        raise ValueError("need one D set per scenario")
    for w, dset in enumerate(ds):
        if dset.dim != d:
            raise ValueError("D sets must live in R^d")
        _check_d(dset, d, w)

    need = 1 - alpha
    p = m.probs
    subsets = []
    for size in range(n + 1):
        for s in itertools.combinations(range(n), size):
            if sum((p[w] for w in s), Fraction(0)) < need:
                continue
            if all(sum((p[v] for v in s if v != w), Fraction(0)) < need for w in s):
                subsets.append(s)

    members = []
    for s in subsets:
        ineqs, eqs = [], []
        for w in s:
            h = ds[w].hrep
            ineqs += [(_embed(a, w, n, d), b) for a, b in h.inequalities]
            eqs += [(_embed(c, w, n, d), e) for c, e in h.equalities]
        region = Polyhedron(HRep(n * d, tuple(ineqs), tuple(eqs)))
        if augment_initial:
            region = minkowski_sum(region, _repeat_cone(m, eligible_initial_cone(m).ambient))
        members.append(_assert_polyhedral(region))
    return AcceptanceSet(m, tuple(members), f"VaR_{alpha}")


def _embed(v, w, n, d):
    out = [Fraction(0)] * (n * d)
    out[w * d : (w + 1) * d] = list(v)
    return tuple(out)


def avar_dual_cone(m: OnePeriodMarket, lam) -> Polyhedron:
    """The cone of densities ``Y`` admissible for AV@R with level vector ``lam``.

    ``Y(w) in K_T^+(w)``, ``diag(E[Y]) mu - Y(w) in K_T^+(w)`` with
    ``mu = 1/lam`` componentwise, and ``E[Y] in K_I^+ + M^perp``.
    """
    lam = vec(lam)
    if len(lam) != m.d or any(not 0 < x <= 1 for x in lam):
        raise LambdaOutOfRange("lambda must lie in (0, 1]^d")
    n, d = m.n, m.d
    N = n * d
    mu = [1 / x for x in lam]
    p = m.probs
    ineqs, eqs = [], []

    def add_dual_membership(lin_map, w):
        # lin_map: d rows of length N giving a vector z(Y) in R^d; require z in K_T^+(w)
        v = m.k_terminal[w].cone.vrep
        for g in v.rays:
            ineqs.append((tuple(dot(g, col) for col in zip(*lin_map)), 0))
        for l in v.lineality:
            eqs.append((tuple(dot(l, col) for col in zip(*lin_map)), 0))

    for w in range(n):
        ident = [[Fraction(int(j == w * d + i)) for j in range(N)] for i in range(d)]
        add_dual_membership(ident, w)
        z = []
        for i in range(d):
            row = [Fraction(0)] * N
            for v in range(n):
                row[v * d + i] += mu[i] * p[v]
            row[w * d + i] -= 1
            z.append(row)
        add_dual_membership(z, w)

    target = minkowski_sum(m.k_initial.dual, m.eligible.orthogonal_polyhedron()).hrep
    expect = [[Fraction(0)] * N for _ in range(d)]
    for i in range(d):
        for v in range(n):
            expect[i][v * d + i] = p[v]
    for a, _ in target.inequalities:
        ineqs.append((tuple(dot(a, col) for col in zip(*expect)), 0))
    for c, _ in target.equalities:
        eqs.append((tuple(dot(c, col) for col in zip(*expect)), 0))
    return Polyhedron(HRep(N, tuple(ineqs), tuple(eqs))).canonicalize()


def _nontrivial(m: OnePeriodMarket, y) -> bool:
    w = m.expectation(y)
    return any(dot(b, w) != 0 for b in m.eligible.basis)


def avar_acceptance(m: OnePeriodMarket, lam) -> AcceptanceSet:
    """AV@R acceptance cone: the expectation-dual of :func:`avar_dual_cone`."""
    c = avar_dual_cone(m, lam)
    v = c.vrep
    if not any(_nontrivial(m, y) for y in v.rays + v.lineality):
        raise EmptyDualSet("no admissible dual pair: every density has E[Y] in M^perp")
    region = dual_cone(from_density(m, c))
    return AcceptanceSet.from_region(m, _assert_polyhedral(region), f"AVaR_{','.join(str(x) for x in vec(lam))}")
