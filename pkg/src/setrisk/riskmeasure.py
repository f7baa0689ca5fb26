"""Primal and dual evaluation of set-valued risk measures.

Risk sets are polyhedra in eligible-space coordinates ``c`` (the portfolio
being ``u = B c``).  Dual variables are densities ``Y`` in R^{n*d} paired with
portfolios by ``E[X^T Y]``; a :class:`DualPair` ``(Q, w)`` is the same object
written as a vector probability measure plus a weight vector.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .acceptance import AcceptanceSet, check_axioms, eligible_embedding
from .linalg import dot, frac, vec
from .lp import INF, LinearProgram, solve, support_value
from .market import (
    OnePeriodMarket,
    RandomPortfolio,
    ShapeMismatch,
    eligible_initial_cone,
    expectation_dual_cone,
)
from .polyhedra import (
    HRep,
    NotACone,
    Polyhedron,
    intersect,
    linear_image,
    linear_preimage,
    minkowski_sum,
    recession_cone,
    subset,
    translate,
)

__all__ = [
    "RiskSet",
    "DualPair",
    "PenaltyValue",
    "InvalidDualVariable",
    "EmptyDualFamily",
    "PreconditionViolated",
    "evaluate",
    "accepts",
    "scalarize",
    "set_expectation",
    "pair_transform",
    "pair_inverse",
    "pair_halfspace",
    "conjugate",
    "penalty_min",
    "dual_generators",
    "null_densities",
    "dual_evaluate",
    "primal_dual_check",
    "axiom_harness",
    "argmin_face",
    "minimal_vertices",
]


class InvalidDualVariable(ValueError):
    pass


class EmptyDualFamily(ValueError):
    pass


class PreconditionViolated(ValueError):
    pass


# ---------------------------------------------------------------------------
# risk sets


@dataclass(frozen=True)
class RiskSet:
    """A value ``R(X)``: a finite union of polyhedra in eligible coordinates."""

    market: OnePeriodMarket
    members: tuple

    def __post_init__(self):
        m = self.market.eligible.m
        ps = [p.canonicalize() for p in self.members]
        if any(p.dim != m for p in ps):
            raise ShapeMismatch("risk set members must live in eligible coordinates")
        nonempty = [p for p in ps if not p.is_empty]
        uniq: list[Polyhedron] = []
        for p in nonempty:
            if p not in uniq:
                uniq.append(p)
        if not uniq:
            uniq = [Polyhedron.empty(m).canonicalize()]
        uniq.sort(key=lambda p: _hkey(p))
        object.__setattr__(self, "members", tuple(uniq))

    @property
    def is_union(self) -> bool:
        return len(self.members) > 1

    @property
    def polyhedron(self) -> Polyhedron:
        if self.is_union:
            raise ValueError("risk set is a union")
        return self.members[0]

    @property
    def is_empty(self) -> bool:
        return all(p.is_empty for p in self.members)

    @property
    def is_whole(self) -> bool:
        return any(p.is_full for p in self.members)

    @property
    def ambient(self) -> tuple:
        """The members mapped into R^d through the eligible basis."""
        B = self.market.eligible.matrix
        return tuple(linear_image(p, B) for p in self.members)

    def contains(self, u) -> bool:
        e = self.market.eligible
        if not e.contains(u):
            return False
        c = e.coords(u)
        return any(p.raw_hrep().satisfied_by(c) for p in self.members)

    def contains_coords(self, c) -> bool:
        return any(p.raw_hrep().satisfied_by(vec(c)) for p in self.members)

    def __eq__(self, other):
        if not isinstance(other, RiskSet):
            return NotImplemented
        return self.market.eligible == other.market.eligible and self.members == other.members

    def __hash__(self):
        return hash(self.members)

    def __repr__(self):
        return f"RiskSet({' | '.join(repr(p) for p in self.members)})"


def _hkey(p: Polyhedron):
    h = p.hrep
    return (h.inequalities, h.equalities)


def _risk_region(m: OnePeriodMarket, region: Polyhedron, x: RandomPortfolio) -> Polyhedron:
    return linear_preimage(region, eligible_embedding(m), shift=x.flat())


def evaluate(a: AcceptanceSet, x: RandomPortfolio) -> RiskSet:
    """``R_A(X) = {u in M : X + u 1 in A}`` in eligible coordinates."""
    m = a.market
    m.check_portfolio(x)
    return RiskSet(m, tuple(_risk_region(m, p, x) for p in a.members))


def accepts(a: AcceptanceSet, x: RandomPortfolio) -> bool:
    return a.contains(x)


def _coords_objective(m: OnePeriodMarket, v) -> tuple:
    v = vec(v)
    if len(v) != m.d:
        raise ShapeMismatch("direction must live in R^d")
    return tuple(dot(b, v) for b in m.eligible.basis)


def scalarize(a: AcceptanceSet, x: RandomPortfolio, v) -> Fraction | float:
    """``inf {v.u : u in R(X)}``; ``+inf`` for an empty risk set, ``-inf`` if unbounded."""
    rs = evaluate(a, x)
    return scalarize_set(rs, v)


def scalarize_set(rs: RiskSet, v) -> Fraction | float:
    obj = _coords_objective(rs.market, v)
    best: Fraction | float = INF
    for p in rs.members:
        if p.is_empty:
            continue
        out = solve(LinearProgram(obj, p.raw_hrep(), "minimize"))
        if out.status == "unbounded":
            return -INF
        if out.status == "optimal" and out.value < best:
            best = out.value
    return best


def argmin_face(p: Polyhedron, objective) -> Polyhedron:
    """The face of ``p`` on which ``objective . x`` is minimal (empty if unbounded/empty)."""
    out = solve(LinearProgram(vec(objective), p.raw_hrep(), "minimize"))
    if out.status != "optimal":
        return Polyhedron.empty(p.dim).canonicalize()
    face = Polyhedron(HRep(p.dim, (), ((vec(objective), out.value),)))
    return intersect(p, face)


def minimal_vertices(p: Polyhedron, cone: Polyhedron) -> list:
    """Vertices ``u`` of ``p`` that are minimal for the preorder generated by ``cone``.

    ``u`` is minimal iff every ``u - k`` in ``p`` with ``k`` in the cone differs
    from ``u`` by an element of the cone's lineality space.
    """
    from .polyhedra import scale

    lin = cone.vrep.lineality
    neg = scale(cone, -1)
    out = []
    for u in p.vrep.vertices:
        below = intersect(p, translate(neg, u))
        flat = Polyhedron.from_generators([u], lineality=lin, dim=p.dim)
        if subset(below, flat):
            out.append(u)
    return out


# ---------------------------------------------------------------------------
# dual variables


@dataclass(frozen=True)
class DualPair:
    """A vector probability measure ``Q`` (n x d scenario masses) and weights ``w``."""

    Q: tuple
    w: tuple

    def __post_init__(self):
        q = tuple(vec(r) for r in self.Q)
        w = vec(self.w)
        if not q or any(len(r) != len(w) for r in q):
            raise ShapeMismatch("Q must be n x d with d = len(w)")
        for i in range(len(w)):
            col = [r[i] for r in q]
            if any(x < 0 for x in col) or sum(col) != 1:
                raise InvalidDualVariable(f"Q component {i + 1} is not a probability vector")
        object.__setattr__(self, "Q", q)
        object.__setattr__(self, "w", w)

    def density(self, m: OnePeriodMarket) -> tuple:
        """``Y = diag(w) dQ/dP``, flattened."""
        return tuple(
            self.w[i] * self.Q[om][i] / p for om, p in enumerate(m.probs) for i in range(m.d)
        )

    def expectation(self, x: RandomPortfolio) -> tuple:
        """``E^Q[X]`` componentwise."""
        d = len(self.w)
        return tuple(sum((self.Q[om][i] * x.values[om][i] for om in range(len(self.Q))), Fraction(0)) for i in range(d))


@dataclass(frozen=True)
class PenaltyValue:
    """``{u in M : w.u >= offset}`` for kind ``halfspace``, else M or the empty set."""

    kind: str
    offset: Fraction | None = None

    def __post_init__(self):
        if self.kind not in ("halfspace", "whole_M", "empty"):
            raise ValueError(f"unknown penalty kind {self.kind!r}")
        if (self.kind == "halfspace") != (self.offset is not None):
            raise ValueError("only halfspace penalties carry an offset")


def _check_density(m: OnePeriodMarket, y) -> tuple:
    y = vec(y)
    if len(y) != m.n * m.d:
        raise ShapeMismatch("density must have n*d entries")
    d = m.d
    for om, k in enumerate(m.k_terminal):
        block = y[om * d : (om + 1) * d]
        v = k.cone.vrep
        if any(dot(g, block) < 0 for g in v.rays) or any(dot(l, block) != 0 for l in v.lineality):
            raise InvalidDualVariable(f"Y(w{om + 1}) is not in K_T^+(w{om + 1})")
    return y


def _as_flat(y) -> tuple:
    if isinstance(y, RandomPortfolio):
        return y.flat()
    return vec(y)


def pair_transform(m: OnePeriodMarket, y, v=None) -> DualPair:
    """``(Y, v) -> (Q, w)`` with ``w = E[Y]`` and ``Q_i = P * Y_i / w_i``.

    Components with ``w_i = 0`` get ``Q_i = P``.  ``v`` defaults to the
    orthogonal projection of ``E[Y]`` onto M, the only element of
    ``(E[Y] + M^perp) & M``.
    """
    y = _check_density(m, _as_flat(y))
    e = m.eligible
    w = m.expectation(y)
    if v is None:
        v = e.project(w)
    v = vec(v)
    if len(v) != m.d:
        raise ShapeMismatch("v must live in R^d")
    diff = tuple(a - b for a, b in zip(v, w))
    if any(dot(b, diff) != 0 for b in e.basis):
        raise InvalidDualVariable("v is not in E[Y] + M^perp")
    if not e.contains(v):
        raise InvalidDualVariable("v is not in M")
    if not any(v):
        raise InvalidDualVariable("v = 0: (E[Y] + M^perp) & (K_I^M)^+ \\ {0} is empty")
    dual = eligible_initial_cone(m).dual_ambient
    if not dual.raw_hrep().satisfied_by(v):
        raise InvalidDualVariable("v is not in (K_I^M)^+")
    d = m.d
    q = []
    for om, p in enumerate(m.probs):
        row = []
        for i in range(d):
            row.append(p * y[om * d + i] / w[i] if w[i] != 0 else p)
        q.append(tuple(row))
    return DualPair(tuple(q), w)


def pair_inverse(m: OnePeriodMarket, pair: DualPair) -> tuple:
    """``(Q, w) -> (Y, v)`` with ``Y = diag(w) dQ/dP`` and ``v`` the M-part of w."""
    if len(pair.Q) != m.n or len(pair.w) != m.d:
        raise ShapeMismatch("pair shape does not match the market")
    y = pair.density(m)
    _check_density(m, y)
    v = m.eligible.project(pair.w)
    if not any(v):
        raise InvalidDualVariable("w lies in M^perp")
    return y, v


def _halfspace(m: OnePeriodMarket, w, offset) -> Polyhedron:
    """``{c : w.(B c) >= offset}``; M or empty when w is orthogonal to M."""
    coeffs = tuple(dot(b, w) for b in m.eligible.basis)
    return Polyhedron(HRep(m.eligible.m, ((coeffs, offset),))).canonicalize()


def set_expectation(m: OnePeriodMarket, y, v, x: RandomPortfolio) -> RiskSet:
    """``{u in M : E[X^T Y] <= v.u}``."""
    m.check_portfolio(x)
    y = _as_flat(y)
    return RiskSet(m, (_halfspace(m, vec(v), m.pairing(x.flat(), y)),))


def pair_halfspace(m: OnePeriodMarket, pair: DualPair, x: RandomPortfolio) -> RiskSet:
    """``(E^Q[-X] + G(w)) & M``."""
    m.check_portfolio(x)
    eq = pair.expectation(x)
    return RiskSet(m, (_halfspace(m, pair.w, -dot(pair.w, eq)),))


def conjugate(a: AcceptanceSet, y, v) -> PenaltyValue:
    """``cl U_{X in A} {u in M : E[-X^T Y] <= v.u}`` for a density ``Y``.

    Densities here carry the sign of the conjugate: the value is a halfspace
    ``{u in M : v.u >= -s}`` with ``s = sup_{X in A} E[X^T Y]``, computed as an
    exact LP support value, and M when ``s = +inf``.  For a conical region the
    offset is 0 exactly when ``Y`` lies in ``-A^+``.
    """
    m = a.market
    y = _as_flat(y)
    if len(y) != m.n * m.d:
        raise ShapeMismatch("density must have n*d entries")
    if not any(vec(v)):
        raise InvalidDualVariable("v must be nonzero")
    region = a.region
    if region.is_empty:
        return PenaltyValue("empty")
    s = support_value(region, _mass(m, y))
    if s == INF:
        return PenaltyValue("whole_M")
    return PenaltyValue("halfspace", -s)


def _mass(m: OnePeriodMarket, y) -> tuple:
    """The Euclidean vector representing ``X -> E[X^T Y]``."""
    return tuple(y[om * m.d + i] * p for om, p in enumerate(m.probs) for i in range(m.d))


def penalty_min(a: AcceptanceSet, pair: DualPair) -> PenaltyValue:
    """``cl U_{X' in A} (E^Q[X'] + G(w)) & M``.

    The pair's density ``Y = diag(w) dQ/dP`` is nonnegative-type, so this is
    the conjugate evaluated at ``-Y``.
    """
    y, v = pair_inverse(a.market, pair)
    return conjugate(a, tuple(-t for t in y), v)


def _nontrivial(m: OnePeriodMarket, y) -> bool:
    w = m.expectation(y)
    return any(dot(b, w) != 0 for b in m.eligible.basis)


def _dual_rays(a: AcceptanceSet, dual: Polyhedron | None) -> list:
    m = a.market
    region = a.region
    if dual is None:
        if not region.is_cone:
            raise NotACone("dual generators need a conical acceptance region")
        dual = expectation_dual_cone(m, region)
    v = dual.vrep
    rays = list(v.rays)
    for l in v.lineality:
        rays += [l, tuple(-x for x in l)]
    return rays


def dual_generators(a: AcceptanceSet, dual: Polyhedron | None = None) -> list:
    """One :class:`DualPair` per extreme ray of the dual cone with ``E[Y]`` outside M^perp.

    ``dual`` may supply the expectation-dual cone computed by another route.
    """
    m = a.market
    return [pair_transform(m, y) for y in _dual_rays(a, dual) if _nontrivial(m, y)]


def null_densities(a: AcceptanceSet, dual: Polyhedron | None = None) -> list:
    """Extreme dual rays with ``E[Y]`` in M^perp; each contributes M or the empty set."""
    m = a.market
    return [y for y in _dual_rays(a, dual) if not _nontrivial(m, y)]


def dual_evaluate(
    m: OnePeriodMarket,
    pairs: Sequence[DualPair],
    penalties: Sequence[PenaltyValue] | None,
    x: RandomPortfolio,
    null: Sequence = (),
) -> RiskSet:
    """``R(X) = intersection of [-alpha(Q,w) + (E^Q[-X] + G(w)) & M]``.

    ``penalties=None`` means the coherent case (every penalty is ``G(w) & M``).
    Each density in ``null`` contributes M when ``E[X^T Y] >= 0`` and the empty
    set otherwise.
    """
    if not pairs:
        raise EmptyDualFamily("need at least one dual pair")
    if penalties is None:
        penalties = [PenaltyValue("halfspace", Fraction(0))] * len(pairs)
    if len(penalties) != len(pairs):
        raise ValueError("one penalty per pair")
    m.check_portfolio(x)
    k = m.eligible.m
    rows = []
    for pair, pen in zip(pairs, penalties):
        if pen.kind == "whole_M":
            continue
        if pen.kind == "empty":
            return RiskSet(m, (Polyhedron.empty(k),))
        coeffs = tuple(dot(b, pair.w) for b in m.eligible.basis)
        rows.append((coeffs, pen.offset - dot(pair.w, pair.expectation(x))))
    flat = x.flat()
    for y in null:
        if m.pairing(flat, y) < 0:
            return RiskSet(m, (Polyhedron.empty(k),))
    return RiskSet(m, (Polyhedron(HRep(k, tuple(rows))),))


# ---------------------------------------------------------------------------
# verification suites


@dataclass
class PrimalDualReport:
    equal: bool
    counterexamples: list = field(default_factory=list)
    pairs: int = 0
    null: int = 0

    def __bool__(self):
        return self.equal


def primal_dual_check(
    a: AcceptanceSet,
    xs: Sequence[RandomPortfolio],
    dual: Polyhedron | None = None,
) -> PrimalDualReport:
    """Compare ``evaluate`` with the dual intersection for every X in ``xs``.

    Conical regions use the extreme rays of the dual cone with zero penalty;
    other convex regions use facet normals with minimal penalties from
    :func:`conjugate`.
    """
    if a.is_union:
        raise PreconditionViolated("convexity: acceptance set is a union")
    rep = check_axioms(a)
    for flag in ("a1a", "a1b", "kT_compatible", "kI_compatible"):
        if not getattr(rep, flag):
            raise PreconditionViolated(f"{flag} fails")
    m = a.market
    region = a.region
    if region.is_cone or dual is not None:
        pairs = dual_generators(a, dual)
        nulls = null_densities(a, dual)
        penalties = None
    else:
        ys = _facet_densities(m, region)
        pairs = [pair_transform(m, y) for y in ys if _nontrivial(m, y)]
        nulls = []
        for y in ys:
            if not _nontrivial(m, y):
                pen = conjugate_null(a, y)
                nulls.append((y, pen))
        penalties = [penalty_min(a, p) for p in pairs]
    report = PrimalDualReport(True, pairs=len(pairs), null=len(nulls))
    for x in xs:
        primal = evaluate(a, x)
        if penalties is None:
            dual_set = dual_evaluate(m, pairs, None, x, null=nulls) if pairs else None
        else:
            dual_set = _dual_evaluate_offsets(m, pairs, penalties, nulls, x)
        if dual_set is None or primal != dual_set:
            report.equal = False
            report.counterexamples.append((x, primal, dual_set))
    return report


def _facet_densities(m: OnePeriodMarket, region: Polyhedron) -> list:
    h = region.hrep
    d = m.d
    rows = [a for a, _ in h.inequalities]
    for c, _ in h.equalities:
        rows += [c, tuple(-x for x in c)]
    return [tuple(r[om * d + i] / p for om, p in enumerate(m.probs) for i in range(d)) for r in rows]


def conjugate_null(a: AcceptanceSet, y) -> Fraction | float:
    """``inf_{X' in A} E[X'^T Y]`` for a density with ``E[Y]`` in M^perp."""
    m = a.market
    s = support_value(a.region, _mass(m, tuple(-t for t in y)))
    return -INF if s == INF else -s


def _dual_evaluate_offsets(m, pairs, penalties, nulls, x):
    out = dual_evaluate(m, pairs, penalties, x) if pairs else RiskSet(m, (Polyhedron.full(m.eligible.m),))
    flat = x.flat()
    for y, inf_val in nulls:
        # u in M contributes nothing to E[(X + u1)^T Y]
        if inf_val != -INF and m.pairing(flat, y) < inf_val:
            return RiskSet(m, (Polyhedron.empty(m.eligible.m),))
    return out


@dataclass
class HarnessReport:
    monotone: bool
    kT_compatible: bool
    kI_compatible: bool
    convex: bool
    cone: bool
    graph_checks: int = 0
    graph_failures: list = field(default_factory=list)
    translativity_checks: int = 0
    translativity_failures: list = field(default_factory=list)
    subadditivity_checks: int = 0
    subadditivity_failures: list = field(default_factory=list)
    convexity_failures: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not (self.graph_failures or self.translativity_failures or self.subadditivity_failures)


def _sum_sets(r1: RiskSet, r2: RiskSet) -> list:
    return [minkowski_sum(p, q) for p in r1.members for q in r2.members]


def _union_subset(ps: Sequence[Polyhedron], qs: Sequence[Polyhedron]) -> bool:
    from .acceptance import covered

    return all(covered(p, qs) for p in ps)


def axiom_harness(
    a: AcceptanceSet,
    samples: Sequence[RandomPortfolio],
    shifts: Sequence = (),
    seed: int = 0,
) -> HarnessReport:
    """Exact axiom flags plus sampled graph, translativity and subadditivity checks.

    ``shifts`` are eligible coordinate vectors used for translativity; sample
    pairs for subadditivity are drawn with ``seed``.
    """
    m = a.market
    rep = check_axioms(a)
    out = HarnessReport(rep.monotone, rep.kT_compatible, rep.kI_compatible, rep.convex, rep.cone)
    e = m.eligible
    rng = random.Random(seed)
    for x in samples:
        r = evaluate(a, x)
        for c in shifts:
            c = vec(c)
            u = e.embed(c)
            out.graph_checks += 1
            if r.contains_coords(c) != a.contains(x.shifted(u)):
                out.graph_failures.append((x, c))
            out.translativity_checks += 1
            lhs = evaluate(a, x.shifted(u))
            rhs = RiskSet(m, tuple(translate(p, tuple(-ci for ci in c)) for p in r.members))
            if lhs != rhs:
                out.translativity_failures.append((x, c))
    if rep.cone and rep.convex and samples:
        for _ in range(len(samples)):
            x1, x2 = rng.choice(samples), rng.choice(samples)
            out.subadditivity_checks += 1
            lhs = evaluate(a, x1 + x2)
            rhs = _sum_sets(evaluate(a, x1), evaluate(a, x2))
            if not _union_subset([p for p in rhs if not p.is_empty], list(lhs.members)):
                out.subadditivity_failures.append((x1, x2))
    return out


def convexity_counterexample(a: AcceptanceSet, x1: RandomPortfolio, x2: RandomPortfolio, t) -> bool:
    """True when ``t R(X1) + (1-t) R(X2)`` is not contained in ``R(t X1 + (1-t) X2)``."""
    from .polyhedra import scale

    t = frac(t)
    r1, r2 = evaluate(a, x1), evaluate(a, x2)
    mix = evaluate(a, x1.scaled(t) + x2.scaled(1 - t))
    combos = [
        minkowski_sum(scale(p, t), scale(q, 1 - t))
        for p in r1.members
        for q in r2.members
        if not p.is_empty and not q.is_empty
    ]
    return not _union_subset(combos, list(mix.members))
