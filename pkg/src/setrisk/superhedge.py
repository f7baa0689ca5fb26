"""Superhedging on finite scenario trees with proportional transaction costs.

A claim ``X`` (one portfolio per leaf) is superhedged from initial holdings
``u`` when ``u - X(leaf)`` is the sum of one solvency-cone element per node on
the leaf's path.  The primal set is computed by projecting that feasibility
polyhedron; the dual side intersects halfspaces from the extreme consistent
pricing processes (``K_t^+``-valued martingales).
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .linalg import dot, vec
from .lp import strict_feasible
from .market import OnePeriodMarket, RandomPortfolio, ShapeMismatch, SolvencyCone
from .polyhedra import HRep, Polyhedron, intersect, minkowski_sum, project, translate
from .riskmeasure import DualPair

__all__ = [
    "ScenarioTree",
    "PricingProcess",
    "SelfFinancing",
    "InvalidTree",
    "InvalidProcess",
    "NoArbitrageViolated",
    "selffinancing_cone",
    "superhedge_set",
    "consistent_pricing_cone",
    "consistent_pricing_generators",
    "superhedge_dual",
    "strict_cpp_exists",
    "cpp_to_dualpairs",
    "dualpair_to_cpp",
]


class InvalidTree(ValueError):
    pass


class InvalidProcess(ValueError):
    pass


class NoArbitrageViolated(RuntimeError):
    pass


@dataclass(frozen=True)
class ScenarioTree:
    """Nodes in topological order; node 0 is the root.

    ``parents[k]`` is the parent index (``None`` for the root), ``probs[k]`` the
    conditional probability of reaching node ``k`` from its parent (ignored for
    the root) and ``cones[k]`` the solvency cone in force at node ``k``.
    """

    parents: tuple
    probs: tuple
    cones: tuple

    def __post_init__(self):
        parents = tuple(self.parents)
        probs = vec(Fraction(1) if p is None else p for p in self.probs)
        cones = tuple(self.cones)
        n = len(parents)
        if not n or len(probs) != n or len(cones) != n:
            raise InvalidTree("parents, probs and cones must have one entry per node")
        if parents[0] is not None or any(p is None for p in parents[1:]):
            raise InvalidTree("exactly node 0 must be the root")
        if any(not 0 <= p < k for k, p in enumerate(parents) if k):
            raise InvalidTree("parents must precede their children")
        if any(p <= 0 for p in probs[1:]):
            raise InvalidTree("branch probabilities must be positive")
        d = cones[0].d
        if any(c.d != d for c in cones):
            raise InvalidTree("all solvency cones must live in the same R^d")
        object.__setattr__(self, "parents", parents)
        object.__setattr__(self, "probs", probs)
        object.__setattr__(self, "cones", cones)
        kids = self.children
        for k, ch in enumerate(kids):
            if ch and sum(probs[c] for c in ch) != 1:
                raise InvalidTree(f"branch probabilities at node {k} do not sum to 1")
        depths = {self.depth(k) for k in self.leaves}
        if len(depths) != 1:
            raise InvalidTree("all leaves must sit at the same depth")

    @classmethod
    def from_market(cls, m: OnePeriodMarket) -> "ScenarioTree":
        """The one-period tree of a market (eligible space ignored)."""
        return cls(
            (None,) + (0,) * m.n,
            (None,) + tuple(m.probs),
            (m.k_initial,) + tuple(m.k_terminal),
        )

    @property
    def size(self) -> int:
        return len(self.parents)

    @property
    def d(self) -> int:
        return self.cones[0].d

    @property
    def children(self) -> list:
        kids: list = [[] for _ in self.parents]
        for k, p in enumerate(self.parents):
            if p is not None:
                kids[p].append(k)
        return kids

    @property
    def leaves(self) -> list:
        return [k for k, ch in enumerate(self.children) if not ch]

    @property
    def horizon(self) -> int:
        return self.depth(self.leaves[0])

    def depth(self, k: int) -> int:
        t = 0
        while self.parents[k] is not None:
            k = self.parents[k]
            t += 1
        return t

    def path(self, k: int) -> list:
        """Node indices from the root down to ``k``."""
        out = [k]
        while self.parents[k] is not None:
            k = self.parents[k]
            out.append(k)
        return out[::-1]

    def node_prob(self, k: int) -> Fraction:
        p = Fraction(1)
        for j in self.path(k)[1:]:
            p *= self.probs[j]
        return p

    def leaves_below(self, k: int) -> list:
        return [l for l in self.leaves if k in self.path(l)]

    def check_claim(self, x: RandomPortfolio) -> None:
        if x.n != len(self.leaves) or x.d != self.d:
            raise ShapeMismatch(f"claim must be {len(self.leaves)} x {self.d}")


@dataclass(frozen=True)
class SelfFinancing:
    """The cone of ``(u, k_0, ..., k_N)`` with ``k_j`` in the cone of node ``j``.

    ``terminal`` maps such a vector to the leaf portfolios ``u - sum of k``
    along each path, flattened leaf-major.
    """

    cone: Polyhedron
    terminal: tuple


def selffinancing_cone(tree: ScenarioTree) -> SelfFinancing:
    d, N = tree.d, tree.size
    dim = d * (N + 1)
    ineqs, eqs = [], []
    for j, c in enumerate(tree.cones):
        h = c.cone.hrep
        off = d * (j + 1)
        for a, _ in h.inequalities:
            row = [0] * dim
            row[off : off + d] = a
            ineqs.append((tuple(row), 0))
        for a, _ in h.equalities:
            row = [0] * dim
            row[off : off + d] = a
            eqs.append((tuple(row), 0))
    cone = Polyhedron(HRep(dim, tuple(ineqs), tuple(eqs)))
    rows = []
    for leaf in tree.leaves:
        path = tree.path(leaf)
        for i in range(d):
            row = [0] * dim
            row[i] = 1
            for j in path:
                row[d * (j + 1) + i] = -1
            rows.append(tuple(row))
    return SelfFinancing(cone, tuple(rows))


def superhedge_set(tree: ScenarioTree, x: RandomPortfolio, method: str = "projection") -> Polyhedron:
    """Initial holdings ``u`` that superhedge the claim ``x``.

    ``method="projection"`` eliminates the node increments from
    ``{(u, k) : u - sum_path k = X(leaf), k_j in K(j)}``;
    ``method="backward"`` runs the set recursion
    ``S(leaf) = X(leaf) + K(leaf)``, ``S(j) = K(j) + intersection of S(children)``.
    """
    tree.check_claim(x)
    d = tree.d
    if method == "projection":
        sf = selffinancing_cone(tree)
        h = sf.cone.raw_hrep()
        flat = x.flat()
        eqs = h.equalities + tuple(zip(sf.terminal, flat))
        feas = Polyhedron(HRep(h.dim, h.inequalities, eqs))
        return project(feas, range(d), method="fm")
    if method == "backward":
        leaf_pos = {l: i for i, l in enumerate(tree.leaves)}
        sets: dict = {}
        kids = tree.children
        for j in reversed(range(tree.size)):
            k = tree.cones[j].cone
            if not kids[j]:
                sets[j] = translate(k, x.values[leaf_pos[j]])
            else:
                below = intersect(*[sets[c] for c in kids[j]]) if len(kids[j]) > 1 else sets[kids[j][0]]
                sets[j] = minkowski_sum(k, below)
        return sets[0].canonicalize()
    raise ValueError(f"unknown method {method!r}")


# ---------------------------------------------------------------------------
# consistent pricing processes


@dataclass(frozen=True)
class PricingProcess:
    """One vector ``z`` per tree node."""

    z: tuple

    def __post_init__(self):
        object.__setattr__(self, "z", tuple(vec(v) for v in self.z))

    def terminal(self, tree: ScenarioTree) -> tuple:
        return tuple(self.z[l] for l in tree.leaves)

    def violations(self, tree: ScenarioTree, strict: bool = False) -> list[str]:
        out = []
        if len(self.z) != tree.size or any(len(v) != tree.d for v in self.z):
            return ["shape does not match the tree"]
        for k, ch in enumerate(tree.children):
            if ch:
                avg = tuple(sum((tree.probs[c] * self.z[c][i] for c in ch), Fraction(0)) for i in range(tree.d))
                if avg != self.z[k]:
                    out.append(f"martingale property fails at node {k}")
        for k, c in enumerate(tree.cones):
            v = c.cone.vrep
            z = self.z[k]
            if any(dot(l, z) != 0 for l in v.lineality) or any(dot(g, z) < 0 for g in v.rays):
                out.append(f"z({k}) is not in K^+")
            elif strict and any(dot(g, z) <= 0 for g in v.rays):
                out.append(f"z({k}) is not in the relative interior of K^+")
        if not any(any(v) for v in self.z):
            out.append("process is identically zero")
        return out


def _conditional_rows(tree: ScenarioTree) -> dict:
    """``E[Z_T | node]`` as a linear map on leaf-stacked ``Z_T``."""
    leaves = tree.leaves
    pos = {l: i for i, l in enumerate(leaves)}
    d = tree.d
    out = {}
    for k in range(tree.size):
        pk = tree.node_prob(k)
        weights = {pos[l]: tree.node_prob(l) / pk for l in tree.leaves_below(k)}
        out[k] = weights
    return out, len(leaves) * d


def _cpp_rows(tree: ScenarioTree):
    """Constraint rows ``g . E[Z_T | node] >= 0`` (rays) and ``= 0`` (lineality)."""
    cond, dim = _conditional_rows(tree)
    d = tree.d
    ineqs, eqs = [], []
    for k, c in enumerate(tree.cones):
        v = c.cone.vrep

        def lift(g):
            row = [Fraction(0)] * dim
            for leaf_i, wgt in cond[k].items():
                for i in range(d):
                    row[leaf_i * d + i] += wgt * g[i]
            return tuple(row)

        ineqs += [(lift(g), 0) for g in v.rays]
        eqs += [(lift(l), 0) for l in v.lineality]
    return dim, ineqs, eqs


def consistent_pricing_cone(tree: ScenarioTree) -> Polyhedron:
    """Terminal values ``Z_T`` (leaf-stacked) of consistent pricing processes."""
    dim, ineqs, eqs = _cpp_rows(tree)
    return Polyhedron(HRep(dim, tuple(ineqs), tuple(eqs)))


def _process(tree: ScenarioTree, zt: Sequence) -> PricingProcess:
    cond, _ = _conditional_rows(tree)
    d = tree.d
    z = []
    for k in range(tree.size):
        z.append(tuple(sum((w * zt[li * d + i] for li, w in cond[k].items()), Fraction(0)) for i in range(d)))
    return PricingProcess(tuple(z))


def consistent_pricing_generators(tree: ScenarioTree) -> list:
    """Extreme consistent pricing processes, in canonical ray order."""
    v = consistent_pricing_cone(tree).vrep
    rays = list(v.rays)
    for l in v.lineality:
        rays += [l, tuple(-t for t in l)]
    out = [_process(tree, r) for r in rays]
    for p in out:
        bad = p.violations(tree)
        if bad:
            raise InvalidProcess("; ".join(bad))
    return out


def strict_cpp_exists(tree: ScenarioTree) -> bool:
    """Whether a strictly consistent pricing process exists (robust no-arbitrage)."""
    return strict_cpp(tree) is not None


def strict_cpp(tree: ScenarioTree) -> PricingProcess | None:
    dim, ineqs, eqs = _cpp_rows(tree)
    if not ineqs:
        # every cone is a subspace; K^+ is its orthogonal complement
        return None
    pt = strict_feasible(HRep(dim, tuple(ineqs), tuple(eqs)), range(len(ineqs)))
    if pt is None:
        return None
    return _process(tree, pt)


def _claim_pairing(tree: ScenarioTree, x: RandomPortfolio, zt: Sequence) -> Fraction:
    d = tree.d
    total = Fraction(0)
    for li, leaf in enumerate(tree.leaves):
        total += tree.node_prob(leaf) * dot(x.values[li], zt[li * d : (li + 1) * d])
    return total


def superhedge_dual(tree: ScenarioTree, x: RandomPortfolio) -> Polyhedron:
    """``intersection over extreme CPPs Z of {u : E[X^T Z_T] <= Z_0 . u}``.

    Raises :class:`NoArbitrageViolated` when no strictly consistent pricing
    process exists, since the equality with the primal set needs it.
    """
    tree.check_claim(x)
    if not strict_cpp_exists(tree):
        raise NoArbitrageViolated("no strictly consistent pricing process exists")
    rows = []
    for z in consistent_pricing_generators(tree):
        zt = tuple(t for v in z.terminal(tree) for t in v)
        rows.append((z.z[0], _claim_pairing(tree, x, zt)))
    return Polyhedron(HRep(tree.d, tuple(rows))).canonicalize()


def cpp_to_dualpairs(tree: ScenarioTree, z: PricingProcess) -> DualPair:
    """``w = Z_0`` and ``dQ_i/dP = (Z_T)_i / w_i`` (``Q_i = P`` where ``w_i = 0``).

    The pair is checked against the dynamic coupling: conditional expectations
    of ``diag(w) dQ/dP`` reproduce ``z`` at every node.
    """
    bad = z.violations(tree)
    if bad:
        raise InvalidProcess("; ".join(bad))
    w = z.z[0]
    if not any(w):
        raise InvalidProcess("Z_0 = 0")
    q = []
    for leaf in tree.leaves:
        p = tree.node_prob(leaf)
        zt = z.z[leaf]
        q.append(tuple(p * zt[i] / w[i] if w[i] != 0 else p for i in range(tree.d)))
    pair = DualPair(tuple(q), w)
    back = dualpair_to_cpp(tree, pair)
    if back.z != z.z:
        raise InvalidProcess("pair does not reproduce the process at every node")
    return pair


def dualpair_to_cpp(tree: ScenarioTree, pair: DualPair) -> PricingProcess:
    """``Z_T = diag(w) dQ/dP`` and ``Z_t = E[Z_T | F_t]``."""
    leaves = tree.leaves
    if len(pair.Q) != len(leaves) or len(pair.w) != tree.d:
        raise ShapeMismatch("pair shape does not match the tree")
    zt = []
    for li, leaf in enumerate(leaves):
        p = tree.node_prob(leaf)
        zt.extend(pair.w[i] * pair.Q[li][i] / p for i in range(tree.d))
    return _process(tree, zt)
