"""Finite scenario spaces, eligible subspaces, solvency cones and one-period markets.

Random portfolios live in R^{n*d}, flattened scenario-major: the block
``[w*d:(w+1)*d]`` is the portfolio in scenario ``w``.  Dual variables ``Y`` use
the same layout and pair with ``X`` through ``E[X^T Y] = sum_w p_w X(w).Y(w)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .linalg import dot, frac, matvec, nullspace, rank, solve, transpose, vec
from .polyhedra import (
    HRep,
    Polyhedron,
    VRep,
    dual_cone,
    intersect,
    linear_image,
    linear_preimage,
    minkowski_sum,
    subset,
)

__all__ = [
    "ScenarioSpace",
    "EligibleSpace",
    "SolvencyCone",
    "OnePeriodMarket",
    "RandomPortfolio",
    "EligibleCone",
    "NonpositivePrice",
    "InvalidRates",
    "DegenerateEligibleCone",
    "ShapeMismatch",
    "validate_market",
    "frictionless_cone",
    "bidask_cone",
    "eligible_initial_cone",
    "scenario_cone",
    "scenario_dual_cone",
    "to_density",
    "from_density",
    "expectation_dual_cone",
]


class NonpositivePrice(ValueError):
    pass


class InvalidRates(ValueError):
    pass


class DegenerateEligibleCone(ValueError):
    pass


class ShapeMismatch(ValueError):
    pass


@dataclass(frozen=True)
class ScenarioSpace:
    probs: tuple

    def __post_init__(self):
        p = vec(self.probs)
        if not p:
            raise ValueError("need at least one scenario")
        if any(x <= 0 for x in p):
            raise ValueError("scenario probabilities must be positive")
        if sum(p) != 1:
            raise ValueError(f"probabilities sum to {sum(p)}, not 1")
        object.__setattr__(self, "probs", p)

    @classmethod
    def uniform(cls, n: int) -> "ScenarioSpace":
        return cls(tuple(Fraction(1, n) for _ in range(n)))

    @property
    def n(self) -> int:
        return len(self.probs)


@dataclass(frozen=True)
class EligibleSpace:
    """The subspace M of R^d spanned by the columns of ``basis`` (a d x m matrix)."""

    d: int
    basis: tuple  # m basis vectors of length d

    def __post_init__(self):
        cols = tuple(vec(b) for b in self.basis)
        if not cols:
            raise ValueError("eligible space needs at least one basis vector")
        if any(len(c) != self.d for c in cols):
            raise ShapeMismatch("basis vectors must have length d")
        if rank(cols) != len(cols):
            raise ValueError("eligible basis is not of full column rank")
        object.__setattr__(self, "basis", cols)

    @classmethod
    def full(cls, d: int) -> "EligibleSpace":
        return cls(d, tuple(tuple(int(i == j) for j in range(d)) for i in range(d)))

    @classmethod
    def span(cls, *vectors) -> "EligibleSpace":
        return cls(len(vectors[0]), tuple(vectors))

    @property
    def m(self) -> int:
        return len(self.basis)

    @property
    def is_full(self) -> bool:
        return self.m == self.d

    @property
    def matrix(self) -> list:
        """d x m basis matrix."""
        return transpose(self.basis)

    def embed(self, coords) -> tuple:
        c = vec(coords)
        return tuple(sum((ci * b[k] for ci, b in zip(c, self.basis)), Fraction(0)) for k in range(self.d))

    def coords(self, u) -> tuple:
        sol = solve(self.matrix, vec(u))
        if sol is None:
            raise ValueError("vector is not in the eligible space")
        return sol

    def contains(self, u) -> bool:
        return solve(self.matrix, vec(u)) is not None

    def complement(self) -> list:
        """Basis of M^perp."""
        return nullspace(self.basis, self.d)

    def project(self, w) -> tuple:
        """Orthogonal projection of ``w`` onto M."""
        w = vec(w)
        gram = [[dot(a, b) for b in self.basis] for a in self.basis]
        c = solve(gram, [dot(b, w) for b in self.basis])
        return self.embed(c)

    def as_polyhedron(self) -> Polyhedron:
        return Polyhedron.cone(lineality=self.basis, dim=self.d)

    def orthogonal_polyhedron(self) -> Polyhedron:
        comp = self.complement()
        if not comp:
            return Polyhedron.origin(self.d)
        return Polyhedron.cone(lineality=comp, dim=self.d)


@dataclass(frozen=True)
class SolvencyCone:
    cone: Polyhedron

    @property
    def d(self) -> int:
        return self.cone.dim

    @property
    def dual(self) -> Polyhedron:
        return dual_cone(self.cone)

    @classmethod
    def from_inequalities(cls, normals) -> "SolvencyCone":
        return cls(Polyhedron.from_inequalities(normals).canonicalize())

    @classmethod
    def from_generators(cls, rays, lineality=()) -> "SolvencyCone":
        rays = list(rays)
        d = len(rays[0]) if rays else len(lineality[0])
        return cls(Polyhedron.cone(rays, lineality, dim=d).canonicalize())

    @classmethod
    def orthant(cls, d: int) -> "SolvencyCone":
        return cls(Polyhedron.orthant(d).canonicalize())

    def violations(self, label: str = "K") -> list[str]:
        out = []
        if not self.cone.is_cone:
            out.append(f"{label} is not a cone")
            return out
        if not subset(Polyhedron.orthant(self.d), self.cone):
            out.append(f"{label}: R^d_+ not contained in K")
        if self.cone.is_full:
            out.append(f"{label}: K ≠ R^d violated")
        return out


@dataclass(frozen=True)
class RandomPortfolio:
    values: tuple  # n rows of length d

    def __post_init__(self):
        rows = tuple(vec(r) for r in self.values)
        if not rows or len({len(r) for r in rows}) != 1:
            raise ShapeMismatch("portfolio rows must be nonempty and of equal length")
        object.__setattr__(self, "values", rows)

    @property
    def n(self) -> int:
        return len(self.values)

    @property
    def d(self) -> int:
        return len(self.values[0])

    def flat(self) -> tuple:
        return tuple(x for r in self.values for x in r)

    @classmethod
    def from_flat(cls, flat, d: int) -> "RandomPortfolio":
        flat = vec(flat)
        return cls(tuple(flat[i : i + d] for i in range(0, len(flat), d)))

    @classmethod
    def constant(cls, u, n: int) -> "RandomPortfolio":
        return cls(tuple(vec(u) for _ in range(n)))

    def __add__(self, other: "RandomPortfolio") -> "RandomPortfolio":
        if (self.n, self.d) != (other.n, other.d):
            raise ShapeMismatch("portfolio shapes differ")
        return RandomPortfolio(tuple(tuple(a + b for a, b in zip(r, s)) for r, s in zip(self.values, other.values)))

    def __neg__(self):
        return RandomPortfolio(tuple(tuple(-a for a in r) for r in self.values))

    def __sub__(self, other):
        return self + (-other)

    def scaled(self, t) -> "RandomPortfolio":
        t = frac(t)
        return RandomPortfolio(tuple(tuple(t * a for a in r) for r in self.values))

    def shifted(self, u) -> "RandomPortfolio":
        """``X + u 1``."""
        u = vec(u)
        return RandomPortfolio(tuple(tuple(a + b for a, b in zip(r, u)) for r in self.values))


@dataclass(frozen=True)
class OnePeriodMarket:
    space: ScenarioSpace
    k_initial: SolvencyCone
    k_terminal: tuple
    eligible: EligibleSpace

    def __post_init__(self):
        object.__setattr__(self, "k_terminal", tuple(self.k_terminal))
        if len(self.k_terminal) != self.space.n:
            raise ShapeMismatch("need one terminal solvency cone per scenario")
        dims = {self.k_initial.d, self.eligible.d} | {k.d for k in self.k_terminal}
        if len(dims) != 1:
            raise ShapeMismatch("cones and eligible space disagree on d")

    @property
    def n(self) -> int:
        return self.space.n

    @property
    def d(self) -> int:
        return self.k_initial.d

    @property
    def probs(self) -> tuple:
        return self.space.probs

    def check_portfolio(self, x: RandomPortfolio) -> None:
        if (x.n, x.d) != (self.n, self.d):
            raise ShapeMismatch(f"portfolio shape {(x.n, x.d)} does not match market {(self.n, self.d)}")

    def repeat_matrix(self) -> list:
        """(n*d) x m matrix of the embedding ``c -> (B c) 1``."""
        B = self.eligible.matrix
        return [list(B[k]) for _ in range(self.n) for k in range(self.d)]

    def expectation(self, y: Sequence) -> tuple:
        """``E[Y]`` for a flattened density."""
        y = vec(y)
        d = self.d
        return tuple(sum((p * y[w * d + k] for w, p in enumerate(self.probs)), Fraction(0)) for k in range(d))

    def pairing(self, x: Sequence, y: Sequence) -> Fraction:
        """``E[X^T Y]`` for flattened X and Y."""
        d = self.d
        return sum(
            (p * dot(x[w * d : (w + 1) * d], y[w * d : (w + 1) * d]) for w, p in enumerate(self.probs)),
            Fraction(0),
        )


def validate_market(m: OnePeriodMarket) -> list[str]:
    """List every violated market invariant; empty list means valid."""
    report = m.k_initial.violations("K_I")
    for w, k in enumerate(m.k_terminal):
        report += k.violations(f"K_T(w{w + 1})")
    if not _meets_orthant(m.eligible):
        report.append("M: M and R^d_+ intersect only in {0}")
    if not report:
        kim = linear_preimage(m.k_initial.cone, m.eligible.matrix)
        if kim.is_cone and kim.is_bounded:
            report.append("K_I^M = {0} violated (degenerate eligible cone)")
    return report


def _meets_orthant(e: EligibleSpace) -> bool:
    from .lp import LinearProgram, solve as lp_solve

    # exists c with B c >= 0 and sum(B c) >= 1
    B = e.matrix
    rows = [(tuple(r), 0) for r in B]
    rows.append((tuple(sum(col) for col in zip(*B)), 1))
    out = lp_solve(LinearProgram((0,) * e.m, HRep(e.m, tuple(rows))))
    return out.status == "optimal"


def frictionless_cone(prices) -> SolvencyCone:
    """Half space ``{x : sum_i prices_i x_i >= 0}``."""
    p = vec(prices)
    if not p or any(x <= 0 for x in p):
        raise NonpositivePrice("frictionless prices must be strictly positive")
    return SolvencyCone(Polyhedron.from_inequalities([p]).canonicalize())


def bidask_cone(pi, omit: Iterable[tuple[int, int]] = ()) -> SolvencyCone:
    """Cone generated by ``e_i`` and ``pi[i][j] e_i - e_j`` for ``i != j``.

    Illiquid exchanges are dropped through ``omit`` or by a ``None`` entry.
    """
    d = len(pi)
    omit = set(omit)
    gens = [tuple(int(i == k) for k in range(d)) for i in range(d)]
    for i in range(d):
        if len(pi[i]) != d:
            raise InvalidRates("rate matrix must be square")
        if pi[i][i] is None or frac(pi[i][i]) != 1:
            raise InvalidRates("diagonal rates must equal 1")
        for j in range(d):
            if i == j or (i, j) in omit or pi[i][j] is None:
                continue
            r = frac(pi[i][j])
            if r <= 0:
                raise InvalidRates(f"rate pi[{i}][{j}] = {r} is not positive")
            g = [Fraction(0)] * d
            g[i] += r
            g[j] -= 1
            gens.append(tuple(g))
    return SolvencyCone(Polyhedron.cone(gens, dim=d).canonicalize())


@dataclass(frozen=True)
class EligibleCone:
    """K_I^M and its dual within M, in basis coordinates and in R^d."""

    coords: Polyhedron
    ambient: Polyhedron
    dual_coords: Polyhedron
    dual_ambient: Polyhedron


def eligible_initial_cone(m: OnePeriodMarket) -> EligibleCone:
    e = m.eligible
    coords = linear_preimage(m.k_initial.cone, e.matrix)
    if coords.is_bounded:
        raise DegenerateEligibleCone("K_I^M = {0}")
    ambient = linear_image(coords, e.matrix)
    dual_ambient = dual_cone(ambient, ambient_subspace=e.basis)
    dual_coords = linear_preimage(dual_ambient, e.matrix)
    return EligibleCone(coords, ambient, dual_coords, dual_ambient)


def eligible_dual_reference(m: OnePeriodMarket) -> Polyhedron:
    """``(K_I^+ + M^perp) & M`` computed without going through K_I^M."""
    s = minkowski_sum(m.k_initial.dual, m.eligible.orthogonal_polyhedron())
    return intersect(s, m.eligible.as_polyhedron())


def _block_embed(v, w, n, d):
    out = [Fraction(0)] * (n * d)
    out[w * d : (w + 1) * d] = list(v)
    return tuple(out)


def scenario_cone(m: OnePeriodMarket) -> Polyhedron:
    """The product cone of the terminal solvency cones in R^{n*d}."""
    n, d = m.n, m.d
    ineqs, eqs = [], []
    for w, k in enumerate(m.k_terminal):
        h = k.cone.hrep
        ineqs += [(_block_embed(a, w, n, d), 0) for a, _ in h.inequalities]
        eqs += [(_block_embed(c, w, n, d), 0) for c, _ in h.equalities]
    return Polyhedron(HRep(n * d, tuple(ineqs), tuple(eqs))).canonicalize()


def scenario_dual_cone(m: OnePeriodMarket) -> Polyhedron:
    """Product of the per-scenario dual cones, from embedded generators."""
    n, d = m.n, m.d
    rays, lin = [], []
    for w, k in enumerate(m.k_terminal):
        v = k.dual.vrep
        rays += [_block_embed(r, w, n, d) for r in v.rays]
        lin += [_block_embed(l, w, n, d) for l in v.lineality]
    return Polyhedron.cone(rays, lin, dim=n * d).canonicalize()


def _density_matrix(m: OnePeriodMarket, inverse: bool) -> list:
    n, d = m.n, m.d
    rows = []
    for w, p in enumerate(m.probs):
        f = p if inverse else 1 / p
        for k in range(d):
            row = [Fraction(0)] * (n * d)
            row[w * d + k] = f
            rows.append(row)
    return rows


def to_density(m: OnePeriodMarket, c: Polyhedron) -> Polyhedron:
    """Rescale a cone under the Euclidean pairing to the expectation pairing."""
    return linear_image(c, _density_matrix(m, inverse=False))


def from_density(m: OnePeriodMarket, c: Polyhedron) -> Polyhedron:
    return linear_image(c, _density_matrix(m, inverse=True))


def expectation_dual_cone(m: OnePeriodMarket, c: Polyhedron) -> Polyhedron:
    """``{Y : E[X^T Y] >= 0 for all X in c}``."""
    return to_density(m, dual_cone(c))
