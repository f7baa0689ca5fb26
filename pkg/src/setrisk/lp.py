"""Exact rational linear programming (two-phase tableau simplex, Bland's rule).

Every solve returns a certificate that is re-checked before the outcome is
handed back:

* optimal -- multipliers ``(lam, mu)`` with ``lam >= 0`` on the inequality rows,
  ``A^T lam + E^T mu = c`` and ``b.lam + f.mu`` equal to the optimal value
  (for minimization; maximization is solved as minimization of ``-c``);
* unbounded -- a ray ``r`` with ``A r >= 0``, ``E r = 0`` and ``c.r`` improving;
* infeasible -- a Farkas vector ``(lam, mu)``, ``lam >= 0``,
  ``A^T lam + E^T mu = 0`` and ``b.lam + f.mu > 0``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .linalg import dot, vec
from .polyhedra import HRep, Polyhedron

__all__ = [
    "LinearProgram",
    "LpOutcome",
    "EmptySet",
    "solve",
    "strict_feasible",
    "support_value",
    "INF",
]

INF = math.inf

OPTIMAL = "optimal"
UNBOUNDED = "unbounded"
INFEASIBLE = "infeasible"


class EmptySet(ValueError):
    pass


class CertificateError(AssertionError):
    pass


@dataclass(frozen=True)
class LinearProgram:
    objective: tuple
    constraints: HRep
    sense: str = "minimize"

    def __post_init__(self):
        obj = vec(self.objective)
        if len(obj) != self.constraints.dim:
            raise ValueError("objective length must match the constraint dimension")
        if self.sense not in ("minimize", "maximize"):
            raise ValueError("sense must be 'minimize' or 'maximize'")
        object.__setattr__(self, "objective", obj)


@dataclass(frozen=True)
class LpOutcome:
    status: str
    value: Fraction | None = None
    point: tuple | None = None
    certificate: tuple | None = None


def solve(lp: LinearProgram) -> LpOutcome:
    """Solve ``lp`` exactly; the returned certificate has already been verified."""
    h = lp.constraints
    n = h.dim
    sign = 1 if lp.sense == "minimize" else -1
    c = [sign * x for x in lp.objective]
    rows = [(list(a), b) for a, b in h.inequalities] + [(list(e), f) for e, f in h.equalities]
    m_in = len(h.inequalities)
    m = len(rows)

    # columns: x+ (n), x- (n), slack (m_in), artificial (m); rhs last
    n_struct = 2 * n + m_in
    ncols = n_struct + m
    sigma = []
    tab = []
    for i, (a, b) in enumerate(rows):
        s = -1 if b < 0 else 1
        sigma.append(s)
        row = [Fraction(0)] * (ncols + 1)
        for j in range(n):
            row[j] = s * a[j]
            row[n + j] = -s * a[j]
        if i < m_in:
            row[2 * n + i] = Fraction(-s)
        row[n_struct + i] = Fraction(1)
        row[ncols] = Fraction(s * b)
        tab.append(row)
    basis = [n_struct + i for i in range(m)]

    # phase 1
    cost1 = [Fraction(0)] * n_struct + [Fraction(1)] * m
    z = _objective_row(tab, basis, cost1, ncols)
    status, _ = _simplex(tab, basis, z, ncols, allowed=ncols)
    assert status == OPTIMAL
    if -z[ncols] > 0:
        y = [1 - z[n_struct + i] for i in range(m)]
        farkas = tuple(sigma[i] * y[i] for i in range(m))
        out = LpOutcome(INFEASIBLE, certificate=farkas)
        _verify(lp, out)
        return out

    # drive zero-level artificials out where possible
    for r in range(m):
        if basis[r] >= n_struct:
            j = next((j for j in range(n_struct) if tab[r][j] != 0), None)
            if j is not None:
                _pivot(tab, z, r, j, ncols)
                basis[r] = j

    cost2 = [Fraction(0)] * ncols
    for j in range(n):
        cost2[j] = Fraction(c[j])
        cost2[n + j] = Fraction(-c[j])
    z = _objective_row(tab, basis, cost2, ncols)
    status, entering = _simplex(tab, basis, z, ncols, allowed=n_struct)

    if status == UNBOUNDED:
        full = [Fraction(0)] * ncols
        full[entering] = Fraction(1)
        for r, bj in enumerate(basis):
            full[bj] -= tab[r][entering]
        ray = tuple(full[j] - full[n + j] for j in range(n))
        out = LpOutcome(UNBOUNDED, certificate=ray)
        _verify(lp, out)
        return out

    xs = [Fraction(0)] * ncols
    for r, bj in enumerate(basis):
        xs[bj] = tab[r][ncols]
    point = tuple(xs[j] - xs[n + j] for j in range(n))
    y = [-z[n_struct + i] for i in range(m)]
    duals = tuple(sign * sigma[i] * y[i] for i in range(m))
    value = dot(lp.objective, point)
    out = LpOutcome(OPTIMAL, value=value, point=point, certificate=duals)
    _verify(lp, out)
    return out


def _objective_row(tab, basis, cost, ncols):
    z = list(cost) + [Fraction(0)]
    for r, bj in enumerate(basis):
        cb = cost[bj]
        if cb:
            row = tab[r]
            z = [zi - cb * ri for zi, ri in zip(z, row)]
    return z


def _pivot(tab, z, r, j, ncols):
    prow = tab[r]
    p = prow[j]
    if p != 1:
        prow = [x / p for x in prow]
        tab[r] = prow
    for i, row in enumerate(tab):
        if i != r:
            f = row[j]
            if f:
                tab[i] = [a - f * b for a, b in zip(row, prow)]
    f = z[j]
    if f:
        z[:] = [a - f * b for a, b in zip(z, prow)]


def _simplex(tab, basis, z, ncols, allowed):
    while True:
        entering = next((j for j in range(allowed) if z[j] < 0), None)
        if entering is None:
            return OPTIMAL, None
        best = None
        for r, row in enumerate(tab):
            a = row[entering]
            if a > 0:
                ratio = row[ncols] / a
                if best is None or ratio < best[0] or (ratio == best[0] and basis[r] < basis[best[1]]):
                    best = (ratio, r)
        if best is None:
            return UNBOUNDED, entering
        r = best[1]
        _pivot(tab, z, r, entering, ncols)
        basis[r] = entering


def _verify(lp: LinearProgram, out: LpOutcome) -> None:
    h = lp.constraints
    A = [a for a, _ in h.inequalities]
    b = [b for _, b in h.inequalities]
    E = [e for e, _ in h.equalities]
    f = [f for _, f in h.equalities]
    m_in = len(A)
    c = lp.objective
    sign = 1 if lp.sense == "minimize" else -1
    if out.status == OPTIMAL:
        x = out.point
        if not h.satisfied_by(x):
            raise CertificateError("optimal point infeasible")
        lam, mu = out.certificate[:m_in], out.certificate[m_in:]
        if any(sign * l < 0 for l in lam):
            raise CertificateError("dual multipliers of wrong sign")
        comb = [sum((lam[i] * A[i][j] for i in range(m_in)), Fraction(0)) + sum((mu[k] * E[k][j] for k in range(len(E))), Fraction(0)) for j in range(h.dim)]
        if list(comb) != list(c):
            raise CertificateError("dual multipliers do not reproduce the objective")
        if dot(lam, b) + dot(mu, f) != out.value:
            raise CertificateError("duality gap")
    elif out.status == UNBOUNDED:
        r = out.certificate
        if any(dot(a, r) < 0 for a in A) or any(dot(e, r) != 0 for e in E):
            raise CertificateError("ray leaves the recession cone")
        if sign * dot(c, r) >= 0:
            raise CertificateError("ray does not improve the objective")
    else:
        lam, mu = out.certificate[:m_in], out.certificate[m_in:]
        if any(l < 0 for l in lam):
            raise CertificateError("Farkas multipliers of wrong sign")
        for j in range(h.dim):
            s = sum((lam[i] * A[i][j] for i in range(m_in)), Fraction(0)) + sum((mu[k] * E[k][j] for k in range(len(E))), Fraction(0))
            if s != 0:
                raise CertificateError("Farkas combination is not zero")
        if dot(lam, b) + dot(mu, f) <= 0:
            raise CertificateError("Farkas right-hand side not positive")


def strict_feasible(constraints: HRep, strict_indices: Sequence[int]) -> tuple | None:
    """A point satisfying the listed inequalities strictly and the rest weakly.

    Solved as ``max eps`` subject to ``a_i.x - eps >= b_i`` on the strict rows,
    ``eps <= 1``; a point exists iff the optimum is positive.
    """
    h = constraints
    strict = set(strict_indices)
    if any(not 0 <= i < len(h.inequalities) for i in strict):
        raise IndexError("strict index out of range")
    if h.is_empty_marker:
        return None
    n = h.dim
    ineqs = []
    for i, (a, b) in enumerate(h.inequalities):
        ineqs.append((tuple(a) + ((-1,) if i in strict else (0,)), b))
    ineqs.append(((0,) * n + (-1,), -1))
    eqs = tuple((tuple(e) + (0,), f) for e, f in h.equalities)
    lp = LinearProgram((0,) * n + (1,), HRep(n + 1, tuple(ineqs), eqs), "maximize")
    out = solve(lp)
    if out.status != OPTIMAL or out.value <= 0:
        return None
    return out.point[:n]


def support_value(p: Polyhedron, direction) -> Fraction | float:
    """``sup {direction . x : x in p}``; ``INF`` when unbounded."""
    d = vec(direction)
    if len(d) != p.dim:
        raise ValueError("direction has the wrong length")
    out = solve(LinearProgram(d, p.raw_hrep(), "maximize"))
    if out.status == INFEASIBLE:
        raise EmptySet("support value of the empty set")
    if out.status == UNBOUNDED:
        return INF
    return out.value
