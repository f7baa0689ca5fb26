"""Small exact linear-algebra helpers over ``Fraction`` and ``int``."""
from __future__ import annotations

from fractions import Fraction
from math import gcd
from typing import Iterable, Sequence

Vector = tuple  # tuple of Fraction (or int)


def frac(x) -> Fraction:
    """Parse ``x`` as an exact rational; floats are rejected."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    raise TypeError(f"expected an exact rational, got {type(x).__name__}")


def vec(xs: Iterable) -> tuple[Fraction, ...]:
    return tuple(frac(x) for x in xs)


def dot(a: Sequence, b: Sequence):
    return sum((x * y for x, y in zip(a, b)), 0)


def primitive(v: Sequence) -> tuple[int, ...]:
    """Scale a rational vector by a positive factor to a primitive integer vector."""
    fs = [Fraction(x) for x in v]
    den = 1
    for f in fs:
        den = den * f.denominator // gcd(den, f.denominator)
    ints = [int(f * den) for f in fs]
    g = 0
    for i in ints:
        g = gcd(g, i)
    if g == 0:
        return tuple(ints)
    return tuple(i // g for i in ints)


def primitive_int(v: Sequence[int]) -> tuple[int, ...]:
    g = 0
    for i in v:
        g = gcd(g, i)
        if g == 1:
            return tuple(v)
    if g == 0:
        return tuple(v)
    return tuple(i // g for i in v)


def sign_normalize(v: tuple[int, ...]) -> tuple[int, ...]:
    """Flip sign so that the leading nonzero entry is positive."""
    for x in v:
        if x != 0:
            return v if x > 0 else tuple(-y for y in v)
    return v


def rref(rows: Sequence[Sequence]) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row echelon form; returns (nonzero rows, pivot columns)."""
    m = [[Fraction(x) for x in r] for r in rows]
    if not m:
        return [], []
    ncols = len(m[0])
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        p = m[r][c]
        m[r] = [x / p for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return m[:r], pivots


def rank(rows: Sequence[Sequence]) -> int:
    """Rank via fraction-free elimination (rows may be ints)."""
    m = [list(r) for r in rows if any(r)]
    if not m:
        return 0
    ncols = len(m[0])
    rk = 0
    for c in range(ncols):
        piv = next((i for i in range(rk, len(m)) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[rk], m[piv] = m[piv], m[rk]
        p = m[rk][c]
        for i in range(rk + 1, len(m)):
            f = m[i][c]
            if f != 0:
                m[i] = [p * a - f * b for a, b in zip(m[i], m[rk])]
        rk += 1
        if rk == len(m):
            break
    return rk


def nullspace(rows: Sequence[Sequence], ncols: int) -> list[tuple[Fraction, ...]]:
    """Basis of {x : rows @ x = 0}."""
    red, pivots = rref(rows) if rows else ([], [])
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        x = [Fraction(0)] * ncols
        x[f] = Fraction(1)
        for r, pc in zip(red, pivots):
            x[pc] = -r[f]
        basis.append(tuple(x))
    return basis


def solve(a: Sequence[Sequence], b: Sequence) -> tuple[Fraction, ...] | None:
    """Some solution of ``a x = b`` or None if inconsistent."""
    if not a:
        return None if any(b) else ()
    n = len(a[0])
    aug = [list(r) + [bi] for r, bi in zip(a, b)]
    red, pivots = rref(aug)
    if n in pivots:
        return None
    x = [Fraction(0)] * n
    for r, pc in zip(red, pivots):
        x[pc] = r[n]
    return tuple(x)


def project_out(v: Sequence, basis_rows: Sequence[Sequence], gram_inv=None) -> tuple[Fraction, ...]:
    """Orthogonal projection of ``v`` onto the complement of span(basis_rows)."""
    if not basis_rows:
        return tuple(Fraction(x) for x in v)
    if gram_inv is None:
        gram_inv = inverse([[dot(r, s) for s in basis_rows] for r in basis_rows])
    rhs = [dot(r, v) for r in basis_rows]
    coef = [dot(row, rhs) for row in gram_inv]
    out = [Fraction(x) for x in v]
    for c, r in zip(coef, basis_rows):
        if c:
            out = [o - c * ri for o, ri in zip(out, r)]
    return tuple(out)


def inverse(m: Sequence[Sequence]) -> list[list[Fraction]]:
    n = len(m)
    aug = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(m)]
    red, pivots = rref(aug)
    if pivots[:n] != list(range(n)) or len(red) < n:
        raise ZeroDivisionError("singular matrix")
    return [r[n:] for r in red]


def matvec(m: Sequence[Sequence], v: Sequence) -> tuple:
    return tuple(dot(r, v) for r in m)


def transpose(m: Sequence[Sequence]) -> list[list]:
    return [list(c) for c in zip(*m)]
