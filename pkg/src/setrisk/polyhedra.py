"""Exact polyhedral geometry.

Polyhedra are stored by an H-representation (``normal . x >= offset`` rows plus
equalities), a V-representation (vertices, rays, lineality) or both.  Conversion
between the two uses the double description method on the homogenized cone,
carried out over Python integers so that every result is exact.

Canonical forms
---------------
* H: equalities are the reduced row echelon basis of the affine hull scaled to
  primitive integer rows with positive leading entry; inequalities are the
  facets, made orthogonal to the equality rows (in homogenized coordinates) and
  scaled to primitive integers.  Rows are sorted lexicographically.  The empty
  set is the single row ``0 . x >= 1``.
* V: lineality is an RREF basis (primitive integer rows); rays and vertices are
  projected onto the orthogonal complement of the lineality space, rays scaled
  to primitive integers.  Everything sorted.

Two polyhedra are equal iff their canonical H-representations are equal.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .linalg import (
    dot,
    frac,
    inverse,
    primitive,
    primitive_int,
    project_out,
    rank,
    rref,
    sign_normalize,
    vec,
)

__all__ = [
    "HRep",
    "VRep",
    "Polyhedron",
    "DimensionMismatch",
    "NotACone",
    "dd_convert",
    "dual_cone",
    "minkowski_sum",
    "intersect",
    "project",
    "subset",
    "contains",
    "equal",
    "linear_image",
    "linear_preimage",
    "recession_cone",
]


class DimensionMismatch(ValueError):
    pass


class NotACone(ValueError):
    pass


Row = tuple  # (normal: tuple[Fraction, ...], offset: Fraction)


def _clean_row(normal, offset, dim):
    normal = vec(normal)
    if len(normal) != dim:
        raise DimensionMismatch(f"normal of length {len(normal)} in dimension {dim}")
    return normal, frac(offset)


@dataclass(frozen=True)
class HRep:
    """``{x : a.x >= b for (a, b) in inequalities, c.x = d for (c, d) in equalities}``."""

    dim: int
    inequalities: tuple = ()
    equalities: tuple = ()

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dim must be positive")
        empty = False
        ineqs = []
        for a, b in self.inequalities:
            a, b = _clean_row(a, b, self.dim)
            if not any(a):
                if b > 0:
                    empty = True
                continue
            ineqs.append((a, b))
        eqs = []
        for c, d in self.equalities:
            c, d = _clean_row(c, d, self.dim)
            if not any(c):
                if d != 0:
                    empty = True
                continue
            eqs.append((c, d))
        if empty:
            ineqs = [(tuple(Fraction(0) for _ in range(self.dim)), Fraction(1))]
            eqs = []
        object.__setattr__(self, "inequalities", tuple(ineqs))
        object.__setattr__(self, "equalities", tuple(eqs))

    @property
    def is_empty_marker(self) -> bool:
        return any(not any(a) for a, _ in self.inequalities)

    def satisfied_by(self, x: Sequence) -> bool:
        return all(dot(a, x) >= b for a, b in self.inequalities) and all(
            dot(c, x) == d for c, d in self.equalities
        )


@dataclass(frozen=True)
class VRep:
    """``conv(vertices) + cone(rays) + span(lineality)``."""

    dim: int
    vertices: tuple = ()
    rays: tuple = ()
    lineality: tuple = ()

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dim must be positive")
        for name in ("vertices", "rays", "lineality"):
            vs = []
            for v in getattr(self, name):
                v = vec(v)
                if len(v) != self.dim:
                    raise DimensionMismatch(f"{name} entry of length {len(v)} in dimension {self.dim}")
                if name != "vertices" and not any(v):
                    continue
                vs.append(v)
            object.__setattr__(self, name, tuple(vs))

    @property
    def is_empty(self) -> bool:
        return not self.vertices


# ---------------------------------------------------------------------------
# double description over integers


def _idot(a, b) -> int:
    return sum(x * y for x, y in zip(a, b))


def _combine(c1, v1, c2, v2):
    return primitive_int(tuple(c1 * x + c2 * y for x, y in zip(v1, v2)))


def _cone_dd(ineqs: list, eqs: list, n: int):
    """Generators of ``{y in Z^n : a.y >= 0 (ineqs), c.y = 0 (eqs)}``.

    Returns ``(rays, lineality)`` as lists of primitive integer tuples; rays are
    the extreme rays of the cone modulo its lineality space.
    """
    lin = [tuple(int(i == j) for j in range(n)) for i in range(n)]
    rays: list[tuple[tuple[int, ...], int]] = []  # (vector, bitmask of tight processed ineqs)
    processed: list[tuple[int, ...]] = []
    eq_rows: list[tuple[int, ...]] = []

    for c in eqs:
        idx = next((i for i, l in enumerate(lin) if _idot(c, l) != 0), None)
        if idx is not None:
            l0 = lin.pop(idx)
            s0 = _idot(c, l0)
            if s0 < 0:
                l0, s0 = tuple(-x for x in l0), -s0
            lin = [_combine(s0, l, -_idot(c, l), l0) for l in lin]
            rays = [(_combine(s0, r, -_idot(c, r), l0), m) for r, m in rays]
        else:
            rays = _dd_cut(c, rays, processed, eq_rows, len(lin), n, keep_positive=False, bit=None)
        eq_rows.append(c)

    for a in ineqs:
        k = len(processed)
        bit = 1 << k
        idx = next((i for i, l in enumerate(lin) if _idot(a, l) != 0), None)
        if idx is not None:
            l0 = lin.pop(idx)
            s0 = _idot(a, l0)
            if s0 < 0:
                l0, s0 = tuple(-x for x in l0), -s0
            lin = [_combine(s0, l, -_idot(a, l), l0) for l in lin]
            rays = [(_combine(s0, r, -_idot(a, r), l0), m | bit) for r, m in rays]
            rays.append((l0, bit - 1))
        else:
            rays = _dd_cut(a, rays, processed, eq_rows, len(lin), n, keep_positive=True, bit=bit)
        processed.append(a)

    return [r for r, _ in rays], lin


def _dd_cut(a, rays, processed, eq_rows, nlin, n, keep_positive, bit):
    pos, zero, neg = [], [], []
    for r, m in rays:
        s = _idot(a, r)
        if s > 0:
            pos.append((r, m, s))
        elif s < 0:
            neg.append((r, m, s))
        else:
            zero.append((r, m))
    new = []
    if keep_positive:
        new.extend((r, m) for r, m, _ in pos)
    add = bit or 0
    new.extend((r, m | add) for r, m in zero)
    if pos and neg:
        target = n - nlin - 2
        eq_rank = rank(eq_rows) if eq_rows else 0
        need = target - eq_rank
        for rp, mp, sp in pos:
            for rn, mn, sn in neg:
                common = mp & mn
                if bin(common).count("1") < need:
                    continue
                if not _rank_ok(common, processed, eq_rows, target):
                    continue
                new.append((_combine(sp, rn, -sn, rp), common | add))
    return new


def _rank_ok(mask, processed, eq_rows, target) -> bool:
    rows = list(eq_rows)
    i = 0
    while mask:
        if mask & 1:
            rows.append(processed[i])
        mask >>= 1
        i += 1
    return rank(rows) == target


# ---------------------------------------------------------------------------
# conversions


def _h_rows_homogeneous(h: HRep):
    ineqs = [primitive((1,) + tuple(0 for _ in range(h.dim)))]
    for a, b in h.inequalities:
        ineqs.append(primitive((-b,) + a))
    eqs = [primitive((-d,) + c) for c, d in h.equalities]
    return ineqs, eqs


def _h_to_v(h: HRep) -> VRep:
    if h.is_empty_marker:
        return VRep(h.dim)
    ineqs, eqs = _h_rows_homogeneous(h)
    rays, lin = _cone_dd(ineqs, eqs, h.dim + 1)
    vertices = [tuple(Fraction(x, r[0]) for x in r[1:]) for r in rays if r[0] > 0]
    if not vertices:
        return VRep(h.dim)
    out_rays = [r[1:] for r in rays if r[0] == 0]
    out_lin = [l[1:] for l in lin]
    return VRep(h.dim, tuple(vertices), tuple(out_rays), tuple(out_lin))


def _v_to_h(v: VRep) -> HRep:
    if v.is_empty:
        return HRep(v.dim, (((0,) * v.dim, 1),))
    gens = [primitive((1,) + tuple(x)) for x in v.vertices]
    gens += [primitive((0,) + tuple(r)) for r in v.rays]
    lins = [primitive((0,) + tuple(l)) for l in v.lineality]
    rays, lin = _cone_dd(gens, lins, v.dim + 1)
    ineqs = [(r[1:], -r[0]) for r in rays if any(r[1:])]
    eqs = [(l[1:], -l[0]) for l in lin]
    return HRep(v.dim, tuple(ineqs), tuple(eqs))


def _canonical_h(h: HRep) -> HRep:
    if h.is_empty_marker:
        return HRep(h.dim, (((0,) * h.dim, 1),))
    # homogeneous rows with the offset last: (a, -b)
    eq_rows = [tuple(c) + (-d,) for c, d in h.equalities]
    red, pivots = rref(eq_rows) if eq_rows else ([], [])
    if h.dim in pivots:
        return HRep(h.dim, (((0,) * h.dim, 1),))
    eqs = sorted(sign_normalize(primitive(r)) for r in red)
    gram_inv = inverse([[dot(r, s) for s in red] for r in red]) if red else None
    ineqs = set()
    for a, b in h.inequalities:
        row = project_out(tuple(a) + (-b,), red, gram_inv)
        if not any(row[:-1]):
            if row[-1] < 0:
                return HRep(h.dim, (((0,) * h.dim, 1),))
            continue
        ineqs.add(primitive(row))
    ineq_rows = sorted(ineqs)
    return HRep(
        h.dim,
        tuple((r[:-1], -r[-1]) for r in ineq_rows),
        tuple((r[:-1], -r[-1]) for r in eqs),
    )


def _canonical_v(v: VRep) -> VRep:
    if v.is_empty:
        return VRep(v.dim)
    red, _ = rref(v.lineality) if v.lineality else ([], [])
    lin = sorted(sign_normalize(primitive(r)) for r in red)
    lin_f = [tuple(Fraction(x) for x in l) for l in lin]
    gram_inv = inverse([[dot(r, s) for s in lin_f] for r in lin_f]) if lin_f else None
    rays = set()
    for r in v.rays:
        p = project_out(r, lin_f, gram_inv)
        if any(p):
            rays.add(primitive(p))
    verts = {project_out(x, lin_f, gram_inv) for x in v.vertices}
    return VRep(v.dim, tuple(sorted(verts)), tuple(sorted(rays)), tuple(lin))


# ---------------------------------------------------------------------------
# the polyhedron value type


class Polyhedron:
    """An immutable convex polyhedron with lazily computed canonical forms."""

    __slots__ = ("dim", "_h", "_v", "_canonical")

    def __init__(self, hrep: HRep | None = None, vrep: VRep | None = None, canonical: bool = False):
        if hrep is None and vrep is None:
            raise ValueError("at least one representation is required")
        if hrep is not None and vrep is not None and hrep.dim != vrep.dim:
            raise DimensionMismatch("representations disagree on dimension")
        self.dim = (hrep or vrep).dim
        self._h = hrep
        self._v = vrep
        self._canonical = canonical

    # constructors ---------------------------------------------------------
    @classmethod
    def from_inequalities(cls, normals, offsets=None, eq_normals=(), eq_offsets=None, dim=None):
        normals = [vec(a) for a in normals]
        eq_normals = [vec(c) for c in eq_normals]
        if dim is None:
            if normals:
                dim = len(normals[0])
            elif eq_normals:
                dim = len(eq_normals[0])
            else:
                raise ValueError("dim required for an unconstrained polyhedron")
        offsets = [0] * len(normals) if offsets is None else offsets
        eq_offsets = [0] * len(eq_normals) if eq_offsets is None else eq_offsets
        return cls(HRep(dim, tuple(zip(normals, offsets)), tuple(zip(eq_normals, eq_offsets))))

    @classmethod
    def from_generators(cls, vertices=(), rays=(), lineality=(), dim=None):
        if dim is None:
            for group in (vertices, rays, lineality):
                if group:
                    dim = len(group[0])
                    break
        if dim is None:
            raise ValueError("dim required for an empty generator list")
        return cls(vrep=VRep(dim, tuple(vertices), tuple(rays), tuple(lineality)))

    @classmethod
    def cone(cls, rays=(), lineality=(), dim=None):
        if dim is None:
            dim = len(rays[0]) if rays else len(lineality[0])
        return cls.from_generators([(0,) * dim], rays, lineality, dim=dim)

    @classmethod
    def full(cls, dim: int):
        return cls(HRep(dim), VRep(dim, ((0,) * dim,), (), tuple(_unit(i, dim) for i in range(dim))), canonical=False)

    @classmethod
    def empty(cls, dim: int):
        return cls(HRep(dim, (((0,) * dim, 1),)), VRep(dim))

    @classmethod
    def origin(cls, dim: int):
        return cls.from_generators([(0,) * dim], dim=dim)

    @classmethod
    def orthant(cls, dim: int):
        return cls.from_inequalities([_unit(i, dim) for i in range(dim)], dim=dim)

    @classmethod
    def point(cls, x):
        return cls.from_generators([x])

    # representations ------------------------------------------------------
    def _ensure(self):
        if self._canonical:
            return
        if self._h is not None:
            v = _canonical_v(_h_to_v(self._h))
            h = _canonical_h(_v_to_h(v))
        else:
            h = _canonical_h(_v_to_h(self._v))
            v = _canonical_v(_h_to_v(h))
        self._h, self._v, self._canonical = h, v, True

    @property
    def hrep(self) -> HRep:
        """Canonical H-representation."""
        self._ensure()
        return self._h

    @property
    def vrep(self) -> VRep:
        """Canonical V-representation."""
        self._ensure()
        return self._v

    def raw_hrep(self) -> HRep:
        """Some H-representation, without forcing canonicalization."""
        if self._h is not None:
            return self._h
        return _v_to_h(self._v)

    def raw_vrep(self) -> VRep:
        if self._v is not None:
            return self._v
        return _h_to_v(self._h)

    @property
    def canonical(self) -> bool:
        return self._canonical

    def canonicalize(self) -> "Polyhedron":
        self._ensure()
        return self

    # predicates -----------------------------------------------------------
    @property
    def is_empty(self) -> bool:
        if self._v is not None:
            return self._v.is_empty
        if self._h.is_empty_marker:
            return True
        return self.raw_vrep().is_empty

    @property
    def is_cone(self) -> bool:
        v = self.vrep
        return not v.is_empty and all(not any(x) for x in v.vertices)

    @property
    def is_full(self) -> bool:
        h = self.hrep
        return not h.inequalities and not h.equalities

    @property
    def is_bounded(self) -> bool:
        v = self.vrep
        return not v.rays and not v.lineality

    def __contains__(self, x) -> bool:
        return contains(self, x)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Polyhedron):
            return NotImplemented
        return self.dim == other.dim and self.hrep == other.hrep

    def __hash__(self):
        return hash((self.dim, self.hrep))

    def __repr__(self):
        if self._canonical or self._h is not None:
            h = self.hrep if self._canonical else self._h
            if h.is_empty_marker:
                return f"Polyhedron(dim={self.dim}, empty)"
            parts = [f"{_fmt_row(a)} >= {b}" for a, b in h.inequalities]
            parts += [f"{_fmt_row(c)} = {d}" for c, d in h.equalities]
            return f"Polyhedron(dim={self.dim}, [{'; '.join(parts) or 'R^n'}])"
        return f"Polyhedron(dim={self.dim}, vrep={self._v})"

    # arithmetic sugar -----------------------------------------------------
    def __add__(self, other):
        if isinstance(other, Polyhedron):
            return minkowski_sum(self, other)
        return translate(self, other)

    def __and__(self, other):
        return intersect(self, other)

    def __le__(self, other):
        return subset(self, other)

    def __neg__(self):
        return scale(self, -1)


def _unit(i, n):
    return tuple(int(i == j) for j in range(n))


def _fmt_row(a):
    return "(" + ",".join(str(x) for x in a) + ")"


# ---------------------------------------------------------------------------
# operations


def dd_convert(rep: HRep | VRep) -> Polyhedron:
    """Both canonical representations of the polyhedron described by ``rep``."""
    if isinstance(rep, HRep):
        p = Polyhedron(hrep=rep)
    elif isinstance(rep, VRep):
        p = Polyhedron(vrep=rep)
    else:
        raise TypeError("expected HRep or VRep")
    return p.canonicalize()


def _check_dims(*ps):
    dims = {p.dim for p in ps}
    if len(dims) != 1:
        raise DimensionMismatch(f"dimensions differ: {sorted(dims)}")


def dual_cone(c: Polyhedron, ambient_subspace: Sequence[Sequence] | None = None) -> Polyhedron:
    """``{v : v.x >= 0 for all x in c}``, optionally intersected with span(basis).

    ``ambient_subspace`` is a list of spanning vectors of the subspace in which the
    dual is taken.
    """
    v = c.vrep
    if v.is_empty or any(any(x) for x in v.vertices):
        raise NotACone("dual_cone needs a nonempty cone")
    ineqs = [(r, 0) for r in v.rays]
    eqs = [(l, 0) for l in v.lineality]
    if ambient_subspace is not None:
        basis = [vec(b) for b in ambient_subspace]
        for b in basis:
            if len(b) != c.dim:
                raise DimensionMismatch("subspace basis has the wrong length")
        from .linalg import nullspace

        eqs += [(n, 0) for n in nullspace(basis, c.dim)]
    return Polyhedron(HRep(c.dim, tuple(ineqs), tuple(eqs))).canonicalize()


def minkowski_sum(p: Polyhedron, q: Polyhedron) -> Polyhedron:
    _check_dims(p, q)
    vp, vq = p.raw_vrep(), q.raw_vrep()
    if vp.is_empty or vq.is_empty:
        return Polyhedron.empty(p.dim).canonicalize()
    verts = {tuple(a + b for a, b in zip(x, y)) for x in vp.vertices for y in vq.vertices}
    return Polyhedron(
        vrep=VRep(p.dim, tuple(sorted(verts)), vp.rays + vq.rays, vp.lineality + vq.lineality)
    ).canonicalize()


def intersect(p: Polyhedron, q: Polyhedron, *more: Polyhedron) -> Polyhedron:
    ps = (p, q) + more
    _check_dims(*ps)
    hs = [x.raw_hrep() for x in ps]
    return Polyhedron(
        HRep(
            p.dim,
            tuple(r for h in hs for r in h.inequalities),
            tuple(r for h in hs for r in h.equalities),
        )
    ).canonicalize()


def translate(p: Polyhedron, shift) -> Polyhedron:
    shift = vec(shift)
    if len(shift) != p.dim:
        raise DimensionMismatch("shift has the wrong length")
    if p._v is not None or p._canonical:
        v = p.vrep if p._canonical else p._v
        return Polyhedron(
            vrep=VRep(p.dim, tuple(tuple(a + s for a, s in zip(x, shift)) for x in v.vertices), v.rays, v.lineality)
        )
    h = p._h
    return Polyhedron(
        HRep(
            p.dim,
            tuple((a, b + dot(a, shift)) for a, b in h.inequalities),
            tuple((c, d + dot(c, shift)) for c, d in h.equalities),
        )
    )


def scale(p: Polyhedron, factor) -> Polyhedron:
    """``factor * p`` for a nonzero rational factor."""
    f = frac(factor)
    if f == 0:
        raise ValueError("factor must be nonzero")
    v = p.raw_vrep()
    sgn = 1 if f > 0 else -1
    return Polyhedron(
        vrep=VRep(
            p.dim,
            tuple(tuple(f * x for x in y) for y in v.vertices),
            tuple(tuple(sgn * x for x in r) for r in v.rays),
            v.lineality,
        )
    ).canonicalize()


def linear_image(p: Polyhedron, matrix: Sequence[Sequence], shift=None) -> Polyhedron:
    """``{matrix @ x + shift : x in p}``; matrix has shape (out_dim, p.dim)."""
    m = [vec(r) for r in matrix]
    if any(len(r) != p.dim for r in m):
        raise DimensionMismatch("matrix columns must equal p.dim")
    out = len(m)
    v = p.raw_vrep()
    if v.is_empty:
        return Polyhedron.empty(out).canonicalize()
    s = vec(shift) if shift is not None else (Fraction(0),) * out
    img = lambda x: tuple(dot(r, x) for r in m)
    return Polyhedron(
        vrep=VRep(
            out,
            tuple(tuple(a + b for a, b in zip(img(x), s)) for x in v.vertices),
            tuple(img(r) for r in v.rays),
            tuple(img(l) for l in v.lineality),
        )
    ).canonicalize()


def linear_preimage(p: Polyhedron, matrix: Sequence[Sequence], shift=None) -> Polyhedron:
    """``{y : matrix @ y + shift in p}``; matrix has shape (p.dim, in_dim)."""
    m = [vec(r) for r in matrix]
    if len(m) != p.dim:
        raise DimensionMismatch("matrix rows must equal p.dim")
    n = len(m[0])
    s = vec(shift) if shift is not None else (Fraction(0),) * p.dim
    h = p.raw_hrep()
    if h.is_empty_marker:
        return Polyhedron.empty(n).canonicalize()
    cols = list(zip(*m))

    def pull(a, b):
        return tuple(dot(a, c) for c in cols), b - dot(a, s)

    return Polyhedron(
        HRep(n, tuple(pull(a, b) for a, b in h.inequalities), tuple(pull(c, d) for c, d in h.equalities))
    ).canonicalize()


def recession_cone(p: Polyhedron) -> Polyhedron:
    v = p.vrep
    if v.is_empty:
        raise ValueError("recession cone of the empty set is undefined here")
    return Polyhedron.cone(v.rays, v.lineality, dim=p.dim).canonicalize()


def contains(p: Polyhedron, x) -> bool:
    x = vec(x)
    if len(x) != p.dim:
        raise DimensionMismatch("point has the wrong length")
    return p.raw_hrep().satisfied_by(x)


def subset(p: Polyhedron, q: Polyhedron) -> bool:
    """Exact decision of ``p <= q``: every generator of p satisfies q's constraints."""
    _check_dims(p, q)
    vp = p.raw_vrep()
    if vp.is_empty:
        return True
    hq = q.raw_hrep()
    if hq.is_empty_marker:
        return False
    for x in vp.vertices:
        if not hq.satisfied_by(x):
            return False
    for r in vp.rays:
        if any(dot(a, r) < 0 for a, _ in hq.inequalities) or any(dot(c, r) != 0 for c, _ in hq.equalities):
            return False
    for l in vp.lineality:
        if any(dot(a, l) != 0 for a, _ in hq.inequalities) or any(dot(c, l) != 0 for c, _ in hq.equalities):
            return False
    return True


def equal(p: Polyhedron, q: Polyhedron) -> bool:
    """Mutual-subset equality (independent of canonical forms)."""
    return subset(p, q) and subset(q, p)


# ---------------------------------------------------------------------------
# projection


def project(p: Polyhedron, keep_coords: Sequence[int], method: str = "auto") -> Polyhedron:
    """Image of ``p`` under the coordinate projection onto ``keep_coords``.

    ``method`` is ``"vrep"`` (project generators), ``"fm"`` (Fourier-Motzkin
    block elimination on the H-representation) or ``"auto"``, which uses the
    generators when they are already known.
    """
    keep = list(keep_coords)
    if len(set(keep)) != len(keep) or any(not 0 <= i < p.dim for i in keep):
        raise DimensionMismatch("projection indices must be distinct and within dim")
    if not keep:
        raise DimensionMismatch("need at least one coordinate")
    if method == "auto":
        method = "vrep" if (p._v is not None or p._canonical) else "fm"
    if method == "vrep":
        v = p.raw_vrep()
        pick = lambda x: tuple(x[i] for i in keep)
        return Polyhedron(
            vrep=VRep(
                len(keep),
                tuple(pick(x) for x in v.vertices),
                tuple(pick(r) for r in v.rays),
                tuple(pick(l) for l in v.lineality),
            )
        ).canonicalize()
    if method == "fm":
        return Polyhedron(fourier_motzkin(p.raw_hrep(), keep)).canonicalize()
    raise ValueError(f"unknown projection method {method!r}")


def fourier_motzkin(h: HRep, keep: Sequence[int], prune_above: int = 40) -> HRep:
    """Eliminate every coordinate not in ``keep``; result lives in R^len(keep).

    Equalities are used for substitution first.  Inequality elimination applies
    Chernikov's history rule and, when the row count exceeds ``prune_above``,
    exact LP redundancy removal.
    """
    keep = list(keep)
    if h.is_empty_marker:
        return HRep(len(keep), (((0,) * len(keep), 1),))
    elim = [j for j in range(h.dim) if j not in keep]
    # rows as Fraction lists (a_0..a_{n-1}, b): a.x >= b / a.x = b
    eqs = [list(c) + [d] for c, d in h.equalities]
    ineqs = [(list(a) + [b], frozenset([i])) for i, (a, b) in enumerate(h.inequalities)]

    remaining = []
    for j in elim:
        piv = next((e for e in eqs if e[j] != 0), None)
        if piv is None:
            remaining.append(j)
            continue
        eqs.remove(piv)
        pj = piv[j]

        def sub(row):
            f = row[j] / pj
            return [x - f * y for x, y in zip(row, piv)] if f else row

        eqs = [list(map(Fraction, primitive(sub(e)))) for e in eqs]
        ineqs = [(list(map(Fraction, primitive(sub(r)))), hist) for r, hist in ineqs]

    steps = 0
    while remaining:
        # greedy order: eliminate the coordinate creating the fewest new rows
        def growth(j):
            npos = sum(1 for r, _ in ineqs if r[j] > 0)
            nneg = sum(1 for r, _ in ineqs if r[j] < 0)
            return npos * nneg - npos - nneg

        j = min(remaining, key=growth)
        remaining.remove(j)
        pos, neg, zero = [], [], []
        for r, hist in ineqs:
            (pos if r[j] > 0 else neg if r[j] < 0 else zero).append((r, hist))
        steps += 1
        new = list(zero)
        for rp, hp in pos:
            for rn, hn in neg:
                hist = hp | hn
                if len(hist) > steps + 1:
                    continue
                cp, cn = -rn[j], rp[j]
                new.append((list(map(Fraction, primitive([cp * x + cn * y for x, y in zip(rp, rn)]))), hist))
        ineqs = _dedupe(new)
        if len(ineqs) > prune_above:
            # the pruned system is equivalent, so elimination restarts on it
            ineqs = [(r, frozenset([i])) for i, (r, _) in enumerate(_prune(ineqs, eqs, remaining + keep))]
            steps = 0

    pick = lambda r: tuple(r[i] for i in keep)
    out_ineqs = [(pick(r), r[-1]) for r, _ in ineqs]
    out_eqs = [(pick(e), e[-1]) for e in eqs]
    return HRep(len(keep), tuple(out_ineqs), tuple(out_eqs))


def _dedupe(rows):
    best: dict = {}
    for r, hist in rows:
        if not any(r[:-1]):
            if r[-1] > 0:
                return [(r, hist)]
            continue
        key = primitive(r)
        if key not in best or len(hist) < len(best[key][1]):
            best[key] = (r, hist)
    return list(best.values())


def _prune(rows, eqs, live):
    """Drop rows implied by the others; only the ``live`` coordinates can be nonzero."""
    from .lp import LinearProgram, solve

    live = sorted(live)
    pick = lambda r: tuple(r[i] for i in live)
    width = len(rows[0][0])
    if len(live) <= 8:
        # few live coordinates: the canonical H-form from double description is cheaper
        small = Polyhedron(
            HRep(len(live), tuple((pick(r), r[-1]) for r, _ in rows), tuple((pick(e), e[-1]) for e in eqs))
        ).canonicalize()
        h = small.hrep
        if h.is_empty_marker:
            return [([Fraction(0)] * (width - 1) + [Fraction(1)], frozenset())]

        def lift(a, b):
            full = [Fraction(0)] * width
            for i, x in zip(live, a):
                full[i] = Fraction(x)
            full[-1] = Fraction(b)
            return full

        out = [(lift(a, b), frozenset()) for a, b in h.inequalities]
        for c, f in h.equalities:
            out.append((lift(c, f), frozenset()))
            out.append((lift([-x for x in c], -f), frozenset()))
        return out
    kept = list(rows)
    i = 0
    while i < len(kept):
        r, _ = kept[i]
        others = kept[:i] + kept[i + 1 :]
        cons = HRep(
            len(live),
            tuple((pick(o), o[-1]) for o, _ in others),
            tuple((pick(e), e[-1]) for e in eqs),
        )
        out = solve(LinearProgram(pick(r), cons, "minimize"))
        if out.status == "optimal" and out.value >= r[-1]:
            kept.pop(i)
        elif out.status == "infeasible":
            return [([Fraction(0)] * (len(r) - 1) + [Fraction(1)], frozenset())]
        else:
            i += 1
    return kept
