import random
from fractions import Fraction as F

import pytest
from hypothesis import given, strategies as st

from oracles import brute_extreme_rays, brute_vertices, normalize, random_cone_generators, random_hrep
from setrisk.linalg import frac, nullspace, primitive, rank, rref, solve
from setrisk.polyhedra import (
    DimensionMismatch,
    HRep,
    NotACone,
    Polyhedron,
    VRep,
    contains,
    dd_convert,
    dual_cone,
    equal,
    fourier_motzkin,
    intersect,
    linear_image,
    linear_preimage,
    minkowski_sum,
    project,
    recession_cone,
    scale,
    subset,
    translate,
)

PRE = Polyhedron.from_inequalities([(1, 2), (2, 1)], [16, 14])


# --- linalg helpers -------------------------------------------------------


def test_frac_rejects_floats():
    with pytest.raises(TypeError):
        frac(0.5)
    assert frac("1/3") == F(1, 3)
    assert frac(" -2 ") == -2


def test_primitive_scaling():
    assert primitive((F(1, 2), F(3, 4))) == (2, 3)
    assert primitive((0, -4, 6)) == (0, -2, 3)


def test_rref_rank_nullspace():
    rows = [(1, 2, 3), (2, 4, 6), (0, 1, 1)]
    assert rank(rows) == 2
    r, piv = rref(rows)
    assert piv == [0, 1]
    ns = nullspace(rows, 3)
    assert len(ns) == 1
    assert all(sum(a * b for a, b in zip(row, ns[0])) == 0 for row in rows)
    assert solve([(1, 1), (1, -1)], (2, 0)) == (1, 1)
    assert solve([(1, 1), (2, 2)], (1, 3)) is None


# --- conversion -----------------------------------------------------------


def test_orthant_vrep():
    v = Polyhedron.from_inequalities([(1, 0), (0, 1)]).vrep
    assert v.vertices == ((0, 0),)
    assert set(v.rays) == {(1, 0), (0, 1)}
    assert v.lineality == ()


def test_halfspace_vrep_has_lineality():
    v = Polyhedron.from_inequalities([(1, 1)]).vrep
    assert v.vertices == ((0, 0),)
    assert v.rays == ((1, 1),)
    assert v.lineality == ((1, -1),)


def test_pre_acceptance_polyhedron_vrep():
    v = PRE.vrep
    assert v.vertices == ((4, 6),)
    assert set(v.rays) == {(2, -1), (-1, 2)}


def test_dd_convert_fills_both():
    p = dd_convert(HRep(2, (((1, 0), 0), ((0, 1), 0))))
    assert p.hrep is not None and p.vrep is not None
    q = dd_convert(p.vrep)
    assert q == p


def test_empty_and_full():
    e = Polyhedron.from_inequalities([(1,), (-1,)], [1, 0])
    assert e.is_empty
    assert e.hrep.is_empty_marker
    assert e == Polyhedron.empty(1)
    assert Polyhedron.full(3).is_full
    assert Polyhedron.full(3).vrep.lineality != ()


def test_hrep_drops_trivial_rows():
    h = HRep(2, (((0, 0), -1), ((1, 0), 0)))
    assert len(h.inequalities) == 1


def test_canonical_equality_ignores_scaling_and_order():
    a = Polyhedron.from_inequalities([(2, 4), (2, 1)], [32, 14])
    b = Polyhedron.from_inequalities([(2, 1), (1, 2)], [14, 16])
    assert a == b
    assert hash(a) == hash(b)


# --- duality --------------------------------------------------------------


def test_dual_examples():
    assert dual_cone(Polyhedron.orthant(2)) == Polyhedron.orthant(2)
    assert dual_cone(Polyhedron.from_inequalities([(3, 1)])) == Polyhedron.cone([(3, 1)], dim=2)
    assert dual_cone(Polyhedron.from_inequalities([(1, 2)])) == Polyhedron.cone([(1, 2)])


def test_dual_of_non_cone_raises():
    with pytest.raises(NotACone):
        dual_cone(PRE)


def test_dual_within_subspace():
    # K = {x2 >= -2x1, x2 >= 0}; within M = span{(0,1)} the dual is the ray (0,1)
    k = Polyhedron.from_inequalities([(2, 1), (0, 1)])
    m = Polyhedron.cone(lineality=[(0, 1)], dim=2)
    km = intersect(k, m)
    assert km == Polyhedron.cone([(0, 1)], dim=2)
    assert dual_cone(km, ambient_subspace=[(0, 1)]) == Polyhedron.cone([(0, 1)], dim=2)


@given(st.integers(0, 10_000))
def test_dual_involution_and_intersection_rule(seed):
    rng = random.Random(seed)
    n = rng.randint(2, 4)
    c1 = Polyhedron.cone(random_cone_generators(rng, n, rng.randint(1, 4)), dim=n)
    c2 = Polyhedron.cone(random_cone_generators(rng, n, rng.randint(1, 4)), dim=n)
    assert dual_cone(dual_cone(c1)) == c1
    assert dual_cone(intersect(c1, c2)) == minkowski_sum(dual_cone(c1), dual_cone(c2))


# --- sums, intersections, projections ---------------------------------------


def test_sum_examples():
    p = PRE
    assert minkowski_sum(p, Polyhedron.origin(2)) == p
    assert minkowski_sum(Polyhedron.cone([(1, 0)]), Polyhedron.cone([(0, 1)])) == Polyhedron.orthant(2)
    ki = Polyhedron.from_inequalities([(1, 1)])
    assert minkowski_sum(p, ki) == Polyhedron.from_inequalities([(1, 1)], [10])


def test_sum_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        minkowski_sum(Polyhedron.orthant(2), Polyhedron.orthant(3))


def test_intersection_examples():
    assert intersect(PRE, Polyhedron.full(2)) == PRE
    line = intersect(Polyhedron.from_inequalities([(1,)]), Polyhedron.from_inequalities([(-1,)]))
    assert line == Polyhedron.origin(1)
    three = Polyhedron.from_inequalities([(1, 2), (2, 1), (1, 1)], [16, 14, -1])
    assert three == PRE
    assert len(three.hrep.inequalities) == 2


def test_projection_examples():
    assert project(Polyhedron.orthant(2), [0]) == Polyhedron.orthant(1)
    # (k1, k2, u1, u2)
    lifted = Polyhedron.from_inequalities(
        [(-1, -2, 1, 2), (-2, -1, 2, 1), (1, 1, 0, 0)], [16, 14, 0]
    )
    for method in ("fm", "vrep"):
        assert project(lifted, [2, 3], method=method) == Polyhedron.from_inequalities([(1, 1)], [10])
    assert project(PRE, [0, 1]) == PRE


@given(st.integers(0, 10_000))
def test_projection_methods_agree(seed):
    rng = random.Random(seed)
    n = rng.randint(2, 4)
    h = random_hrep(rng, n, rng.randint(1, 6))
    p = Polyhedron.from_inequalities([a for a, _ in h], [b for _, b in h])
    keep = sorted(rng.sample(range(n), rng.randint(1, n - 1)))
    fm = project(Polyhedron(p.raw_hrep()), keep, method="fm")
    vr = project(p.canonicalize(), keep, method="vrep")
    assert fm == vr
    # composition of projections
    if len(keep) > 1:
        inner = keep[: len(keep) - 1]
        assert project(vr, list(range(len(inner)))) == project(p, inner)


def test_fourier_motzkin_uses_equalities():
    h = HRep(3, (((1, 0, 0), 0),), (((1, 1, 1), 3),))
    out = Polyhedron(fourier_motzkin(h, [1, 2]))
    assert out == Polyhedron.from_inequalities([(-1, -1)], [-3])


def test_subset_and_contains():
    assert subset(PRE, PRE)
    assert subset(Polyhedron.orthant(2), Polyhedron.from_inequalities([(1, 1)]))
    assert not subset(Polyhedron.from_inequalities([(1, 1)]), Polyhedron.orthant(2))
    assert contains(PRE, (4, 6))
    assert not contains(PRE, (4, 5))
    assert subset(Polyhedron.empty(2), PRE)
    assert equal(PRE, Polyhedron.from_generators([(4, 6)], [(2, -1), (-1, 2)]))


def test_affine_maps():
    p = translate(Polyhedron.orthant(2), (1, 2))
    assert p == Polyhedron.from_inequalities([(1, 0), (0, 1)], [1, 2])
    assert scale(Polyhedron.orthant(2), -1) == Polyhedron.from_inequalities([(-1, 0), (0, -1)])
    img = linear_image(Polyhedron.orthant(1), [(1,), (1,)])
    assert img == Polyhedron.cone([(1, 1)], dim=2)
    pre = linear_preimage(Polyhedron.from_inequalities([(1, 1)], [10]), [(1,), (1,)])
    assert pre == Polyhedron.from_inequalities([(1,)], [5])
    assert recession_cone(PRE) == Polyhedron.from_inequalities([(1, 2), (2, 1)])


# --- randomized round trips against brute force ------------------------------


@given(st.integers(0, 10_000))
def test_bounded_vertices_match_brute_force(seed):
    rng = random.Random(seed)
    n = rng.randint(1, 3)
    h = random_hrep(rng, n, rng.randint(1, 5), bounded=True)
    p = Polyhedron.from_inequalities([a for a, _ in h], [b for _, b in h])
    verts = brute_vertices(h, [], n)
    if not verts:
        assert p.is_empty
        return
    assert set(p.vrep.vertices) == verts
    assert p.vrep.rays == ()


@given(st.integers(0, 10_000))
def test_hv_round_trip_and_pointed_rays(seed):
    rng = random.Random(seed)
    n = rng.randint(2, 4)
    h = random_hrep(rng, n, rng.randint(n, n + 4))
    p = Polyhedron.from_inequalities([a for a, _ in h], [b for _, b in h])
    back = Polyhedron(vrep=p.vrep)
    assert subset(back, Polyhedron(HRep(n, tuple(h)))) and subset(Polyhedron(HRep(n, tuple(h))), back)
    if not p.is_empty and not p.vrep.lineality:
        assert set(p.vrep.vertices) == brute_vertices(h, [], n)
        assert set(map(normalize, p.vrep.rays)) == brute_extreme_rays(h, [], n)


def test_deterministic_output():
    a = Polyhedron.from_inequalities([(2, 1), (1, 2), (1, 1)], [14, 16, -1])
    b = Polyhedron.from_inequalities([(1, 1), (1, 2), (2, 1)], [-1, 16, 14])
    assert a.hrep == b.hrep and a.vrep == b.vrep
    assert repr(a) == repr(b)


def test_vrep_validation():
    assert VRep(2, ((0, 0),), ((0, 0),), ()).rays == ()
    with pytest.raises(DimensionMismatch):
        VRep(2, ((0, 0, 0),))
    with pytest.raises(ValueError):
        VRep(0)
