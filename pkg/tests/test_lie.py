from fractions import Fraction

import pytest

from confh.bigraded import Bidegree
from confh.lie import (
    LieAlgebra, Transit, W_TYPE, abelian, build_lie_algebra, canonical_transit, center_basis, check_axioms,
    classify_transit, decompose_transit, derived_basis, identity_transit, universal_transit,
)
from confh.manifold import builtin, euclidean, library, open_surface, sphere, surface

ONE = Fraction(1)


def _gen(g, gid):
    return g.index(gid)


def _br(g, a, b):
    return {g.generators[k].id: v for k, v in g.bracket_gens(_gen(g, a), _gen(g, b)).items()}


def _matmul(a, b):
    return [[sum((x * y for x, y in zip(row, col)), Fraction(0)) for col in zip(*b)] for row in a]


def _kernel_dim(rows, ncols):
    """Dimension of the null space by plain Gauss elimination (test oracle)."""
    rows = [list(map(Fraction, r)) for r in rows]
    rank, col = 0, 0
    while rank < len(rows) and col < ncols:
        piv = next((r for r in range(rank, len(rows)) if rows[r][col]), None)
        if piv is None:
            col += 1
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        for r in range(len(rows)):
            if r != rank and rows[r][col]:
                f = rows[r][col] / rows[rank][col]
                rows[r] = [x - f * y for x, y in zip(rows[r], rows[rank])]
        rank += 1
        col += 1
    return ncols - rank


def test_euclidean_two_abelian():
    g = build_lie_algebra(euclidean(2))
    assert [x.bidegree for x in g.generators] == [Bidegree(1, 0), Bidegree(2, 1)]
    assert g.is_abelian


def test_sphere_two_brackets():
    g = build_lie_algebra(sphere(2))
    bideg = {x.id: tuple(x.bidegree) for x in g.generators}
    assert bideg == {"1_w.v": (1, 2), "omega_w.v": (1, 0), "1.[v,v]": (2, 3), "omega.[v,v]": (2, 1)}
    assert _br(g, "1_w.v", "1_w.v") == {"1.[v,v]": ONE}
    assert _br(g, "1_w.v", "omega_w.v") == {"omega.[v,v]": ONE}
    assert _br(g, "omega_w.v", "omega_w.v") == {}


def test_surface_two_brackets_by_hand():
    g = build_lie_algebra(surface(2))
    assert len(g) == 12
    # (-1)^{|b| (d-1)} with |b| = 1, d = 2 gives -1 on a_i.b_i = top
    for i in (1, 2):
        assert _br(g, f"a{i}_w.v", f"b{i}_w.v") == {"top.[v,v]": -ONE}
        assert _br(g, f"b{i}_w.v", f"a{i}_w.v") == {"top.[v,v]": ONE}
        # unit times a class
        assert _br(g, "1_w.v", f"a{i}_w.v") == {f"a{i}.[v,v]": -ONE}
        assert _br(g, f"a{i}_w.v", "1_w.v") == {f"a{i}.[v,v]": ONE}
    assert _br(g, "a1_w.v", "b2_w.v") == {}
    assert _br(g, "1_w.v", "1_w.v") == {"1.[v,v]": ONE}


@pytest.mark.parametrize("m", library(), ids=lambda m: m.name)
def test_builtins_pass_axioms(m):
    assert check_axioms(build_lie_algebra(m)).passed


@pytest.mark.parametrize("m", library(), ids=lambda m: m.name)
def test_slope_table(m):
    g = build_lie_algebra(m)
    d = m.d
    for x in g.generators:
        i = x.source.degree
        if x.weight == 1:
            assert x.degree == d - i
        else:
            assert Fraction(x.degree, 2) == d - Fraction(i + 1, 2)
        assert x.bidegree != Bidegree(0, 0) and x.degree >= 0


def test_corrupted_structure_constant_reported():
    g = build_lie_algebra(surface(1))
    a, b, t = g.index("a1_w.v"), g.index("b1_w.v"), g.index("top.[v,v]")
    struct = dict(g.structure)
    struct[(b, a)] = {t: Fraction(5)}
    bad = LieAlgebra(g.generators, struct, g.d, "bad")
    rep = check_axioms(bad)
    assert not rep.passed
    assert any("antisymmetry" in f and "a1_w.v" in f and "b1_w.v" in f for f in rep.failures)


def test_abelian_axioms_vacuous():
    assert check_axioms(abelian([(1, 0), (1, 1), (2, 3)])).passed


@pytest.mark.parametrize("name, rank", [("euclidean:2", 1), ("sphere:2", 2), ("surface:2", 6)])
def test_canonical_transit_ranks(name, rank):
    t = canonical_transit(build_lie_algebra(builtin(name)))
    assert (t.h_dim, t.k_dim) == (rank, rank)
    assert not t.check()
    assert classify_transit(t) == {"null", "exact"}


@pytest.mark.parametrize("m", library(), ids=lambda m: m.name)
def test_canonical_inside_universal(m):
    g = build_lie_algebra(m)
    can, uni = canonical_transit(g), universal_transit(g)
    assert not can.check() and not uni.check()
    n = len(g)
    center = [[v.get(k, Fraction(0)) for k in range(n)] for v in center_basis(g)]
    # h_M lies in the centre: adding it to the centre basis does not raise the rank
    rows = center + [list(c) for c in can.f_cols]
    assert _kernel_dim(list(zip(*rows)), len(rows)) == len(can.f_cols)
    # g_M kills [g, g], so it factors through the abelianization
    for r in derived_basis(g):
        assert not any(can.g(dict(enumerate(r))))


def test_universal_transit_abelian_is_split():
    g = abelian([(1, 0), (2, 1), (2, 3)])
    t = universal_transit(g)
    assert t.h_dim == t.k_dim == 3
    assert classify_transit(t) == {"split"}


def test_sphere_center_by_brute_force():
    g = build_lie_algebra(sphere(2))
    n = len(g)
    # x is central iff [x, e_y] = 0 for every y: stack those linear conditions
    rows = [[g.bracket_gens(x, y).get(t, Fraction(0)) for x in range(n)] for y in range(n) for t in range(n)]
    assert _kernel_dim(rows, n) == len(center_basis(g)) == 2
    w = {g.index("1.[v,v]"), g.index("omega.[v,v]")}
    assert {k for v in center_basis(g) for k in v} == w
    # omega.v is not central: it brackets nontrivially with 1.v
    assert _br(g, "omega_w.v", "1_w.v")
    assert len(derived_basis(g)) == 2


def test_open_surface_center():
    g = build_lie_algebra(open_surface(2))
    n = len(g)
    rows = [[g.bracket_gens(x, y).get(t, Fraction(0)) for x in range(n)] for y in range(n) for t in range(n)]
    ws = {k for k, x in enumerate(g.generators) if x.kind == W_TYPE}
    cen = {k for v in center_basis(g) for k in v}
    assert ws <= cen
    assert g.index("top_w.v") in cen
    assert _kernel_dim(rows, n) == len(center_basis(g)) == len(ws) + 1


def test_identity_transit_split_and_zero_h_null():
    g = abelian([(1, 0), (1, 2)])
    assert classify_transit(identity_transit(g)) == {"split"}
    t = Transit(g, (), ((ONE, 0),))
    assert "null" in classify_transit(t)


def test_decompose_null_and_split():
    g = build_lie_algebra(surface(1))
    t = canonical_transit(g)
    dec = decompose_transit(t)
    assert dec.split.h_dim == 0 and dec.null.h_dim == t.h_dim
    assert dec.clean and dec.recomposes
    s = identity_transit(abelian([(1, 0), (1, 2)]))
    dec = decompose_transit(s)
    assert dec.null.h_dim == 0 and dec.split.h_dim == 2
    assert dec.recomposes


def test_decompose_block_diagonal():
    g = abelian([(1, 0), (1, 2), (2, 1)])
    # gf = diag(1, 0) on a 2-dim h and 2-dim k
    t = Transit(g, ((ONE, 0, 0), (0, 0, ONE)), ((ONE, 0, 0), (0, ONE, 0)))
    dec = decompose_transit(t)
    assert dec.clean and dec.recomposes
    s, z = dec.split, dec.null
    gf = lambda a, b: _matmul([list(r) for r in a.g_rows], list(zip(*b.f_cols))) if b.f_cols else []
    # the four composite conditions: g1 f1 bijective, g2 f2 zero, cross terms zero
    assert gf(s, s) == [[ONE]]
    assert gf(z, z) == [[0]]
    assert gf(s, z) == [[0]] and gf(z, s) == [[0]]
    assert classify_transit(s) == {"split"} and "null" in classify_transit(z)
