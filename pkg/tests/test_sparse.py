from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from confh import linalg
from confh.sparse import (
    DEFAULT_PRIMES, Echelon, QuotientBasis, RankDisagreement, RankEngine, SparseRationalMatrix, fmt_q,
    rank_exact, rank_modp,
)

small_q = st.fractions(min_value=-5, max_value=5, max_denominator=4)


@st.composite
def dense_matrices(draw, max_dim=7):
    r = draw(st.integers(0, max_dim))
    c = draw(st.integers(0, max_dim))
    sparse_entry = st.one_of(st.just(Fraction(0)), st.just(Fraction(0)), small_q)
    return [[draw(sparse_entry) for _ in range(c)] for _ in range(r)], c


def _det_rank(rows):
    """Rank as the size of the largest nonzero minor (tiny matrices only)."""
    from itertools import combinations

    def det(m):
        if not m:
            return Fraction(1)
        return sum(((-1) ** j) * m[0][j] * det([row[:j] + row[j + 1:] for row in m[1:]])
                   for j in range(len(m)) if m[0][j])

    nr, nc = len(rows), len(rows[0]) if rows else 0
    for k in range(min(nr, nc), 0, -1):
        for rs in combinations(range(nr), k):
            for cs in combinations(range(nc), k):
                if det([[rows[r][c] for c in cs] for r in rs]):
                    return k
    return 0


@given(dense_matrices(max_dim=4))
@settings(max_examples=60, deadline=None)
def test_rank_matches_minor_oracle(mc):
    rows, ncols = mc
    m = SparseRationalMatrix.from_dense(rows) if rows else SparseRationalMatrix.zero(0, ncols)
    assert m.rank() == _det_rank(rows)


@given(dense_matrices())
@settings(max_examples=80, deadline=None)
def test_exact_modular_dense_agree(mc):
    rows, ncols = mc
    m = SparseRationalMatrix.from_dense(rows) if rows else SparseRationalMatrix.zero(0, ncols)
    r = linalg.rank(linalg.to_matrix(rows, ncols)) if rows else 0
    assert m.rank("exact") == r
    assert m.rank("modular") == r


@given(dense_matrices())
@settings(max_examples=60, deadline=None)
def test_kernel_and_image(mc):
    rows, ncols = mc
    if not rows:
        return
    m = SparseRationalMatrix.from_dense(rows)
    ker = m.kernel_basis()
    assert len(ker) + m.rank() == m.ncols
    for v in ker:
        assert not m.apply(v)
    assert len(m.image_basis()) == m.rank()


def test_modp_undercounts_only_at_p():
    p = DEFAULT_PRIMES[0]
    vecs = [{0: 1, 1: p}, {0: 1, 1: 0}]
    assert rank_exact(vecs) == 2
    assert rank_modp(vecs, p) == 1
    eng = RankEngine(modular=True, primes=(p, DEFAULT_PRIMES[1]), min_exact_size=0)
    with pytest.raises(RankDisagreement):
        eng.rank(vecs)


def test_engine_spot_check_catches_shared_failure():
    p, q = DEFAULT_PRIMES[:2]
    vecs = [{0: 1, 1: p * q}, {0: 1}]
    eng = RankEngine(modular=True, primes=(p, q), sample_rate=1.0, min_exact_size=0)
    with pytest.raises(RankDisagreement, match="exact"):
        eng.rank(vecs)


def test_matrix_algebra():
    a = SparseRationalMatrix.from_dense([[1, 2], [0, 1]])
    i = SparseRationalMatrix.identity(2)
    assert a @ i == a
    assert (a - a).is_zero()
    assert a.transpose().transpose() == a
    assert a.scale(Fraction(1, 2)).to_dense() == [[Fraction(1, 2), 1], [0, Fraction(1, 2)]]
    assert a.format() == "2x2\n1 2\n0 1"


def test_no_stored_zeros():
    m = SparseRationalMatrix.from_dense([[0, 0], [1, 0]])
    assert m.nnz == 1


@pytest.mark.parametrize("q, s", [(Fraction(3), "3"), (Fraction(-3, 4), "-3/4"), (0, "0")])
def test_fmt_q(q, s):
    assert fmt_q(q) == s


def test_echelon_relations():
    e = Echelon.from_columns([{0: Fraction(1)}, {1: Fraction(1)}, {0: Fraction(2), 1: Fraction(3)}])
    assert e.rank == 2
    assert e.kernel == [{2: 1, 0: -2, 1: -3}]


def test_quotient_basis_coordinates():
    cycles = [{0: Fraction(1)}, {1: Fraction(1)}, {2: Fraction(1)}]
    boundaries = [{0: Fraction(1), 1: Fraction(1)}]
    q = QuotientBasis(cycles, boundaries)
    assert q.dim == 2
    # e1 = -e0 modulo the boundary
    assert q.coords({1: Fraction(1)}) == [Fraction(-1), Fraction(0)]
    assert q.coords({0: Fraction(2), 2: Fraction(5)}) == [Fraction(2), Fraction(5)]
    assert q.coords({3: Fraction(1)}) is None
