"""Small dense exact linear algebra over Q.

Used for the Lie-algebra level computations (centres, transits, splittings)
where matrices have at most a few dozen rows.  Matrices are lists of rows of
``Fraction``.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

Matrix = list[list[Fraction]]


def to_matrix(rows: Sequence[Sequence], ncols: int | None = None) -> Matrix:
    out = [[Fraction(x) for x in r] for r in rows]
    if ncols is not None:
        for r in out:
            if len(r) != ncols:
                raise ValueError("ragged matrix")
    return out


def zeros(nrows: int, ncols: int) -> Matrix:
    return [[Fraction(0)] * ncols for _ in range(nrows)]


def identity(n: int) -> Matrix:
    m = zeros(n, n)
    for i in range(n):
        m[i][i] = Fraction(1)
    return m


def transpose(a: Matrix, ncols: int | None = None) -> Matrix:
    if not a:
        return [[] for _ in range(ncols or 0)]
    return [list(col) for col in zip(*a)]


def matmul(a: Matrix, b: Matrix, inner: int | None = None, ncols: int | None = None) -> Matrix:
    if not a:
        return []
    if not b:
        # a is m x 0
        return [[Fraction(0)] * (ncols or 0) for _ in a]
    bt = transpose(b)
    return [[sum((x * y for x, y in zip(row, col)), Fraction(0)) for col in bt] for row in a]


def rref(a: Matrix) -> tuple[Matrix, list[int]]:
    """Reduced row echelon form and pivot columns."""
    m = [list(r) for r in a]
    pivots: list[int] = []
    if not m:
        return m, pivots
    nrows, ncols = len(m), len(m[0])
    r = 0
    for c in range(ncols):
        p = next((i for i in range(r, nrows) if m[i][c] != 0), None)
        if p is None:
            continue
        m[r], m[p] = m[p], m[r]
        inv = 1 / m[r][c]
        m[r] = [x * inv for x in m[r]]
        for i in range(nrows):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [x - f * y for x, y in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == nrows:
            break
    return m[:r], pivots


def rank(a: Matrix) -> int:
    return len(rref(a)[1])


def nullspace(a: Matrix, ncols: int) -> Matrix:
    """Basis (as rows) of ``{x : a x = 0}``."""
    red, pivots = rref(a)
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        v = [Fraction(0)] * ncols
        v[f] = Fraction(1)
        for row, p in zip(red, pivots):
            v[p] = -row[f]
        basis.append(v)
    return basis


def rowspace(a: Matrix) -> Matrix:
    return rref(a)[0]


def is_zero(a: Matrix) -> bool:
    return all(x == 0 for r in a for x in r)


def complement(sub: Matrix, n: int) -> Matrix:
    """Standard basis vectors completing the row span of ``sub`` to ``Q^n``."""
    _, pivots = rref(sub) if sub else ([], [])
    out = []
    for c in range(n):
        if c not in pivots:
            v = [Fraction(0)] * n
            v[c] = Fraction(1)
            out.append(v)
    return out


def inverse(a: Matrix) -> Matrix:
    n = len(a)
    aug = [list(r) + e for r, e in zip(a, identity(n))]
    red, pivots = rref(aug)
    if pivots[:n] != list(range(n)) or len(red) < n:
        raise ValueError("matrix is singular")
    return [r[n:] for r in red]


def solve_rows(basis: Matrix, v: Sequence[Fraction]) -> list[Fraction] | None:
    """Coefficients ``c`` with ``sum c_k basis[k] == v``, or None."""
    if not basis:
        return [] if all(x == 0 for x in v) else None
    k = len(basis)
    n = len(v)
    # columns are basis vectors; augmented with v
    aug = [[basis[j][i] for j in range(k)] + [Fraction(v[i])] for i in range(n)]
    red, pivots = rref(aug)
    if k in pivots:
        return None
    coeffs = [Fraction(0)] * k
    for row, p in zip(red, pivots):
        coeffs[p] = row[k]
    return coeffs
