"""Sparse exact matrices over Q.

Rank is computed by fraction-free elimination on integer rows (each row is
scaled to clear denominators, which does not change the rank) with a static
Markowitz ordering of the columns.  A modular variant computes ranks over
``GF(p)`` for word-size primes; it can only undercount, so callers that use it
cross-check against the exact routine.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd, lcm
from typing import Iterable, Mapping, Sequence

SparseVec = dict[int, Fraction]

# primes below 2**31 so products stay cheap
DEFAULT_PRIMES = (2147483647, 2147483629, 2147483587)


class RankDisagreement(RuntimeError):
    """Modular and exact ranks differ; the fast path must not be trusted."""


def _clean(vec: Mapping[int, Fraction]) -> SparseVec:
    return {k: Fraction(v) for k, v in vec.items() if v != 0}


@dataclass
class SparseRationalMatrix:
    """``nrows x ncols`` matrix stored column-wise: ``cols[j]`` is ``{row: value}``."""

    nrows: int
    ncols: int
    cols: list[SparseVec] = field(default_factory=list)

    def __post_init__(self):
        if not self.cols:
            self.cols = [{} for _ in range(self.ncols)]
        if len(self.cols) != self.ncols:
            raise ValueError("column count mismatch")
        self.cols = [_clean(c) for c in self.cols]
        for c in self.cols:
            for r in c:
                if not 0 <= r < self.nrows:
                    raise IndexError(f"row {r} out of range")

    @classmethod
    def zero(cls, nrows: int, ncols: int) -> "SparseRationalMatrix":
        return cls(nrows, ncols, [{} for _ in range(ncols)])

    @classmethod
    def identity(cls, n: int) -> "SparseRationalMatrix":
        return cls(n, n, [{j: Fraction(1)} for j in range(n)])

    @classmethod
    def from_dense(cls, rows: Sequence[Sequence]) -> "SparseRationalMatrix":
        nrows = len(rows)
        ncols = len(rows[0]) if rows else 0
        cols = [{i: Fraction(rows[i][j]) for i in range(nrows) if rows[i][j]} for j in range(ncols)]
        return cls(nrows, ncols, cols)

    def to_dense(self) -> list[list[Fraction]]:
        out = [[Fraction(0)] * self.ncols for _ in range(self.nrows)]
        for j, c in enumerate(self.cols):
            for i, v in c.items():
                out[i][j] = v
        return out

    @property
    def nnz(self) -> int:
        return sum(len(c) for c in self.cols)

    def is_zero(self) -> bool:
        return all(not c for c in self.cols)

    def __eq__(self, other) -> bool:
        if not isinstance(other, SparseRationalMatrix):
            return NotImplemented
        return (self.nrows, self.ncols, self.cols) == (other.nrows, other.ncols, other.cols)

    def apply(self, vec: Mapping[int, Fraction]) -> SparseVec:
        out: dict[int, Fraction] = {}
        for j, a in vec.items():
            if a:
                for i, v in self.cols[j].items():
                    out[i] = out.get(i, 0) + a * v
        return _clean(out)

    def __matmul__(self, other: "SparseRationalMatrix") -> "SparseRationalMatrix":
        if self.ncols != other.nrows:
            raise ValueError(f"shape mismatch {self.nrows}x{self.ncols} @ {other.nrows}x{other.ncols}")
        return SparseRationalMatrix(self.nrows, other.ncols, [self.apply(c) for c in other.cols])

    def __add__(self, other: "SparseRationalMatrix") -> "SparseRationalMatrix":
        if (self.nrows, self.ncols) != (other.nrows, other.ncols):
            raise ValueError("shape mismatch")
        cols = []
        for a, b in zip(self.cols, other.cols):
            c = dict(a)
            for k, v in b.items():
                c[k] = c.get(k, 0) + v
            cols.append(c)
        return SparseRationalMatrix(self.nrows, self.ncols, cols)

    def scale(self, s) -> "SparseRationalMatrix":
        s = Fraction(s)
        return SparseRationalMatrix(self.nrows, self.ncols, [{k: s * v for k, v in c.items()} for c in self.cols])

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-other)

    def transpose(self) -> "SparseRationalMatrix":
        cols: list[SparseVec] = [{} for _ in range(self.nrows)]
        for j, c in enumerate(self.cols):
            for i, v in c.items():
                cols[i][j] = v
        return SparseRationalMatrix(self.ncols, self.nrows, cols)

    def rank(self, method: str = "exact", primes: Sequence[int] = DEFAULT_PRIMES[:2]) -> int:
        vecs = self.cols if self.ncols <= self.nrows else self.transpose().cols
        if method == "exact":
            return rank_exact(vecs)
        if method == "modular":
            ranks = {rank_modp(vecs, p) for p in primes}
            if len(ranks) != 1:
                raise RankDisagreement(f"modular ranks disagree across primes: {sorted(ranks)}")
            return ranks.pop()
        raise ValueError(f"unknown rank method {method!r}")

    def kernel_basis(self) -> list[SparseVec]:
        return Echelon.from_columns(self.cols).kernel

    def image_basis(self) -> list[SparseVec]:
        return Echelon.from_columns(self.cols).rows()

    def format(self) -> str:
        """Plain-text exact matrix, one row per line."""
        lines = [f"{self.nrows}x{self.ncols}"]
        for row in self.to_dense():
            lines.append(" ".join(fmt_q(x) for x in row))
        return "\n".join(lines)


def fmt_q(q) -> str:
    q = Fraction(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


# ---------------------------------------------------------------- rank kernels


def _column_order(vecs: Iterable[Mapping[int, object]]) -> dict[int, tuple[int, int]]:
    counts: dict[int, int] = {}
    for v in vecs:
        for k in v:
            counts[k] = counts.get(k, 0) + 1
    return {k: (c, k) for k, c in counts.items()}


def _integral(vec: Mapping[int, object]) -> dict[int, int]:
    if all(isinstance(v, int) for v in vec.values()):
        return {k: v for k, v in vec.items() if v}
    fr = {k: Fraction(v) for k, v in vec.items() if v}
    den = 1
    for v in fr.values():
        den = lcm(den, v.denominator)
    return {k: int(v * den) for k, v in fr.items()}


def rank_exact(vecs: Sequence[Mapping[int, object]]) -> int:
    """Rank over Q by fraction-free sparse elimination."""
    order = _column_order(vecs)
    key = order.__getitem__
    pivots: dict[int, dict[int, int]] = {}
    rows = sorted((_integral(v) for v in vecs), key=len)
    for r in rows:
        while r:
            c = min(r, key=key)
            p = pivots.get(c)
            if p is None:
                g = 0
                for v in r.values():
                    g = gcd(g, v)
                    if g == 1:
                        break
                if g > 1:
                    r = {k: v // g for k, v in r.items()}
                pivots[c] = r
                break
            a, b = r[c], p[c]
            g = gcd(a, b)
            ma, mb = b // g, a // g
            new = {k: v * ma for k, v in r.items()}
            for k, v in p.items():
                x = new.get(k, 0) - mb * v
                if x:
                    new[k] = x
                else:
                    new.pop(k, None)
            r = new
    return len(pivots)


def _modp(vec: Mapping[int, object], p: int) -> dict[int, int]:
    out = {}
    for k, v in vec.items():
        if isinstance(v, int):
            x = v % p
        else:
            q = Fraction(v)
            if q.denominator % p == 0:
                raise ZeroDivisionError(f"prime {p} divides a denominator")
            x = q.numerator * pow(q.denominator, -1, p) % p
        if x:
            out[k] = x
    return out


def rank_modp(vecs: Sequence[Mapping[int, object]], p: int) -> int:
    """Rank over GF(p); never exceeds the rank over Q."""
    order = _column_order(vecs)
    key = order.__getitem__
    pivots: dict[int, dict[int, int]] = {}
    rows = sorted((_modp(v, p) for v in vecs), key=len)
    for r in rows:
        while r:
            c = min(r, key=key)
            piv = pivots.get(c)
            if piv is None:
                inv = pow(r[c], -1, p)
                pivots[c] = {k: v * inv % p for k, v in r.items()}
                break
            a = r[c]
            for k, v in piv.items():
                x = (r.get(k, 0) - a * v) % p
                if x:
                    r[k] = x
                else:
                    r.pop(k, None)
    return len(pivots)


class RankEngine:
    """Chooses between exact and modular ranks.

    In modular mode every rank is computed modulo each prime (they must
    agree) and a seeded random sample of blocks is recomputed exactly; any
    disagreement raises :class:`RankDisagreement`.
    """

    def __init__(self, modular: bool = False, primes: Sequence[int] = DEFAULT_PRIMES[:2],
                 sample_rate: float = 0.1, seed: int = 0, min_exact_size: int = 64):
        self.modular = modular
        self.primes = tuple(primes)
        self.sample_rate = sample_rate
        self.rng = random.Random(seed)
        self.min_exact_size = min_exact_size
        self.checked = 0

    def rank(self, vecs: Sequence[Mapping[int, object]]) -> int:
        if not vecs:
            return 0
        if not self.modular or len(vecs) < self.min_exact_size:
            return rank_exact(vecs)
        ranks = {rank_modp(vecs, p) for p in self.primes}
        if len(ranks) != 1:
            raise RankDisagreement(f"modular ranks disagree across primes: {sorted(ranks)}")
        r = ranks.pop()
        if self.rng.random() < self.sample_rate:
            self.checked += 1
            exact = rank_exact(vecs)
            if exact != r:
                raise RankDisagreement(f"modular rank {r} != exact rank {exact}")
        return r


# ---------------------------------------------------------------- echelon with tracking


class Echelon:
    """Incremental row echelon form over Q that remembers how each row arose.

    Vectors are inserted with a *tag* vector (a formal combination of the
    inputs).  A vector that reduces to zero yields a relation among the tags.
    """

    def __init__(self):
        self.pivots: dict[int, tuple[SparseVec, SparseVec]] = {}
        self.order: list[int] = []

    def reduce(self, vec: Mapping[int, Fraction], tag: Mapping[int, Fraction] | None = None):
        r = _clean(vec)
        t = dict(tag or {})
        while r:
            c = min(r)
            if c not in self.pivots:
                return r, t
            prow, ptag = self.pivots[c]
            a = r[c]
            for k, v in prow.items():
                x = r.get(k, 0) - a * v
                if x:
                    r[k] = x
                else:
                    r.pop(k, None)
            for k, v in ptag.items():
                x = t.get(k, 0) - a * v
                if x:
                    t[k] = x
                else:
                    t.pop(k, None)
        return r, t

    def insert(self, vec, tag=None) -> tuple[bool, SparseVec]:
        """Add ``vec``; returns (was_independent, residual tag if dependent)."""
        r, t = self.reduce(vec, tag)
        if not r:
            return False, t
        c = min(r)
        inv = 1 / r[c]
        self.pivots[c] = ({k: v * inv for k, v in r.items()}, {k: v * inv for k, v in t.items()})
        self.order.append(c)
        return True, {}

    @property
    def rank(self) -> int:
        return len(self.pivots)

    def rows(self) -> list[SparseVec]:
        return [dict(self.pivots[c][0]) for c in self.order]

    @classmethod
    def from_columns(cls, cols: Sequence[Mapping[int, Fraction]]) -> "Echelon":
        e = cls()
        e.kernel = []
        for j, c in enumerate(cols):
            indep, rel = e.insert(c, {j: Fraction(1)})
            if not indep:
                e.kernel.append(rel)
        return e


class QuotientBasis:
    """A basis of ``Z / B`` for subspaces ``B <= Z`` of a common chain space.

    ``reps`` are cycle representatives whose classes form a basis; ``coords``
    expresses any element of ``Z`` in that basis.
    """

    def __init__(self, cycles: Sequence[SparseVec], boundaries: Sequence[SparseVec]):
        self.ech = Echelon()
        for b in boundaries:
            self.ech.insert(b, {})
        self.boundary_rank = self.ech.rank
        self.reps: list[SparseVec] = []
        for z in cycles:
            k = len(self.reps)
            indep, _ = self.ech.insert(z, {k: Fraction(1)})
            if indep:
                self.reps.append(dict(z))

    @property
    def dim(self) -> int:
        return len(self.reps)

    def coords(self, vec: Mapping[int, Fraction]) -> list[Fraction] | None:
        """Coordinates of ``vec`` modulo B, or None if ``vec`` is outside ``Z``."""
        r, t = self.ech.reduce(vec, {})
        if r:
            return None
        zero = Fraction(0)
        return [-t[k] if k in t else zero for k in range(self.dim)]
