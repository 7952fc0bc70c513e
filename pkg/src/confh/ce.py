"""The Chevalley-Eilenberg complex ``Sym(g[1])`` and its homology.

Monomials are dense exponent tuples indexed by the generator order of the
Lie algebra (weight, then ``g[1]``-degree, then manifest order).  Odd
generators are exterior, so their exponents are 0 or 1.

The differential is the coderivation extending ``d(xy) = (-1)^{deg_g x} [x, y]``:
on a monomial it sums, over every pair of factor positions, the Koszul sign of
pulling that pair to the front times the bracket, times the remaining factors.

Every bracket of ``g_M`` is homogeneous for a lattice of additive gradings
(weight, ``deg_g``, and e.g. ``#a_i - #b_i`` for a surface).  Each
``(weight, degree)`` block of the complex therefore splits into independent
summands, which is what keeps the rank computations small.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb, lcm
from typing import Iterator, Mapping

from . import linalg
from .bigraded import Bidegree, GradedDims
from .lie import LieAlgebra, build_lie_algebra
from .manifold import ManifoldDatum
from .sparse import QuotientBasis, RankEngine, SparseRationalMatrix, SparseVec

Monomial = tuple[int, ...]


class CEData:
    """Per-algebra tables used by the inner loops."""

    def __init__(self, g: LieAlgebra):
        self.algebra = g
        gens = g.generators
        self.n = len(gens)
        self.weights = [x.weight for x in gens]
        self.degrees = [x.degree for x in gens]
        self.odd = [x.degree % 2 for x in gens]
        self.lie_parity = [(x.degree - 1) % 2 for x in gens]
        self.brackets: list[tuple[int, int, list[tuple[int, Fraction]]]] = []
        integral = True
        for a in range(self.n):
            for b in range(a, self.n):
                vec = g.bracket_gens(a, b)
                if vec:
                    terms = sorted(vec.items())
                    if any(c.denominator != 1 for _, c in terms):
                        integral = False
                    self.brackets.append((a, b, terms))
        if integral:
            self.brackets = [(a, b, [(z, int(c)) for z, c in t]) for a, b, t in self.brackets]
        self.gradings = _grading_lattice(g)
        self._bases: dict[int, "ChainBasis"] = {}
        self._blocks: dict[int, dict] = {}

    def degree(self, mono: Monomial) -> int:
        return sum(e * d for e, d in zip(mono, self.degrees))

    def weight(self, mono: Monomial) -> int:
        return sum(e * w for e, w in zip(mono, self.weights))

    def multigrade(self, mono: Monomial) -> tuple[int, ...]:
        return tuple(sum(e * gr[k] for k, e in enumerate(mono) if e) for gr in self.gradings)

    def prefix_parity(self, mono: Monomial) -> list[int]:
        out = []
        acc = 0
        for e, o in zip(mono, self.odd):
            out.append(acc)
            if o and e:
                acc ^= 1
        return out

    def boundary(self, mono: Monomial) -> dict[Monomial, object]:
        """``d`` of a single monomial, as ``{monomial: coefficient}``."""
        out: dict[Monomial, object] = {}
        if not self.brackets:
            return out
        par = self.prefix_parity(mono)
        odd = self.odd
        for a, b, terms in self.brackets:
            ea, eb = mono[a], mono[b]
            if a == b:
                if ea < 2:
                    continue
                mult = comb(ea, 2)
                sign = 0
            else:
                if not ea or not eb:
                    continue
                mult = ea * eb
                # pull x_a to the front, then x_b to second place
                sign = (odd[a] & par[a]) ^ (odd[b] & (par[b] ^ odd[a]))
            sign ^= self.lie_parity[a]
            rest = list(mono)
            rest[a] -= 1
            rest[b] -= 1
            for z, c in terms:
                if odd[z] and rest[z]:
                    continue
                # multiply z onto the front of the rest and sort it into place
                s = sign
                if odd[z]:
                    p = 0
                    for k in range(z):
                        if odd[k] and rest[k]:
                            p ^= 1
                    s ^= p
                target = list(rest)
                target[z] += 1
                target = tuple(target)
                coef = -mult * c if s else mult * c
                val = out.get(target, 0) + coef
                if val:
                    out[target] = val
                else:
                    out.pop(target, None)
        return out


def _grading_lattice(g: LieAlgebra) -> list[tuple[int, ...]]:
    """Integer basis of the additive gradings that every bracket respects."""
    n = len(g)
    rows = []
    for (i, j), vec in g.structure.items():
        for k in vec:
            row = [Fraction(0)] * n
            row[i] += 1
            row[j] += 1
            row[k] -= 1
            rows.append(row)
    basis = linalg.nullspace(rows, n) if rows else linalg.identity(n)
    out = []
    for vec in basis:
        den = 1
        for x in vec:
            den = lcm(den, x.denominator)
        out.append(tuple(int(x * den) for x in vec))
    return out


# ---------------------------------------------------------------- bases


def iter_monomials(data: CEData, n: int) -> Iterator[Monomial]:
    """All exponent vectors of total weight ``n``."""
    N = data.n
    weights, odd = data.weights, data.odd
    cur = [0] * N

    def rec(k: int, remaining: int):
        if k == N:
            if remaining == 0:
                yield tuple(cur)
            return
        top = remaining // weights[k]
        if odd[k]:
            top = min(top, 1)
        for e in range(top + 1):
            cur[k] = e
            yield from rec(k + 1, remaining - e * weights[k])
        cur[k] = 0

    yield from rec(0, n)


def _sort_key(mono: Monomial):
    return (sum(mono), tuple(-e for e in mono))


@dataclass(frozen=True)
class ChainBasis:
    weight: int
    by_degree: Mapping[int, tuple[Monomial, ...]]

    def dims(self) -> dict[int, int]:
        return {i: len(b) for i, b in self.by_degree.items()}

    def index(self, degree: int) -> dict[Monomial, int]:
        return {m: k for k, m in enumerate(self.by_degree.get(degree, ()))}


def enumerate_basis(g: LieAlgebra | CEData, n: int) -> ChainBasis:
    """Canonical monomial basis of weight ``n``, grouped by degree.

    Within a degree, monomials are ordered by number of factors and then
    lexicographically (larger exponents of earlier generators first).
    """
    data = g if isinstance(g, CEData) else CEData(g)
    if n < 0:
        raise ValueError("weight must be non-negative")
    if n in data._bases:
        return data._bases[n]
    by: dict[int, list[Monomial]] = {}
    for mono in iter_monomials(data, n):
        by.setdefault(data.degree(mono), []).append(mono)
    basis = ChainBasis(n, {i: tuple(sorted(ms, key=_sort_key)) for i, ms in sorted(by.items())})
    data._bases[n] = basis
    return basis


def format_monomial(g: LieAlgebra, mono: Monomial) -> str:
    parts = []
    for k, e in enumerate(mono):
        if e:
            gid = g.generators[k].id
            parts.append(f"({gid})" + (f"^{e}" if e > 1 else ""))
    return "*".join(parts) or "1"


def hilbert_series(g: LieAlgebra, n_max: int) -> dict[int, dict[int, int]]:
    """Coefficients of ``prod_even (1 - q^deg t^wt)^-1 prod_odd (1 + q^deg t^wt)`` up to ``t^n_max``."""
    series: dict[int, dict[int, int]] = {0: {0: 1}}
    for gen in g.generators:
        w, dg = gen.weight, gen.degree
        new: dict[int, dict[int, int]] = {}
        kmax = 1 if gen.odd else n_max // w
        for n, row in series.items():
            for k in range(kmax + 1):
                nn = n + k * w
                if nn > n_max:
                    break
                target = new.setdefault(nn, {})
                for deg, c in row.items():
                    dd = deg + k * dg
                    target[dd] = target.get(dd, 0) + c
        series = new
    return {n: dict(sorted(series.get(n, {}).items())) for n in range(n_max + 1)}


@dataclass(frozen=True)
class SeriesReport:
    passed: bool
    mismatches: tuple[str, ...] = ()


class HilbertMismatch(AssertionError):
    pass


def hilbert_series_check(g: LieAlgebra, n_max: int, strict: bool = True) -> SeriesReport:
    series = hilbert_series(g, n_max)
    data = CEData(g)
    bad = []
    for n in range(n_max + 1):
        counted = enumerate_basis(data, n).dims()
        expected = {i: c for i, c in series[n].items() if c}
        if counted != expected:
            for i in sorted(set(counted) | set(expected)):
                if counted.get(i, 0) != expected.get(i, 0):
                    bad.append(f"bidegree ({n},{i}): basis {counted.get(i, 0)} vs series {expected.get(i, 0)}")
    if bad and strict:
        raise HilbertMismatch("; ".join(bad))
    return SeriesReport(not bad, tuple(bad))


# ---------------------------------------------------------------- differential


def differential(g: LieAlgebra | CEData, n: int, basis: ChainBasis | None = None) -> dict[int, SparseRationalMatrix]:
    """``d_i : C_{n,i} -> C_{n,i-1}`` for every degree present in weight ``n``.

    Rows are indexed by ``basis.by_degree[i-1]``, columns by ``basis.by_degree[i]``.
    """
    data = g if isinstance(g, CEData) else CEData(g)
    basis = basis or enumerate_basis(data, n)
    out = {}
    for i, src in basis.by_degree.items():
        tgt = basis.index(i - 1)
        cols = []
        for mono in src:
            img = data.boundary(mono)
            cols.append({tgt[t]: Fraction(c) for t, c in img.items()})
        out[i] = SparseRationalMatrix(len(tgt), len(src), cols)
    return out


# ---------------------------------------------------------------- homology


@dataclass(frozen=True)
class HomologyBlock:
    weight: int
    degree: int
    dim: int
    chain_dim: int = 0
    cycles: tuple[SparseVec, ...] | None = None  # homology representatives
    boundaries: tuple[SparseVec, ...] | None = None
    quotient: QuotientBasis | None = field(default=None, compare=False, repr=False)

    @property
    def bidegree(self) -> Bidegree:
        return Bidegree(self.weight, self.degree)


def _split_blocks(data: CEData, n: int) -> dict[int, dict[tuple, list[Monomial]]]:
    if n in data._blocks:
        return data._blocks[n]
    by: dict[int, dict[tuple, list[Monomial]]] = {}
    for mono in iter_monomials(data, n):
        by.setdefault(data.degree(mono), {}).setdefault(data.multigrade(mono), []).append(mono)
    for comps in by.values():
        for key in comps:
            comps[key].sort(key=_sort_key)
    data._blocks[n] = by
    return by


def weight_ranks(data: CEData, n: int, engine: RankEngine | None = None) -> tuple[dict[int, int], dict[int, int]]:
    """Chain dimensions and ranks of ``d_i`` in weight ``n`` (``i -> value``)."""
    engine = engine or RankEngine()
    blocks = _split_blocks(data, n)
    dims = {i: sum(len(v) for v in comps.values()) for i, comps in blocks.items()}
    ranks: dict[int, int] = {}
    for i in sorted(blocks):
        total = 0
        below = blocks.get(i - 1, {})
        for key in sorted(blocks[i]):
            if key not in below:
                continue
            tgt = {m: k for k, m in enumerate(below[key])}
            vecs = []
            for mono in blocks[i][key]:
                img = data.boundary(mono)
                if img:
                    vecs.append({tgt[t]: c for t, c in img.items()})
            total += engine.rank(vecs)
        ranks[i] = total
    return dims, ranks


def homology_dims(data: CEData, n: int, engine: RankEngine | None = None) -> dict[int, int]:
    dims, ranks = weight_ranks(data, n, engine)
    out = {}
    for i in sorted(dims):
        h = dims[i] - ranks.get(i, 0) - ranks.get(i + 1, 0)
        if h < 0:
            raise ArithmeticError(f"negative homology at ({n},{i}); differential is inconsistent")
        out[i] = h
    return out


def _summand_bases(data: CEData, n: int, i: int, blocks=None, basis: ChainBasis | None = None):
    """Cycles and boundaries of ``C_{n,i}`` as vectors over the global degree-``i`` basis.

    The work is done one multigrade summand at a time; results are
    concatenated in sorted summand order.
    """
    blocks = blocks if blocks is not None else _split_blocks(data, n)
    basis = basis or enumerate_basis(data, n)
    glob = basis.index(i)
    here = blocks.get(i, {})
    below = blocks.get(i - 1, {})
    above = blocks.get(i + 1, {})
    cycles: list[SparseVec] = []
    bnd: list[SparseVec] = []
    for key in sorted(here):
        monos = here[key]
        local = {m: k for k, m in enumerate(monos)}
        tgt = {m: k for k, m in enumerate(below.get(key, ()))}
        cols = [{tgt[t]: Fraction(c) for t, c in data.boundary(m).items()} for m in monos]
        d_i = SparseRationalMatrix(len(tgt), len(monos), cols)
        lift = [glob[m] for m in monos]
        for z in d_i.kernel_basis():
            cycles.append({lift[k]: v for k, v in z.items()})
        if key in above:
            cols = [{local[t]: Fraction(c) for t, c in data.boundary(m).items()} for m in above[key]]
            for b in SparseRationalMatrix(len(monos), len(cols), cols).image_basis():
                bnd.append({lift[k]: v for k, v in b.items()})
    return cycles, bnd


def homology(g: LieAlgebra | CEData, n: int, with_bases: bool = False,
             engine: RankEngine | None = None) -> list[HomologyBlock]:
    """Homology of the weight-``n`` summand, one block per degree present.

    With ``with_bases`` each block carries cycle representatives of a
    homology basis and a basis of the boundaries, as vectors over
    ``enumerate_basis(g, n).by_degree[degree]``.
    """
    data = g if isinstance(g, CEData) else CEData(g)
    basis = enumerate_basis(data, n)
    if not with_bases:
        dims = homology_dims(data, n, engine)
        return [HomologyBlock(n, i, h, len(basis.by_degree[i])) for i, h in dims.items()]
    blocks = _split_blocks(data, n)
    out = []
    for i, src in basis.by_degree.items():
        cycles, bnd = _summand_bases(data, n, i, blocks, basis)
        q = QuotientBasis(cycles, bnd)
        out.append(HomologyBlock(n, i, q.dim, len(src), tuple(q.reps), tuple(bnd), q))
    return out


def homology_block(g: LieAlgebra | CEData, n: int, i: int, cache: dict | None = None) -> HomologyBlock:
    """A single block with bases (memoised in ``cache`` if given)."""
    key = (n, i)
    if cache is not None and key in cache:
        return cache[key]
    data = g if isinstance(g, CEData) else CEData(g)
    if n < 0 or i < 0:
        blk = HomologyBlock(n, i, 0, 0, (), (), QuotientBasis([], []))
    else:
        basis = enumerate_basis(data, n)
        src = basis.by_degree.get(i, ())
        if not src:
            blk = HomologyBlock(n, i, 0, 0, (), (), QuotientBasis([], []))
        else:
            cycles, bnd = _summand_bases(data, n, i, None, basis)
            q = QuotientBasis(cycles, bnd)
            blk = HomologyBlock(n, i, q.dim, len(src), tuple(q.reps), tuple(bnd), q)
    if cache is not None:
        cache[key] = blk
    return blk


# ---------------------------------------------------------------- tables


def _weight_task(args):
    g, n, modular, seed = args
    engine = RankEngine(modular=modular, seed=seed * 1000003 + n)
    return n, homology_dims(CEData(g), n, engine)


def betti_table(m: ManifoldDatum | LieAlgebra, n_max: int, *, threads: int = 1, cache=None,
                modular: bool = False, seed: int = 0) -> GradedDims:
    """``dim H_i(B_n(M); Q)`` for ``0 <= n <= n_max`` as a :class:`GradedDims`.

    ``cache`` is an optional :class:`confh.cache.ResultCache`.  Results do not
    depend on ``threads``, the cache state or the rank method.
    """
    if n_max < 0:
        raise ValueError("n_max must be non-negative")
    g = m if isinstance(m, LieAlgebra) else build_lie_algebra(m)
    rows: dict[int, dict[int, int]] = {}
    todo = []
    for n in range(n_max + 1):
        hit = cache.load(g, n) if cache is not None else None
        if hit is not None:
            rows[n] = hit
        else:
            todo.append(n)
    if todo:
        tasks = [(g, n, modular, seed) for n in todo]
        if threads > 1 and len(todo) > 1:
            # heaviest weights first; results are keyed so order is irrelevant
            with ProcessPoolExecutor(max_workers=min(threads, len(todo))) as pool:
                results = list(pool.map(_weight_task, sorted(tasks, key=lambda t: -t[1])))
        else:
            results = [_weight_task(t) for t in tasks]
        for n, dims in results:
            rows[n] = dims
            if cache is not None:
                cache.store(g, n, dims)
    entries = {Bidegree(n, i): h for n, row in rows.items() for i, h in row.items() if h}
    return GradedDims(entries, n_max)


def euler_characteristic(dims: Mapping[int, int]) -> int:
    return sum((-1) ** i * c for i, c in dims.items())


def nu(n: int, d: int) -> int:
    """Upper bound ``n(d-1)+1`` of the nonvanishing homological degrees of ``B_n``."""
    return n * (d - 1) + 1
