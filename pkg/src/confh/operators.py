"""Chain-level actions on ``CE(g)``: multiplication by central elements and
cap products with functionals on the Abelianization.

Both are described by what they do to a single monomial; matrices are
assembled on demand per ``(weight, degree)`` block.  Multiplication by a
central ``z`` satisfies ``d(zm) = (-1)^{|z|} z dm``; the cap with ``lam``
(a signed derivation) satisfies ``d(cap m) = (-1)^{|lam|} cap(dm)`` as long as
``lam`` kills every bracket.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Mapping

from .bigraded import Bidegree
from .ce import CEData, HomologyBlock, Monomial, enumerate_basis, homology_block
from .lie import W_TYPE, LieAlgebra, Transit, build_lie_algebra
from .manifold import ManifoldDatum
from .sparse import SparseRationalMatrix

Chain = dict[Monomial, Fraction]


class OperatorError(ValueError):
    pass


def _homogeneous(g: LieAlgebra, vec: Mapping[int, Fraction], what: str) -> Bidegree:
    vec = {k: Fraction(v) for k, v in vec.items() if v}
    if not vec:
        raise OperatorError(f"{what} is zero")
    bds = {g.generators[k].bidegree for k in vec}
    if len(bds) != 1:
        raise OperatorError(f"{what} is not bihomogeneous")
    return bds.pop()


def _add(out: Chain, mono: Monomial, c) -> None:
    v = out.get(mono, 0) + c
    if v:
        out[mono] = v
    else:
        out.pop(mono, None)


@dataclass
class ChainOperator:
    """A bihomogeneous linear map on ``CE(g)`` given on monomials.

    ``blocks`` memoises matrices ``C_{n,i} -> C_{n+dw, i+dd}`` in the
    canonical monomial bases.
    """

    data: CEData
    shift: Bidegree
    kind: str
    on_monomial: Callable[[Monomial], Chain] = field(repr=False)
    blocks: dict[tuple[int, int], SparseRationalMatrix] = field(default_factory=dict, repr=False)

    @property
    def algebra(self) -> LieAlgebra:
        return self.data.algebra

    @property
    def sign(self) -> int:
        """The sign in ``d T = sign * T d``."""
        return -1 if self.shift.degree % 2 else 1

    def __call__(self, chain: Mapping[Monomial, Fraction]) -> Chain:
        out: Chain = {}
        for mono, c in chain.items():
            for t, v in self.on_monomial(mono).items():
                _add(out, t, c * v)
        return out

    def block(self, n: int, i: int) -> SparseRationalMatrix:
        key = (n, i)
        if key not in self.blocks:
            src = enumerate_basis(self.data, n).by_degree.get(i, ()) if n >= 0 else ()
            tn, ti = n + self.shift.weight, i + self.shift.degree
            tgt_basis = enumerate_basis(self.data, tn).index(ti) if tn >= 0 else {}
            cols = []
            for mono in src:
                cols.append({tgt_basis[t]: Fraction(c) for t, c in self.on_monomial(mono).items()})
            self.blocks[key] = SparseRationalMatrix(len(tgt_basis), len(src), cols)
        return self.blocks[key]

    def compose(self, other: "ChainOperator") -> "ChainOperator":
        """``self o other``."""
        if other.data.algebra != self.data.algebra:
            raise OperatorError("operators act on different algebras")
        return ChainOperator(
            self.data,
            self.shift + other.shift,
            "composite",
            lambda m: self(other.on_monomial(m)),
        )

    def scaled(self, s) -> "ChainOperator":
        s = Fraction(s)
        return ChainOperator(self.data, self.shift, self.kind,
                             lambda m: {t: s * c for t, c in self.on_monomial(m).items() if s * c})


def _data(g: LieAlgebra | CEData) -> CEData:
    return g if isinstance(g, CEData) else CEData(g)


def boundary_chain(data: CEData, chain: Mapping[Monomial, Fraction]) -> Chain:
    out: Chain = {}
    for mono, c in chain.items():
        for t, v in data.boundary(mono).items():
            _add(out, t, c * v)
    return out


def identity_operator(g: LieAlgebra | CEData) -> ChainOperator:
    data = _data(g)
    return ChainOperator(data, Bidegree(0, 0), "identity", lambda m: {m: Fraction(1)})


def zero_operator(g: LieAlgebra | CEData, shift: Bidegree = Bidegree(0, 0)) -> ChainOperator:
    data = _data(g)
    return ChainOperator(data, shift, "zero", lambda m: {})


def is_central(g: LieAlgebra, z: Mapping[int, Fraction]) -> bool:
    return all(not g.bracket(z, {k: Fraction(1)}) for k in range(len(g)))


def multiplication_operator(g: LieAlgebra | CEData, z: Mapping[int, Fraction]) -> ChainOperator:
    """Left multiplication by an element ``z`` of the centre of ``g[1]``."""
    data = _data(g)
    alg = data.algebra
    z = {k: Fraction(v) for k, v in z.items() if v}
    shift = _homogeneous(alg, z, "multiplier")
    if not is_central(alg, z):
        raise OperatorError("multiplication by non-central element is not a chain map")
    odd = data.odd

    def on_monomial(mono: Monomial) -> Chain:
        out: Chain = {}
        par = data.prefix_parity(mono)
        for k, c in z.items():
            if odd[k] and mono[k]:
                continue
            t = list(mono)
            t[k] += 1
            _add(out, tuple(t), -c if odd[k] and par[k] else c)
        return out

    return ChainOperator(data, shift, "multiplication", on_monomial)


def derived_annihilates(g: LieAlgebra, lam: Mapping[int, Fraction]) -> bool:
    n = len(g)
    for a in range(n):
        for b in range(a, n):
            br = g.bracket_gens(a, b)
            if sum((lam.get(k, 0) * c for k, c in br.items()), Fraction(0)):
                return False
    return True


def cap_operator(g: LieAlgebra | CEData, lam: Mapping[int, Fraction]) -> ChainOperator:
    """Contraction with a functional ``lam`` on ``g[1]`` that vanishes on ``[g, g]``."""
    data = _data(g)
    alg = data.algebra
    lam = {k: Fraction(v) for k, v in lam.items() if v}
    bd = _homogeneous(alg, lam, "functional")
    if not derived_annihilates(alg, lam):
        raise OperatorError("functional does not vanish on [g, g]; cap product is not a chain map")
    odd = data.odd

    def on_monomial(mono: Monomial) -> Chain:
        out: Chain = {}
        par = data.prefix_parity(mono)
        for k, c in lam.items():
            e = mono[k]
            if not e:
                continue
            t = list(mono)
            t[k] -= 1
            v = c * e
            _add(out, tuple(t), -v if odd[k] and par[k] else v)
        return out

    return ChainOperator(data, -bd, "cap", on_monomial)


# ---------------------------------------------------------------- chain-map checks


@dataclass(frozen=True)
class ChainMapReport:
    passed: bool
    blocks_checked: int
    witness: tuple[int, int] | None = None

    def __str__(self) -> str:
        if self.passed:
            return f"chain map: pass ({self.blocks_checked} blocks)"
        return f"chain map: FAIL at block {self.witness}"


def check_chain_map(op: ChainOperator, weights) -> ChainMapReport:
    """``d T = (-1)^{shift degree} T d`` on every block of the given weights."""
    data = op.data
    count = 0
    for n in weights:
        if n < 0 or n + op.shift.weight < 0:
            continue
        basis = enumerate_basis(data, n)
        for i, monos in basis.by_degree.items():
            count += 1
            for mono in monos:
                lhs = boundary_chain(data, op.on_monomial(mono))
                rhs = op(data.boundary(mono))
                if op.sign < 0:
                    rhs = {t: -c for t, c in rhs.items()}
                if {t: c for t, c in lhs.items() if c} != {t: c for t, c in rhs.items() if c}:
                    return ChainMapReport(False, count, (n, i))
    return ChainMapReport(True, count)


# ---------------------------------------------------------------- induced maps


@dataclass(frozen=True)
class HomologyMap:
    source: HomologyBlock
    target: HomologyBlock
    matrix: tuple[tuple[Fraction, ...], ...]  # target dim rows, source dim columns

    @property
    def rank(self) -> int:
        from .sparse import rank_exact
        cols = [{r: self.matrix[r][c] for r in range(self.target.dim) if self.matrix[r][c]}
                for c in range(self.source.dim)]
        return rank_exact(cols)

    @property
    def injective(self) -> bool:
        return self.rank == self.source.dim

    @property
    def surjective(self) -> bool:
        return self.rank == self.target.dim

    def format(self) -> str:
        from .sparse import fmt_q
        head = (f"H({self.source.weight},{self.source.degree}) -> H({self.target.weight},{self.target.degree})"
                f"  [{self.target.dim} x {self.source.dim}]")
        lines = [head]
        if not self.source.dim:
            return head
        for row in self.matrix:
            lines.append(" ".join(fmt_q(x) for x in row))
        return "\n".join(lines)

    def __matmul__(self, other: "HomologyMap") -> "HomologyMap":
        inner = other.target.dim
        if inner != self.source.dim:
            raise OperatorError("dimension mismatch in composition")
        rows = tuple(
            tuple(sum((self.matrix[r][k] * other.matrix[k][c] for k in range(inner)), Fraction(0))
                  for c in range(other.source.dim))
            for r in range(self.target.dim))
        return HomologyMap(other.source, self.target, rows)


class ChainMapViolation(ArithmeticError):
    pass


def _basis_vector(data: CEData, n: int, i: int, vec) -> Chain:
    monos = enumerate_basis(data, n).by_degree.get(i, ())
    return {monos[k]: Fraction(c) for k, c in vec.items()}


def induced_map(op: ChainOperator, n: int, i: int, cache: dict | None = None,
                source: HomologyBlock | None = None, target: HomologyBlock | None = None) -> HomologyMap:
    """The map ``H_{n,i} -> H_{n+dw, i+dd}`` in the homology bases of the blocks.

    ``cache`` memoises homology blocks across calls; explicit ``source`` /
    ``target`` blocks override it (used to test independence of the choice
    of representatives).
    """
    data = op.data
    tn, ti = n + op.shift.weight, i + op.shift.degree
    src = source or homology_block(data, n, i, cache)
    tgt = target or homology_block(data, tn, ti, cache)
    index = enumerate_basis(data, tn).index(ti) if tn >= 0 and ti >= 0 else {}
    cols = []
    for rep in src.cycles or ():
        image = op(_basis_vector(data, n, i, rep))
        vec = {index[t]: c for t, c in image.items()}
        coords = tgt.quotient.coords(vec) if vec else [Fraction(0)] * tgt.dim
        if coords is None:
            raise ChainMapViolation(f"image of a cycle in H({n},{i}) is not a cycle")
        cols.append(coords)
    matrix = tuple(tuple(cols[c][r] for c in range(src.dim)) for r in range(tgt.dim))
    return HomologyMap(src, tgt, matrix)


# ---------------------------------------------------------------- extremal stabilization


def _as_algebra(m: ManifoldDatum | LieAlgebra) -> LieAlgebra:
    return m if isinstance(m, LieAlgebra) else build_lie_algebra(m)


def stabilizing_class(g: LieAlgebra, alpha: str) -> int:
    """Generator index of ``alpha (x) [v,v]`` for an untwisted degree-1 class ``alpha``."""
    for k, gen in enumerate(g.generators):
        if gen.kind == W_TYPE and gen.source is not None and gen.source.id == alpha:
            if gen.source.degree != 1:
                raise OperatorError(f"class {alpha!r} has degree {gen.source.degree}, expected 1")
            return k
    raise OperatorError(f"no untwisted class {alpha!r}")


def degree_one_classes(g: LieAlgebra) -> list[str]:
    return [gen.source.id for gen in g.generators
            if gen.kind == W_TYPE and gen.source is not None and gen.source.degree == 1]


def extremal_stabilization(m: ManifoldDatum | LieAlgebra, alpha: str, n: int, i: int,
                           cache: dict | None = None, data: CEData | None = None) -> HomologyMap:
    """``H_i(B_n) -> H_{i+2d-2}(B_{n+2})`` induced by ``alpha (x) [v,v]``."""
    g = data.algebra if data is not None else _as_algebra(m)
    if not degree_one_classes(g):
        raise OperatorError("no valid class: H_c^1(M;Q) = 0")
    k = stabilizing_class(g, alpha)
    op = multiplication_operator(data or g, {k: Fraction(1)})
    return induced_map(op, n, i, cache)


# ---------------------------------------------------------------- Weyl relation


@dataclass(frozen=True)
class WeylReport:
    passed: bool
    pairs: int
    blocks: int
    witness: str = ""

    def __str__(self) -> str:
        if self.passed:
            return f"weyl: pass ({self.pairs} pairs, {self.blocks} blocks)"
        return f"weyl: FAIL {self.witness}"


def weyl_commutator(data: CEData, cap: ChainOperator, mult: ChainOperator, mono: Monomial) -> Chain:
    """Graded commutator ``cap o mult - (-1)^{|cap||mult|} mult o cap`` on a monomial."""
    a = cap(mult.on_monomial(mono))
    b = mult(cap.on_monomial(mono))
    s = -1 if (cap.shift.degree * mult.shift.degree) % 2 else 1
    out = dict(a)
    for t, c in b.items():
        _add(out, t, -s * c)
    return out


def weyl_check(g: LieAlgebra | CEData, t: Transit, x, lam, weights) -> WeylReport:
    """Check ``[cap(lam o g), f(x)] = lam(g(f(x))) * id`` on all blocks of ``weights``.

    ``x`` and ``lam`` are coordinate vectors on ``h`` and ``k``; lists of them
    are checked pairwise.
    """
    data = _data(g)
    xs = x if x and isinstance(x[0], (list, tuple)) else [x]
    lams = lam if lam and isinstance(lam[0], (list, tuple)) else [lam]
    pairs = blocks = 0
    for xv in xs:
        z = t.f(xv)
        if not z:
            continue
        mult = multiplication_operator(data, z)
        for lv in lams:
            pulled = t.pullback(lv)
            if not pulled:
                continue
            cap = cap_operator(data, pulled)
            scalar = sum((Fraction(c) * v for c, v in zip(lv, t.g(z))), Fraction(0))
            pairs += 1
            for n in weights:
                basis = enumerate_basis(data, n)
                for i, monos in basis.by_degree.items():
                    blocks += 1
                    for mono in monos:
                        got = weyl_commutator(data, cap, mult, mono)
                        want = {mono: scalar} if scalar else {}
                        if got != want:
                            return WeylReport(False, pairs, blocks,
                                              f"x={list(map(str, xv))} lam={list(map(str, lv))} block ({n},{i})")
    return WeylReport(True, pairs, blocks)


def unit_vectors(k: int) -> list[list[Fraction]]:
    return [[Fraction(int(a == b)) for b in range(k)] for a in range(k)]


def weyl_check_all(g: LieAlgebra | CEData, t: Transit, weights) -> WeylReport:
    """``weyl_check`` over the coordinate bases of ``h`` and ``k^v``."""
    return weyl_check(g, t, unit_vectors(t.h_dim), unit_vectors(t.k_dim), weights)


__all__ = [
    "ChainOperator", "HomologyMap", "OperatorError", "ChainMapViolation", "ChainMapReport", "WeylReport",
    "multiplication_operator", "cap_operator", "identity_operator", "zero_operator",
    "check_chain_map", "induced_map", "extremal_stabilization", "stabilizing_class", "degree_one_classes",
    "weyl_check", "weyl_check_all", "weyl_commutator", "is_central", "derived_annihilates",
]
