"""The bigraded Lie algebra of a manifold and its transits.

Degrees are stored in the shifted convention of ``g[1]`` (the homological
degree a generator carries inside the Chevalley-Eilenberg complex).  Koszul
signs of the bracket itself use the *unshifted* degree ``deg_g = deg_g[1] - 1``;
:meth:`LieGenerator.lie_degree` is the single place that conversion happens.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product as iproduct
from types import MappingProxyType
from typing import Mapping, Sequence

from . import linalg
from .bigraded import Bidegree
from .manifold import CohomClass, ManifoldDatum, ensure_valid

Vector = dict[int, Fraction]

V_TYPE = "v"
W_TYPE = "vv"


def _sign(e: int) -> int:
    return -1 if e % 2 else 1


def _clean(vec: Mapping[int, Fraction]) -> Vector:
    return {k: Fraction(v) for k, v in sorted(vec.items()) if v != 0}


@dataclass(frozen=True)
class LieGenerator:
    id: str
    kind: str
    source: CohomClass | None
    bidegree: Bidegree  # in g[1]

    @property
    def weight(self) -> int:
        return self.bidegree.weight

    @property
    def degree(self) -> int:
        return self.bidegree.degree

    @property
    def lie_degree(self) -> int:
        return self.bidegree.degree - 1

    @property
    def odd(self) -> bool:
        """Exterior (odd) in Sym(g[1])."""
        return self.bidegree.degree % 2 == 1


@dataclass(frozen=True)
class LieAlgebra:
    """Generators of ``g[1]`` with sparse structure constants.

    ``structure`` is keyed by ordered index pairs; a pair absent in one order
    is inferred from its partner by Koszul antisymmetry.
    """

    generators: tuple[LieGenerator, ...]
    structure: Mapping[tuple[int, int], Mapping[int, Fraction]] = field(default_factory=dict)
    d: int = 0
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "generators", tuple(self.generators))
        clean = {}
        for key, vec in self.structure.items():
            vec = _clean(vec)
            if vec:
                clean[tuple(key)] = MappingProxyType(vec)
        object.__setattr__(self, "structure", MappingProxyType(dict(sorted(clean.items()))))

    def __reduce__(self):
        plain = {k: dict(v) for k, v in self.structure.items()}
        return (LieAlgebra, (self.generators, plain, self.d, self.name))

    def __len__(self) -> int:
        return len(self.generators)

    @property
    def dim(self) -> int:
        return len(self.generators)

    def index(self, gid: str) -> int:
        for k, g in enumerate(self.generators):
            if g.id == gid:
                return k
        raise KeyError(gid)

    def bracket_gens(self, i: int, j: int) -> Vector:
        if (i, j) in self.structure:
            return dict(self.structure[(i, j)])
        if (j, i) in self.structure:
            s = -_sign(self.generators[i].lie_degree * self.generators[j].lie_degree)
            return {k: s * v for k, v in self.structure[(j, i)].items()}
        return {}

    def bracket(self, x: Mapping[int, Fraction], y: Mapping[int, Fraction]) -> Vector:
        out: dict[int, Fraction] = {}
        for i, a in x.items():
            if not a:
                continue
            for j, b in y.items():
                if not b:
                    continue
                for k, c in self.bracket_gens(i, j).items():
                    out[k] = out.get(k, Fraction(0)) + a * b * c
        return _clean(out)

    @property
    def is_abelian(self) -> bool:
        return not self.structure

    def bidegree_of(self, vec: Mapping[int, Fraction]) -> Bidegree | None:
        degs = {self.generators[k].bidegree for k, v in vec.items() if v}
        if len(degs) > 1:
            raise ValueError("element is not bihomogeneous")
        return degs.pop() if degs else None

    def canonical_text(self) -> str:
        lines = [f"d {self.d}"]
        for g in self.generators:
            lines.append(f"gen {g.id} {g.kind} {g.weight} {g.degree}")
        for i in range(len(self)):
            for j in range(i, len(self)):
                for k, c in self.bracket_gens(i, j).items():
                    lines.append(f"br {i} {j} {k} {c.numerator}/{c.denominator}")
        return "\n".join(lines) + "\n"

    def fingerprint(self) -> str:
        return hashlib.sha256(self.canonical_text().encode()).hexdigest()

    def dump(self) -> str:
        """Generator table and nonzero brackets, for debugging."""
        lines = [f"# Lie algebra {self.name} (d={self.d}), {len(self)} generators", "idx  id  kind  (weight,degree in g[1])  parity"]
        for k, g in enumerate(self.generators):
            lines.append(f"{k}  {g.id}  {g.kind}  ({g.weight},{g.degree})  {'odd' if g.odd else 'even'}")
        lines.append("# nonzero brackets [x,y] (x <= y)")
        for i in range(len(self)):
            for j in range(i, len(self)):
                vec = self.bracket_gens(i, j)
                if vec:
                    rhs = " + ".join(f"{_fmt(c)}*{self.generators[k].id}" for k, c in vec.items())
                    lines.append(f"[{self.generators[i].id}, {self.generators[j].id}] = {rhs}")
        return "\n".join(lines) + "\n"


def _fmt(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def build_lie_algebra(m: ManifoldDatum) -> LieAlgebra:
    """``g_M = H_c(M;Q^w) (x) v  +  H_c(M;Q) (x) [v,v]``.

    For a class of cohomological degree ``i`` the generators sit in ``g[1]``
    at ``(1, d-i)`` and ``(2, 2d-1-i)``.  The only nonzero brackets are
    ``[a.v, b.v] = (-1)^(|b|(d-1)) (ab).[v,v]``.
    """
    ensure_valid(m)
    d = m.d
    raw = []
    for pos, c in enumerate(m.twisted):
        raw.append(((1, d - c.degree, pos), LieGenerator(f"{c.id}.v", V_TYPE, c, Bidegree(1, d - c.degree))))
    for pos, c in enumerate(m.untwisted):
        raw.append(
            ((2, 2 * d - 1 - c.degree, pos), LieGenerator(f"{c.id}.[v,v]", W_TYPE, c, Bidegree(2, 2 * d - 1 - c.degree)))
        )
    raw.sort(key=lambda t: t[0])
    gens = tuple(g for _, g in raw)
    v_index = {g.source.id: k for k, g in enumerate(gens) if g.kind == V_TYPE}
    w_index = {g.source.id: k for k, g in enumerate(gens) if g.kind == W_TYPE}

    structure: dict[tuple[int, int], dict[int, Fraction]] = {}
    for (a, b), comb in m.products.items():
        i, j = v_index[a], v_index[b]
        if i > j:
            continue
        s = _sign(m.twisted_class(b).degree * (d - 1))
        structure[(i, j)] = {w_index[cid]: s * c for cid, c in comb.items()}
    return LieAlgebra(gens, structure, d, m.name)


def abelian(bidegrees: Sequence[tuple[int, int]], name: str = "abelian") -> LieAlgebra:
    gens = tuple(
        LieGenerator(f"x{k}", V_TYPE if w == 1 else W_TYPE, None, Bidegree(w, deg))
        for k, (w, deg) in enumerate(bidegrees)
    )
    return LieAlgebra(gens, {}, 0, name)


# ---------------------------------------------------------------- axioms


@dataclass(frozen=True)
class AxiomReport:
    passed: bool
    failures: tuple[str, ...] = ()

    def __str__(self):
        return "pass" if self.passed else "FAIL\n" + "\n".join(self.failures)


def check_axioms(g: LieAlgebra) -> AxiomReport:
    fails: list[str] = []
    gens = g.generators
    n = len(gens)
    for (i, j), vec in g.structure.items():
        bi, bj = gens[i].bidegree, gens[j].bidegree
        for k in vec:
            bk = gens[k].bidegree
            if bk.weight != bi.weight + bj.weight or bk.degree != bi.degree + bj.degree - 1:
                fails.append(f"bracket [{gens[i].id},{gens[j].id}] has a term {gens[k].id} of the wrong bidegree")
    for i in range(n):
        for j in range(i, n):
            xy = g.bracket_gens(i, j)
            yx = g.bracket_gens(j, i)
            s = _sign(gens[i].lie_degree * gens[j].lie_degree)
            total = dict(xy)
            for k, v in yx.items():
                total[k] = total.get(k, Fraction(0)) + s * v
            if _clean(total):
                fails.append(f"antisymmetry fails on ({gens[i].id}, {gens[j].id})")
    # Jacobi; only triples touching a nonzero bracket can fail
    active = sorted({i for key in g.structure for i in key} | {k for v in g.structure.values() for k in v})
    for i, j, k in iproduct(active, repeat=3):
        x, y, z = {i: Fraction(1)}, {j: Fraction(1)}, {k: Fraction(1)}
        dx, dy, dz = gens[i].lie_degree, gens[j].lie_degree, gens[k].lie_degree
        total: dict[int, Fraction] = {}
        for sgn, vec in (
            (_sign(dx * dz), g.bracket(g.bracket(x, y), z)),
            (_sign(dy * dx), g.bracket(g.bracket(y, z), x)),
            (_sign(dz * dy), g.bracket(g.bracket(z, x), y)),
        ):
            for key, v in vec.items():
                total[key] = total.get(key, Fraction(0)) + sgn * v
        if _clean(total):
            fails.append(f"Jacobi fails on ({gens[i].id}, {gens[j].id}, {gens[k].id})")
    return AxiomReport(not fails, tuple(fails))


# ---------------------------------------------------------------- transits


@dataclass(frozen=True)
class Transit:
    """``h --f--> g --g--> k`` with ``h, k`` Abelian and ``f`` central.

    ``f_cols[j]`` is the image of the j-th basis vector of h, as a dense
    vector of length ``dim g``; ``g_rows[r]`` is the r-th coordinate
    functional of the quotient map.
    """

    algebra: LieAlgebra
    f_cols: tuple[tuple[Fraction, ...], ...]
    g_rows: tuple[tuple[Fraction, ...], ...]
    h_labels: tuple[str, ...] = ()
    k_labels: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "f_cols", tuple(tuple(Fraction(x) for x in c) for c in self.f_cols))
        object.__setattr__(self, "g_rows", tuple(tuple(Fraction(x) for x in r) for r in self.g_rows))
        if not self.h_labels:
            object.__setattr__(self, "h_labels", tuple(f"h{k}" for k in range(len(self.f_cols))))
        if not self.k_labels:
            object.__setattr__(self, "k_labels", tuple(f"k{k}" for k in range(len(self.g_rows))))

    @property
    def h_dim(self) -> int:
        return len(self.f_cols)

    @property
    def k_dim(self) -> int:
        return len(self.g_rows)

    def f(self, x: Sequence[Fraction]) -> Vector:
        out: dict[int, Fraction] = {}
        for c, col in zip(x, self.f_cols):
            if c:
                for k, v in enumerate(col):
                    if v:
                        out[k] = out.get(k, Fraction(0)) + c * v
        return _clean(out)

    def g(self, v: Mapping[int, Fraction]) -> list[Fraction]:
        return [sum((row[k] * c for k, c in v.items()), Fraction(0)) for row in self.g_rows]

    def pullback(self, lam: Sequence[Fraction]) -> Vector:
        """The functional ``lam o g`` on g, as ``index -> coefficient``."""
        out: dict[int, Fraction] = {}
        for c, row in zip(lam, self.g_rows):
            if c:
                for k, v in enumerate(row):
                    if v:
                        out[k] = out.get(k, Fraction(0)) + Fraction(c) * v
        return _clean(out)

    def composite(self) -> linalg.Matrix:
        """Matrix of ``g o f`` (rows index k, columns index h)."""
        return [
            [sum((r * c for r, c in zip(row, col)), Fraction(0)) for col in self.f_cols] for row in self.g_rows
        ]

    def check(self) -> list[str]:
        """Violations of the transit axioms (empty when valid)."""
        alg = self.algebra
        n = len(alg)
        problems = []
        for j, col in enumerate(self.f_cols):
            x = {k: v for k, v in enumerate(col) if v}
            for y in range(n):
                if alg.bracket(x, {y: Fraction(1)}):
                    problems.append(f"f({self.h_labels[j]}) is not central: bracket with {alg.generators[y].id}")
                    break
        for i in range(n):
            for j in range(i, n):
                br = alg.bracket_gens(i, j)
                if br and any(self.g(br)):
                    problems.append(f"g does not kill [{alg.generators[i].id}, {alg.generators[j].id}]")
        return problems


def canonical_transit(g: LieAlgebra) -> Transit:
    """``h_M -> g_M -> k_M``: W-type generators in, V-type generators out."""
    n = len(g)
    w = [k for k, gen in enumerate(g.generators) if gen.kind == W_TYPE]
    v = [k for k, gen in enumerate(g.generators) if gen.kind == V_TYPE]
    f_cols = [tuple(Fraction(int(k == j)) for k in range(n)) for j in w]
    g_rows = [tuple(Fraction(int(k == j)) for k in range(n)) for j in v]
    return Transit(
        g,
        tuple(f_cols),
        tuple(g_rows),
        tuple(g.generators[j].id for j in w),
        tuple(g.generators[j].id for j in v),
    )


def identity_transit(g: LieAlgebra) -> Transit:
    if not g.is_abelian:
        raise ValueError("identity transit requires an Abelian Lie algebra")
    n = len(g)
    eye = [tuple(Fraction(int(i == j)) for j in range(n)) for i in range(n)]
    labels = tuple(x.id for x in g.generators)
    return Transit(g, tuple(eye), tuple(eye), labels, labels)


def center_basis(g: LieAlgebra) -> list[Vector]:
    """Homogeneous basis of the centre: the kernel of ``x -> ([x, y])_y``."""
    n = len(g)
    groups: dict[Bidegree, list[int]] = {}
    for k, gen in enumerate(g.generators):
        groups.setdefault(gen.bidegree, []).append(k)
    basis = []
    for _, idx in sorted(groups.items()):
        rows = []
        for y in range(n):
            for t in range(n):
                rows.append([g.bracket_gens(x, y).get(t, Fraction(0)) for x in idx])
        for vec in linalg.nullspace(rows, len(idx)):
            basis.append(_clean({idx[a]: c for a, c in enumerate(vec)}))
    return basis


def derived_basis(g: LieAlgebra) -> linalg.Matrix:
    """RREF basis (dense rows) of ``[g, g]``."""
    n = len(g)
    rows = []
    for i in range(n):
        for j in range(i, n):
            br = g.bracket_gens(i, j)
            if br:
                rows.append([br.get(k, Fraction(0)) for k in range(n)])
    return linalg.rowspace(rows) if rows else []


def universal_transit(g: LieAlgebra) -> Transit:
    """The centre included into g, followed by projection to the Abelianization."""
    n = len(g)
    center = center_basis(g)
    f_cols = [tuple(vec.get(k, Fraction(0)) for k in range(n)) for vec in center]
    derived = derived_basis(g)
    pivots = [next(k for k, x in enumerate(r) if x) for r in derived]
    free = [k for k in range(n) if k not in pivots]
    # coordinates of e_j in the complement spanned by the free standard vectors
    g_rows = []
    for c in free:
        row = [Fraction(0)] * n
        row[c] = Fraction(1)
        for r, p in zip(derived, pivots):
            row[p] = -r[c]
        g_rows.append(tuple(row))

    def label(vec):
        return " + ".join(f"{_fmt(c)}*{g.generators[k].id}" for k, c in vec.items())

    return Transit(
        g,
        tuple(f_cols),
        tuple(g_rows),
        tuple(label(v) for v in center),
        tuple(g.generators[c].id for c in free),
    )


def classify_transit(t: Transit) -> frozenset[str]:
    """Labels among ``null``, ``split``, ``exact``; ``{"general"}`` if none apply.

    A transit can be both null and exact (the canonical transit of ``g_M``).
    """
    gf = t.composite()
    labels = set()
    if linalg.is_zero(gf):
        labels.add("null")
    if t.h_dim == t.k_dim and linalg.rank(gf) == t.h_dim:
        labels.add("split")
    n = len(t.algebra)
    f_mat = [[col[i] for col in t.f_cols] for i in range(n)]  # n x h
    g_mat = [list(r) for r in t.g_rows]  # k x n
    f_rank = linalg.rank(linalg.transpose(f_mat, n)) if t.h_dim else 0
    g_rank = linalg.rank(g_mat) if t.k_dim else 0
    if f_rank == t.h_dim and g_rank == t.k_dim and t.h_dim + t.k_dim == n and linalg.is_zero(gf):
        labels.add("exact")
    return frozenset(labels or {"general"})


@dataclass(frozen=True)
class Decomposition:
    split: Transit
    null: Transit
    h_iso: linalg.Matrix  # columns: basis of h_split then h_null, in h coordinates
    k_iso: linalg.Matrix  # rows: g_split coordinates then g_null coordinates, in k coordinates
    clean: bool
    recomposes: bool


def decompose_transit(t: Transit) -> Decomposition:
    """Split ``t`` as a clean product of a split transit and a null transit."""
    gf = t.composite()  # k x h
    h, k = t.h_dim, t.k_dim
    ker = linalg.nullspace(gf, h) if h else []
    comp_h = linalg.complement(ker, h) if h else []
    image = linalg.rowspace(linalg.transpose(gf, h)) if k and h else []  # rows in k coords
    comp_k = linalg.complement(image, k) if k else []

    # projections of k onto image and complement: solve k-vector in basis image + comp_k
    basis_k = image + comp_k
    proj = linalg.inverse(linalg.transpose(basis_k)) if k else []  # rows: coordinates
    p_img, p_comp = proj[: len(image)], proj[len(image):]

    def compose_rows(prows):
        return tuple(
            tuple(sum((pr[r] * t.g_rows[r][c] for r in range(k)), Fraction(0)) for c in range(len(t.algebra)))
            for pr in prows
        )

    def compose_cols(hvecs):
        return tuple(tuple(t.f(v).get(i, Fraction(0)) for i in range(len(t.algebra))) for v in hvecs)

    split = Transit(t.algebra, compose_cols(comp_h), compose_rows(p_img))
    null = Transit(t.algebra, compose_cols(ker), compose_rows(p_comp))
    clean = linalg.is_zero(_gf(null.g_rows, split.f_cols)) and linalg.is_zero(_gf(split.g_rows, null.f_cols))
    h_iso = linalg.transpose(comp_h + ker, h) if h else []
    k_iso = [list(r) for r in proj]
    # recomposition: f restricted along h_iso equals the product f, and k_iso . g equals the product g
    recomposes = (
        [list(c) for c in compose_cols(comp_h + ker)] == [list(c) for c in split.f_cols + null.f_cols]
        and [list(r) for r in split.g_rows + null.g_rows]
        == [list(r) for r in compose_rows(proj)]
        and linalg.rank(h_iso) == h
        and (not k or linalg.rank(k_iso) == k)
    )
    ok_split = split.h_dim == 0 or "split" in classify_transit(split)
    ok_null = "null" in classify_transit(null)
    return Decomposition(split, null, h_iso, k_iso, clean, recomposes and ok_split and ok_null)


def _gf(g_rows, f_cols):
    return [[sum((r * c for r, c in zip(row, col)), Fraction(0)) for col in f_cols] for row in g_rows]
