"""Finite cohomological data of an even-dimensional manifold.

A :class:`ManifoldDatum` records bases of compactly supported cohomology with
untwisted and orientation-twisted coefficients, plus the twisted cup product
``H_c(M;Q^w) x H_c(M;Q^w) -> H_c(M;Q)``.  That is everything the Lie algebra
of :mod:`confh.lie` needs.
"""

from __future__ import annotations

import json
import re
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from types import MappingProxyType
from typing import Mapping

MIRROR_SUFFIX = "_w"

Combination = Mapping[str, Fraction]


class ManifestError(ValueError):
    """Base class for manifest and datum problems; ``field`` names the culprit."""

    def __init__(self, message: str, field: str = ""):
        super().__init__(f"{field}: {message}" if field else message)
        self.field = field


class SchemaError(ManifestError):
    pass


class DimensionError(ManifestError):
    pass


class DegreeRangeError(ManifestError):
    pass


class CommutativityError(ManifestError):
    pass


class DualityError(ManifestError):
    pass


class ProductError(ManifestError):
    pass


@dataclass(frozen=True)
class CohomClass:
    id: str
    degree: int
    twisted: bool = False


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str = ""


@dataclass(frozen=True)
class ValidationReport:
    checks: tuple[Check, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list[Check]:
        return [c for c in self.checks if not c.passed]

    def __str__(self) -> str:
        return "\n".join(
            f"{c.name}: {'pass' if c.passed else 'FAIL'}" + (f" ({c.detail})" if c.detail else "")
            for c in self.checks
        )


@dataclass(frozen=True)
class ManifoldDatum:
    """Compactly supported cohomology of M with the twisted cup product.

    ``products`` maps ordered pairs of twisted ids to a combination of
    untwisted ids.  Missing pairs multiply to zero.  Construction does not
    validate; use :func:`validate` or the builders in this module.
    """

    name: str
    d: int
    orientable: bool
    untwisted: tuple[CohomClass, ...]
    twisted: tuple[CohomClass, ...]
    products: Mapping[tuple[str, str], Combination] = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for key, comb in self.products.items():
            comb = {k: Fraction(v) for k, v in comb.items() if Fraction(v) != 0}
            if comb:
                clean[tuple(key)] = MappingProxyType(dict(sorted(comb.items())))
        object.__setattr__(self, "untwisted", tuple(self.untwisted))
        object.__setattr__(self, "twisted", tuple(self.twisted))
        object.__setattr__(self, "products", MappingProxyType(dict(sorted(clean.items()))))

    def __eq__(self, other):
        if not isinstance(other, ManifoldDatum):
            return NotImplemented
        return (
            self.name == other.name
            and self.d == other.d
            and self.orientable == other.orientable
            and self.untwisted == other.untwisted
            and self.twisted == other.twisted
            and _plain(self.products) == _plain(other.products)
        )

    def __hash__(self):
        return hash((self.name, self.d, self.untwisted, self.twisted))

    def __reduce__(self):
        return (ManifoldDatum, (self.name, self.d, self.orientable, self.untwisted, self.twisted,
                                _plain(self.products)))

    def untwisted_counts(self) -> dict[int, int]:
        return dict(sorted(Counter(c.degree for c in self.untwisted).items()))

    def twisted_counts(self) -> dict[int, int]:
        return dict(sorted(Counter(c.degree for c in self.twisted).items()))

    def untwisted_class(self, cid: str) -> CohomClass:
        for c in self.untwisted:
            if c.id == cid:
                return c
        raise KeyError(cid)

    def twisted_class(self, cid: str) -> CohomClass:
        for c in self.twisted:
            if c.id == cid:
                return c
        raise KeyError(cid)

    def product(self, a: str, b: str) -> Combination:
        return self.products.get((a, b), MappingProxyType({}))

    def dim_untwisted(self, degree: int) -> int:
        return sum(1 for c in self.untwisted if c.degree == degree)

    def dim_twisted(self, degree: int) -> int:
        return sum(1 for c in self.twisted if c.degree == degree)

    def summary(self) -> str:
        def fmt(counts):
            return " ".join(f"{k}:{v}" for k, v in counts.items()) or "-"

        return (
            f"{self.name}  d={self.d}  orientable={'yes' if self.orientable else 'no'}  "
            f"H_c(Q)=[{fmt(self.untwisted_counts())}]  H_c(Q^w)=[{fmt(self.twisted_counts())}]"
        )


def _plain(products):
    return {k: dict(v) for k, v in products.items()}


# ---------------------------------------------------------------- validation


def validate(m: ManifoldDatum) -> ValidationReport:
    checks: list[Check] = []
    d = m.d

    ok = isinstance(d, int) and d >= 2 and d % 2 == 0
    checks.append(Check("dimension_even", ok, "" if ok else f"dimension must be even and >= 2, got {d}"))

    bad = [c.id for c in (*m.untwisted, *m.twisted) if not 0 <= c.degree <= d]
    checks.append(Check("degree_range", not bad, f"out of [0, {d}]: {', '.join(bad)}" if bad else ""))

    dup = [
        k for group in (m.untwisted, m.twisted) for k, v in Counter(c.id for c in group).items() if v > 1
    ]
    checks.append(Check("unique_ids", not dup, f"duplicated: {', '.join(dup)}" if dup else ""))

    tw = {c.id: c.degree for c in m.twisted}
    un = {c.id: c.degree for c in m.untwisted}
    problems = []
    for (a, b), comb in m.products.items():
        if a not in tw or b not in tw:
            problems.append(f"({a},{b}) uses a non-twisted id")
            continue
        for cid in comb:
            if cid not in un:
                problems.append(f"({a},{b}) -> unknown untwisted id {cid}")
            elif un[cid] != tw[a] + tw[b]:
                problems.append(f"({a},{b}) -> {cid} has degree {un[cid]}, expected {tw[a] + tw[b]}")
    checks.append(Check("product_targets", not problems, "; ".join(problems)))

    problems = []
    for (a, b), comb in m.products.items():
        if a not in tw or b not in tw:
            continue
        sign = -1 if (tw[a] * tw[b]) % 2 else 1
        other = m.product(b, a)
        if {k: sign * v for k, v in comb.items()} != dict(other):
            problems.append(f"mu({b},{a}) != (-1)^(|{a}||{b}|) mu({a},{b})")
    checks.append(Check("graded_commutative", not problems, "; ".join(problems)))

    if m.orientable:
        ok = m.untwisted_counts() == m.twisted_counts()
        checks.append(
            Check("orientable_mirror", ok, "" if ok else "twisted and untwisted degree counts differ")
        )

    # Poincare duality: H_c^i(M;Q) = H_{d-i}(M;Q^w) and H_c^i(M;Q^w) = H_{d-i}(M;Q).
    # Only its consequences visible in compactly supported data are checked:
    # equal Euler characteristics, and (compact components) <= (components).
    problems = []
    chi_u = sum((-1) ** c.degree for c in m.untwisted)
    chi_w = sum((-1) ** c.degree for c in m.twisted)
    if chi_u != chi_w:
        problems.append(f"Euler characteristics differ: {chi_u} (Q) vs {chi_w} (Q^w)")
    if m.dim_untwisted(0) > m.dim_twisted(d):
        problems.append(
            f"dim H_c^0(Q)={m.dim_untwisted(0)} exceeds dim H_c^{d}(Q^w)={m.dim_twisted(d)} (= dim H_0)"
        )
    if m.dim_twisted(0) > m.dim_untwisted(d):
        problems.append(
            f"dim H_c^0(Q^w)={m.dim_twisted(0)} exceeds dim H_c^{d}(Q)={m.dim_untwisted(d)}"
        )
    checks.append(Check("duality", not problems, "; ".join(problems)))
    return ValidationReport(tuple(checks))


_CHECK_ERRORS = {
    "dimension_even": (DimensionError, "dimension"),
    "degree_range": (DegreeRangeError, "degree"),
    "unique_ids": (SchemaError, "id"),
    "product_targets": (ProductError, "products"),
    "graded_commutative": (CommutativityError, "products"),
    "orientable_mirror": (DualityError, "twisted"),
    "duality": (DualityError, "twisted"),
}


def ensure_valid(m: ManifoldDatum) -> ManifoldDatum:
    for c in validate(m).checks:
        if not c.passed:
            cls, fld = _CHECK_ERRORS[c.name]
            raise cls(c.detail, fld)
    return m


# ---------------------------------------------------------------- manifests

_TOP_KEYS = {"name", "dimension", "orientable", "untwisted", "twisted", "products"}
_RATIONAL = re.compile(r"^\s*[-+]?\d+(\s*/\s*\d+)?\s*$")


def _parse_rational(s, where: str) -> Fraction:
    if isinstance(s, bool) or not isinstance(s, (str, int)):
        raise SchemaError("coefficient must be a string 'p/q'", where)
    if isinstance(s, str) and not _RATIONAL.match(s):
        raise SchemaError(f"malformed rational {s!r}", where)
    q = Fraction(s.replace(" ", "") if isinstance(s, str) else s)
    return q


def _parse_classes(raw, where: str, twisted: bool) -> list[CohomClass]:
    if not isinstance(raw, list):
        raise SchemaError("must be an array", where)
    out = []
    for k, entry in enumerate(raw):
        loc = f"{where}[{k}]"
        if not isinstance(entry, dict) or set(entry) != {"id", "degree"}:
            raise SchemaError("expected exactly the keys 'id' and 'degree'", loc)
        if not isinstance(entry["id"], str) or not entry["id"]:
            raise SchemaError("id must be a non-empty string", loc)
        if isinstance(entry["degree"], bool) or not isinstance(entry["degree"], int):
            raise SchemaError("degree must be an integer", loc)
        out.append(CohomClass(entry["id"], entry["degree"], twisted))
    return out


def load_manifest(text: str) -> ManifoldDatum:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise SchemaError("manifest must be a JSON object")
    unknown = set(raw) - _TOP_KEYS
    if unknown:
        raise SchemaError(f"unknown fields {sorted(unknown)}", sorted(unknown)[0])
    for key in ("name", "dimension", "orientable", "untwisted", "products"):
        if key not in raw:
            raise SchemaError("missing required field", key)
    if not isinstance(raw["name"], str):
        raise SchemaError("must be a string", "name")
    d = raw["dimension"]
    if isinstance(d, bool) or not isinstance(d, int):
        raise SchemaError("must be an integer", "dimension")
    if d < 2 or d % 2:
        raise DimensionError("dimension must be even", "dimension")
    if not isinstance(raw["orientable"], bool):
        raise SchemaError("must be a boolean", "orientable")
    orientable = raw["orientable"]

    untwisted = _parse_classes(raw["untwisted"], "untwisted", False)
    mirrored = "twisted" not in raw
    if mirrored:
        if not orientable:
            raise SchemaError("required when orientable is false", "twisted")
        twisted = [CohomClass(c.id + MIRROR_SUFFIX, c.degree, True) for c in untwisted]
    else:
        twisted = _parse_classes(raw["twisted"], "twisted", True)
    for c in (*untwisted, *twisted):
        if not 0 <= c.degree <= d:
            where = "twisted" if c.twisted else "untwisted"
            raise DegreeRangeError(f"degree {c.degree} of {c.id!r} outside [0, {d}]", where)

    tw_ids = {c.id: c.degree for c in twisted}
    un_ids = {c.id for c in untwisted}

    def resolve_twisted(cid, loc):
        if cid in tw_ids:
            return cid
        if mirrored and cid + MIRROR_SUFFIX in tw_ids:
            return cid + MIRROR_SUFFIX
        raise SchemaError(f"unknown twisted id {cid!r}", loc)

    if not isinstance(raw["products"], list):
        raise SchemaError("must be an array", "products")
    products: dict[tuple[str, str], dict[str, Fraction]] = {}
    for k, entry in enumerate(raw["products"]):
        loc = f"products[{k}]"
        if not isinstance(entry, dict) or set(entry) != {"left", "right", "result"}:
            raise SchemaError("expected exactly the keys 'left', 'right', 'result'", loc)
        a = resolve_twisted(entry["left"], loc + ".left")
        b = resolve_twisted(entry["right"], loc + ".right")
        if not isinstance(entry["result"], list):
            raise SchemaError("must be an array", loc + ".result")
        comb: dict[str, Fraction] = {}
        for j, term in enumerate(entry["result"]):
            tloc = f"{loc}.result[{j}]"
            if not isinstance(term, dict) or set(term) != {"coef", "id"}:
                raise SchemaError("expected exactly the keys 'coef' and 'id'", tloc)
            if term["id"] not in un_ids:
                raise SchemaError(f"unknown untwisted id {term['id']!r}", tloc)
            comb[term["id"]] = comb.get(term["id"], Fraction(0)) + _parse_rational(term["coef"], tloc + ".coef")
        sign = -1 if (tw_ids[a] * tw_ids[b]) % 2 else 1
        flipped = {cid: sign * v for cid, v in comb.items()}
        for key, value in (((a, b), comb), ((b, a), flipped)):
            if key in products and {k: v for k, v in products[key].items() if v} != {
                k: v for k, v in value.items() if v
            }:
                raise CommutativityError(
                    f"product ({key[0]},{key[1]}) is not graded-commutative with its listed partner", loc
                )
            products[key] = value
        if a == b and sign == -1 and any(comb.values()):
            raise CommutativityError(f"odd class {a!r} must square to zero", loc)

    m = ManifoldDatum(raw["name"], d, orientable, tuple(untwisted), tuple(twisted), products)
    return ensure_valid(m)


def to_manifest(m: ManifoldDatum) -> str:
    """Serialize to the manifest format, listing each unordered product pair once."""
    order = {c.id: k for k, c in enumerate(m.twisted)}
    seen = set()
    prods = []
    for (a, b), comb in m.products.items():
        key = tuple(sorted((a, b), key=lambda x: order.get(x, 0)))
        if key in seen:
            continue
        seen.add(key)
        a, b = key
        comb = m.product(a, b)
        prods.append(
            {
                "left": a,
                "right": b,
                "result": [{"coef": _fmt_q(v), "id": cid} for cid, v in comb.items()],
            }
        )
    prods.sort(key=lambda p: (order[p["left"]], order[p["right"]]))
    doc = {
        "name": m.name,
        "dimension": m.d,
        "orientable": m.orientable,
        "untwisted": [{"id": c.id, "degree": c.degree} for c in m.untwisted],
        "twisted": [{"id": c.id, "degree": c.degree} for c in m.twisted],
        "products": prods,
    }
    return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"


def _fmt_q(q: Fraction) -> str:
    return f"{q.numerator}/{q.denominator}"


# ---------------------------------------------------------------- builders


def _oriented(name: str, d: int, classes: list[tuple[str, int]], cup: dict) -> ManifoldDatum:
    """Orientable datum from untwisted classes and their (untwisted) cup product."""
    un = tuple(CohomClass(cid, deg, False) for cid, deg in classes)
    tw = tuple(CohomClass(cid + MIRROR_SUFFIX, deg, True) for cid, deg in classes)
    degs = dict(classes)
    products = {}
    for (a, b), comb in cup.items():
        sign = -1 if (degs[a] * degs[b]) % 2 else 1
        products[(a + MIRROR_SUFFIX, b + MIRROR_SUFFIX)] = dict(comb)
        products[(b + MIRROR_SUFFIX, a + MIRROR_SUFFIX)] = {k: sign * Fraction(v) for k, v in comb.items()}
    return ensure_valid(ManifoldDatum(name, d, True, un, tw, products))


def _unit_products(classes, unit="1"):
    return {(unit, cid): {cid: 1} for cid, _ in classes}


def euclidean(d: int) -> ManifoldDatum:
    if d < 2 or d % 2:
        raise DimensionError("dimension must be even", "dimension")
    return _oriented(f"euclidean({d})", d, [("u", d)], {})


def sphere(d: int) -> ManifoldDatum:
    if d < 2 or d % 2:
        raise DimensionError("dimension must be even", "dimension")
    classes = [("1", 0), ("omega", d)]
    return _oriented(f"sphere({d})", d, classes, _unit_products(classes))


def _surface_classes(g: int) -> list[tuple[str, int]]:
    out = []
    for i in range(1, g + 1):
        out += [(f"a{i}", 1), (f"b{i}", 1)]
    return out


def surface(g: int, name: str | None = None) -> ManifoldDatum:
    if g < 0:
        raise ValueError("genus must be non-negative")
    classes = [("1", 0), *_surface_classes(g), ("top", 2)]
    cup = _unit_products(classes)
    for i in range(1, g + 1):
        cup[(f"a{i}", f"b{i}")] = {"top": 1}
    return _oriented(name or f"surface({g})", 2, classes, cup)


def open_surface(g: int) -> ManifoldDatum:
    """Genus-g surface minus one point.

    ``H_c^1`` has rank 2g with the nondegenerate intersection pairing into
    ``H_c^2``; there is no degree-0 class.
    """
    if g < 0:
        raise ValueError("genus must be non-negative")
    classes = [*_surface_classes(g), ("top", 2)]
    cup = {(f"a{i}", f"b{i}"): {"top": 1} for i in range(1, g + 1)}
    return _oriented(f"open_surface({g})", 2, classes, cup)


def torus_2d() -> ManifoldDatum:
    return surface(1, name="torus_2d")


def cpn(k: int) -> ManifoldDatum:
    if k < 1:
        raise ValueError("cpn needs k >= 1")
    ids = ["1"] + ["h" if j == 1 else f"h{j}" for j in range(1, k + 1)]
    classes = [(ids[j], 2 * j) for j in range(k + 1)]
    cup = {}
    for a in range(k + 1):
        for b in range(a, k + 1):
            if a + b <= k:
                cup[(ids[a], ids[b])] = {ids[a + b]: 1}
    return _oriented(f"cpn({k})", 2 * k, classes, cup)


def klein_bottle() -> ManifoldDatum:
    un = (CohomClass("1", 0, False), CohomClass("a", 1, False))
    tw = (CohomClass("a_w", 1, True), CohomClass("top_w", 2, True))
    # twisted classes multiply into untwisted degree >= 2, which is zero
    return ensure_valid(ManifoldDatum("klein_bottle", 2, False, un, tw, {}))


def empty(d: int) -> ManifoldDatum:
    return ManifoldDatum("empty", d, True, (), (), {})


BUILTINS = {
    "euclidean": (euclidean, "d", 2),
    "sphere": (sphere, "d", 2),
    "surface": (surface, "g", 2),
    "open_surface": (open_surface, "g", 2),
    "torus_2d": (torus_2d, None, None),
    "cpn": (cpn, "k", 3),
    "klein_bottle": (klein_bottle, None, None),
}


def builtin(name: str, param: int | None = None) -> ManifoldDatum:
    """Look up a library manifold, e.g. ``builtin("surface", 2)``.

    ``name`` may also carry the parameter inline: ``"surface:2"`` or ``"surface(2)"``.
    """
    m = re.fullmatch(r"\s*([a-z_0-9]+?)\s*(?:[:(]\s*(-?\d+)\s*\)?)?\s*", name)
    if not m:
        raise KeyError(f"unknown manifold {name!r}")
    key, inline = m.group(1), m.group(2)
    if key not in BUILTINS:
        raise KeyError(f"unknown manifold {key!r}; choose from {', '.join(BUILTINS)}")
    fn, pname, default = BUILTINS[key]
    if inline is not None:
        if param is not None and int(inline) != param:
            raise ValueError("conflicting parameters")
        param = int(inline)
    if pname is None:
        if param is not None:
            raise ValueError(f"{key} takes no parameter")
        return fn()
    return fn(default if param is None else param)


def library() -> list[ManifoldDatum]:
    """One representative of each builtin family, in a fixed order."""
    return [builtin(k) for k in BUILTINS]


# ---------------------------------------------------------------- constructions


def _relabel(m: ManifoldDatum, prefix: str) -> ManifoldDatum:
    ren = {c.id: prefix + c.id for c in (*m.untwisted, *m.twisted)}
    return ManifoldDatum(
        m.name,
        m.d,
        m.orientable,
        tuple(CohomClass(ren[c.id], c.degree, c.twisted) for c in m.untwisted),
        tuple(CohomClass(ren[c.id], c.degree, c.twisted) for c in m.twisted),
        {(ren[a], ren[b]): {ren[k]: v for k, v in comb.items()} for (a, b), comb in m.products.items()},
    )


def disjoint_union(a: ManifoldDatum, b: ManifoldDatum) -> ManifoldDatum:
    if a.d != b.d:
        raise DimensionError(f"dimension mismatch: {a.d} vs {b.d}", "dimension")
    if not (b.untwisted or b.twisted):
        return a
    if not (a.untwisted or a.twisted):
        return b
    ids_a = {c.id for c in (*a.untwisted, *a.twisted)}
    ids_b = {c.id for c in (*b.untwisted, *b.twisted)}
    if ids_a & ids_b:
        a, b = _relabel(a, "L."), _relabel(b, "R.")
    return ManifoldDatum(
        f"{a.name}+{b.name}",
        a.d,
        a.orientable and b.orientable,
        a.untwisted + b.untwisted,
        a.twisted + b.twisted,
        {**a.products, **b.products},
    )


def thicken(a: ManifoldDatum, k: int) -> ManifoldDatum:
    """Model ``M x R^k``: degrees shift up by ``k``.

    For ``k > 0`` all products vanish, since the generator of ``H_c^k(R^k)``
    squares to zero.
    """
    if k < 0 or k % 2:
        raise DimensionError("thickening must be by an even k >= 0", "k")
    if k == 0:
        return a

    def shift(cs):
        return tuple(CohomClass(c.id, c.degree + k, c.twisted) for c in cs)

    return ManifoldDatum(f"{a.name}xR^{k}", a.d + k, a.orientable, shift(a.untwisted), shift(a.twisted), {})
