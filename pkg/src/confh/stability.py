"""Quasi-polynomial detection on Betti sequences and the stability checks built on it.

Fitting is exact: per residue class the polynomial through the last
``D + 1`` points is extended backwards for as long as it keeps agreeing with
the data.  A class counts as fitted only when at least ``D + 2`` trailing
points agree, so every fit is over-determined by at least one value.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd
from typing import Mapping, Sequence

from .bigraded import GradedDims, IncompleteData
from .ce import nu
from .manifold import ManifoldDatum
from .sparse import fmt_q


class HypothesisError(ValueError):
    """A theorem's hypothesis fails for the given manifold or parameters."""


# ---------------------------------------------------------------- polynomials


def _interpolate(xs: Sequence[int], ys: Sequence[Fraction]) -> list[Fraction]:
    """Coefficients (ascending) of the polynomial through the points, via Newton's form."""
    n = len(xs)
    coef = [Fraction(y) for y in ys]
    for j in range(1, n):
        for k in range(n - 1, j - 1, -1):
            coef[k] = (coef[k] - coef[k - 1]) / (xs[k] - xs[k - j])
    poly = [Fraction(0)] * n
    for k in range(n - 1, -1, -1):
        # poly = poly * (x - xs[k]) + coef[k]
        new = [Fraction(0)] * n
        for e, c in enumerate(poly):
            if c:
                if e + 1 < n:
                    new[e + 1] += c
                new[e] -= c * xs[k]
        new[0] += coef[k]
        poly = new
    return _trim(poly)


def _trim(poly: Sequence[Fraction]) -> list[Fraction]:
    out = list(poly)
    while out and not out[-1]:
        out.pop()
    return out


def _evaluate(poly: Sequence[Fraction], n: int) -> Fraction:
    acc = Fraction(0)
    for c in reversed(poly):
        acc = acc * n + c
    return acc


def format_polynomial(poly: Sequence[Fraction], var: str = "n") -> str:
    """``(n^3+n^2-9n-9)/16`` style: integer numerator over a common denominator."""
    poly = _trim(poly)
    if not poly:
        return "0"
    den = 1
    for c in poly:
        den = den * c.denominator // gcd(den, c.denominator)
    nums = [int(c * den) for c in poly]
    terms = []
    for e in range(len(nums) - 1, -1, -1):
        c = nums[e]
        if not c:
            continue
        mag = abs(c)
        if e == 0:
            body = str(mag)
        else:
            mono = var if e == 1 else f"{var}^{e}"
            body = mono if mag == 1 else f"{mag}{mono}"
        sign = "-" if c < 0 else "+"
        terms.append((sign, body))
    text = ("-" if terms[0][0] == "-" else "") + terms[0][1]
    for sign, body in terms[1:]:
        text += sign + body
    if den == 1:
        return text
    if len(terms) > 1:
        text = f"({text})"
    return f"{text}/{den}"


@dataclass(frozen=True)
class QuasiPolynomial:
    period: int
    coefficients: tuple[tuple[Fraction, ...], ...]  # one ascending coefficient list per residue

    def __post_init__(self):
        if self.period < 1 or len(self.coefficients) != self.period:
            raise ValueError("need exactly one polynomial per residue class")
        object.__setattr__(self, "coefficients",
                           tuple(tuple(_trim([Fraction(c) for c in p])) for p in self.coefficients))

    def __call__(self, n: int) -> Fraction:
        return _evaluate(self.coefficients[n % self.period], n)

    @property
    def degree(self) -> int:
        """Largest degree over the residue classes; -1 for the zero quasi-polynomial."""
        return max(len(p) for p in self.coefficients) - 1

    def class_degree(self, r: int) -> int:
        return len(self.coefficients[r % self.period]) - 1

    @property
    def is_zero(self) -> bool:
        return self.degree < 0

    def minimal(self) -> "QuasiPolynomial":
        for p in range(1, self.period + 1):
            if self.period % p:
                continue
            if all(self.coefficients[r] == self.coefficients[r % p] for r in range(self.period)):
                return QuasiPolynomial(p, self.coefficients[:p])
        return self

    def __eq__(self, other) -> bool:
        if not isinstance(other, QuasiPolynomial):
            return NotImplemented
        a, b = self.minimal(), other.minimal()
        return a.period == b.period and a.coefficients == b.coefficients

    def __hash__(self):
        m = self.minimal()
        return hash((m.period, m.coefficients))

    def format(self) -> str:
        if self.period == 1:
            return format_polynomial(self.coefficients[0])
        return "; ".join(f"n = {r} mod {self.period}: {format_polynomial(p)}"
                         for r, p in enumerate(self.coefficients))

    def __str__(self) -> str:
        return self.format()


# ---------------------------------------------------------------- fitting


@dataclass(frozen=True)
class FitResult:
    qp: QuasiPolynomial
    onset: int
    degree: int
    evidence: tuple[int, ...]  # confirming points per residue class of the requested period

    ok = True
    status = "fit"


@dataclass(frozen=True)
class FitFailure:
    status: str  # "no fit" | "insufficient data"
    detail: str = ""

    ok = False


NO_FIT = "no fit"
INSUFFICIENT = "insufficient data"


def fit_quasipolynomial(seq: Sequence[int] | Mapping[int, int], period: int, max_degree: int,
                        start: int = 0) -> FitResult | FitFailure:
    """Fit ``seq`` by a quasi-polynomial of the given period and degree bound.

    ``seq`` is either a list of values at ``start, start+1, ...`` or an
    ``n -> value`` map; gaps are allowed (e.g. only odd ``n``).  Every residue
    class needs at least ``max_degree + 2`` points, otherwise the outcome is
    "insufficient data".
    """
    if period < 1 or max_degree < 0:
        raise ValueError("period must be >= 1 and max_degree >= 0")
    if isinstance(seq, Mapping):
        points = {int(n): Fraction(v) for n, v in seq.items()}
    else:
        points = {start + k: Fraction(v) for k, v in enumerate(seq)}
    classes = {r: sorted(n for n in points if n % period == r) for r in range(period)}
    need = max_degree + 2
    short = [r for r, ns in classes.items() if len(ns) < need]
    if short:
        have = min(len(classes[r]) for r in short)
        return FitFailure(INSUFFICIENT, f"residue {short[0]} mod {period} has {have} values, need {need}")
    polys = []
    evidence = []
    onset = min(points)
    for r in range(period):
        ns = classes[r]
        ys = [points[n] for n in ns]
        k = max_degree + 1
        poly = _interpolate(ns[-k:], ys[-k:])
        agree = k
        while agree < len(ns) and _evaluate(poly, ns[-agree - 1]) == ys[-agree - 1]:
            agree += 1
        if agree < need:
            return FitFailure(NO_FIT, f"residue {r} mod {period}: only {agree} trailing points agree")
        polys.append(tuple(poly))
        evidence.append(agree)
        if agree < len(ns):
            onset = max(onset, ns[-agree - 1] + 1)
    qp = QuasiPolynomial(period, tuple(polys)).minimal()
    return FitResult(qp, onset, qp.degree, tuple(evidence))


# ---------------------------------------------------------------- verification


@dataclass
class VerificationReport:
    theorem: str
    parameters: dict[str, str]
    sequence: dict[int, int]
    period_bound: int
    degree_bound: int
    fit: FitResult | FitFailure
    notes: list[str] = field(default_factory=list)
    comparisons: list[tuple[int, int, int]] = field(default_factory=list)  # n, reference, computed

    @property
    def status(self) -> str:
        if isinstance(self.fit, FitFailure):
            return "insufficient data" if self.fit.status == INSUFFICIENT else "fail"
        return "pass" if self.degree_ok and self.period_ok else "fail"

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    @property
    def degree_ok(self) -> bool:
        if not isinstance(self.fit, FitResult):
            return False
        if self.degree_bound < 0:
            return self.fit.qp.is_zero
        return self.fit.degree <= self.degree_bound

    @property
    def period_ok(self) -> bool:
        return isinstance(self.fit, FitResult) and self.period_bound % self.fit.qp.period == 0

    def format(self) -> str:
        lines = [f"theorem: {self.theorem}"]
        for k, v in self.parameters.items():
            lines.append(f"{k}: {v}")
        if self.sequence:
            lines.append(f"data range: n = {min(self.sequence)}..{max(self.sequence)}")
        lines.append("sequence: " + " ".join(str(self.sequence[n]) for n in sorted(self.sequence)))
        lines.append(f"period bound: {self.period_bound}")
        lines.append(f"degree bound: {self.degree_bound}"
                     + (" (eventual vanishing)" if self.degree_bound < 0 else ""))
        if isinstance(self.fit, FitResult):
            lines.append(f"fit: {self.fit.qp.format()}")
            lines.append(f"fitted period: {self.fit.qp.period}")
            lines.append(f"fitted degree: {self.fit.degree}")
            lines.append(f"onset: {self.fit.onset}")
            lines.append("evidence: " + " ".join(map(str, self.fit.evidence)))
            lines.append(f"degree check: {'pass' if self.degree_ok else 'fail'}")
            lines.append(f"period check: {'pass' if self.period_ok else 'fail'}")
        else:
            lines.append(f"fit: {self.fit.status}" + (f" ({self.fit.detail})" if self.fit.detail else ""))
        for n, ref, got in self.comparisons:
            verdict = "agrees" if ref == got else "differs"
            lines.append(f"reference n={n}: expected {fmt_q(ref)}, computed {got}, {verdict}")
        for note in self.notes:
            lines.append(f"note: {note}")
        lines.append(f"status: {self.status}")
        return "\n".join(lines)

    def csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "dim", "fitted"])
        for n in sorted(self.sequence):
            if isinstance(self.fit, FitResult) and n >= self.fit.onset:
                fitted = fmt_q(self.fit.qp(n))
            else:
                fitted = ""
            w.writerow([n, self.sequence[n], fitted])
        return buf.getvalue()


def _sequence(table: GradedDims, degree_of) -> dict[int, int]:
    out = {}
    for n in range(table.complete_through + 1):
        i = degree_of(n)
        out[n] = table[n, i] if i >= 0 else 0
    return out


def _fit_with_bound(seq: dict[int, int], period: int, bound: int):
    """Fit with degree bound ``bound``; a negative bound means eventual vanishing."""
    return fit_quasipolynomial(seq, period, max(bound, 0))


def verify_extremal_stability(m: ManifoldDatum, table: GradedDims, i: int,
                              reference: Mapping[int, Fraction] | None = None) -> VerificationReport:
    """Codimension-``i`` extremal stability: ``n -> dim H_{nu_n - i}(B_n(M))``."""
    if i < 0:
        raise HypothesisError("codimension must be non-negative")
    d = m.d
    seq = _sequence(table, lambda n: nu(n, d) - i)
    bound = m.dim_untwisted(1) - 1
    rep = VerificationReport(
        "extremal stability",
        {"manifold": m.name, "codimension": str(i), "slope": str(d - 1),
         "ray": f"(n, n({d - 1})+1-{i})"},
        seq, 2, bound, _fit_with_bound(seq, 2, bound))
    if reference:
        rep.comparisons = [(n, reference[n], seq[n]) for n in sorted(reference) if n in seq]
    return rep


def verify_homological_stability(m: ManifoldDatum, table: GradedDims, i: int) -> VerificationReport:
    """Fixed degree ``i``: ``n -> dim H_i(B_n(M))``, degree bound = components - 1."""
    if i < 0:
        raise HypothesisError("degree must be non-negative")
    seq = _sequence(table, lambda n: i)
    bound = m.dim_twisted(m.d) - 1
    return VerificationReport(
        "homological stability",
        {"manifold": m.name, "degree": str(i), "slope": "0"},
        seq, 1, bound, _fit_with_bound(seq, 1, bound))


def vanishing_hypotheses(m: ManifoldDatum, r: int) -> None:
    if r < 3:
        raise HypothesisError("r ≥ 3 required")
    if not m.orientable:
        raise HypothesisError("manifold must be orientable")
    for s in range(1, r):
        if m.dim_untwisted(s) != 0:
            raise HypothesisError(f"hypothesis fails at s={s}: H_c^{s}(M;Q) is nonzero")


def verify_vanishing_stability(m: ManifoldDatum, table: GradedDims, r: int, i: int) -> VerificationReport:
    """``n -> dim H_{i + n(d-1-floor(r/2))}(B_n(M))`` when ``H_c^s(M;Q) = 0`` for ``0 < s < r``."""
    vanishing_hypotheses(m, r)
    step = m.d - 1 - r // 2
    seq = _sequence(table, lambda n: i + n * step)
    bound = (m.dim_untwisted(r) if r % 2 else m.dim_untwisted(r + 1)) - 1
    return VerificationReport(
        "vanishing-range stability",
        {"manifold": m.name, "r": str(r), "offset": str(i), "slope": str(step)},
        seq, 2, bound, _fit_with_bound(seq, 2, bound))


# ---------------------------------------------------------------- freeness and exploration


@dataclass
class FreenessReport:
    manifold: str
    n_max: int
    classes: list[str]
    checks: list[tuple[str, int, int, int, int]]  # class, n, i, source dim, rank

    @property
    def failures(self):
        return [c for c in self.checks if c[3] != c[4]]

    @property
    def passed(self) -> bool:
        return not self.failures

    @property
    def status(self) -> str:
        return "pass" if self.passed else "fail"

    def format(self) -> str:
        lines = ["theorem: freeness", f"manifold: {self.manifold}", f"n_max: {self.n_max}",
                 "classes: " + (" ".join(self.classes) if self.classes else "(none)"),
                 f"blocks checked: {len(self.checks)}",
                 f"nonzero blocks: {sum(1 for c in self.checks if c[3])}"]
        for a, n, i, dim, rank in self.failures:
            lines.append(f"not injective: class {a} at ({n},{i}): rank {rank} < {dim}")
        lines.append(f"status: {self.status}")
        return "\n".join(lines)


def freeness_probe(m: ManifoldDatum, n_max: int) -> FreenessReport:
    """Injectivity of every extremal stabilization map with source weight ``n <= n_max - 2``."""
    from .ce import CEData, enumerate_basis
    from .lie import build_lie_algebra
    from .operators import degree_one_classes, extremal_stabilization

    if m.dim_twisted(0) != 0:
        raise HypothesisError("H_c^0(M;Q^w) must vanish (M has a compact component)")
    g = build_lie_algebra(m)
    data = CEData(g)
    classes = degree_one_classes(g)
    cache: dict = {}
    checks = []
    for a in classes:
        for n in range(0, n_max - 1):
            for i in sorted(enumerate_basis(data, n).by_degree):
                h = extremal_stabilization(g, a, n, i, cache, data)
                checks.append((a, n, i, h.source.dim, h.rank))
    return FreenessReport(m.name, n_max, classes, checks)


@dataclass
class ProbeReport:
    manifold: str
    offset: int
    sequence: dict[int, int]
    fits: dict[int, FitResult | FitFailure]

    def format(self) -> str:
        lines = ["question probe: n -> dim H_{n(d-2)+i}", f"manifold: {self.manifold}",
                 f"offset: {self.offset}",
                 "sequence: " + " ".join(str(self.sequence[n]) for n in sorted(self.sequence))]
        for p, fit in self.fits.items():
            if isinstance(fit, FitResult):
                lines.append(f"period {p}: {fit.qp.format()} (degree {fit.degree}, onset {fit.onset})")
            else:
                lines.append(f"period {p}: {fit.status}")
        lines.append("verdict: none (open question)")
        return "\n".join(lines)


def probe_question(m: ManifoldDatum, table: GradedDims, i: int, max_degree: int = 2) -> ProbeReport:
    if m.dim_twisted(1) != 0:
        raise HypothesisError("H_{d-1}(M;Q) must vanish")
    seq = _sequence(table, lambda n: n * (m.d - 2) + i)
    fits = {p: fit_quasipolynomial(seq, p, max_degree) for p in range(1, 5)}
    return ProbeReport(m.name, i, seq, fits)


def parse_sequence_csv(text: str, degree: int | None = None) -> dict[int, int]:
    """Read ``n,value`` rows (header optional).  A three-column ``n,i,dim``
    Betti CSV needs ``degree`` to select a column."""
    rows = [r for r in csv.reader(io.StringIO(text)) if r and any(x.strip() for x in r)]
    if not rows:
        raise ValueError("empty CSV")
    header = [x.strip() for x in rows[0]]
    if header == ["n", "i", "dim"]:
        if degree is None:
            raise ValueError("Betti CSV needs a degree to select")
        seq: dict[int, int] = {}
        for r in rows[1:]:
            n, i, v = (int(x) for x in r)
            seq.setdefault(n, 0)
            if i == degree:
                seq[n] = v
        return seq
    if not header[0].lstrip("-").isdigit():
        rows = rows[1:]
    seq = {}
    for r in rows:
        if len(r) < 2:
            raise ValueError(f"malformed row: {','.join(r)}")
        try:
            n = int(r[0])
            v = Fraction(r[1].strip())
        except ValueError as exc:
            raise ValueError(f"malformed row: {','.join(r)}") from exc
        if v.denominator != 1:
            raise ValueError(f"non-integer value in row: {','.join(r)}")
        if n in seq:
            raise ValueError(f"duplicate index {n}")
        seq[n] = int(v)
    return seq


__all__ = [
    "QuasiPolynomial", "FitResult", "FitFailure", "VerificationReport", "FreenessReport", "ProbeReport",
    "HypothesisError", "IncompleteData", "fit_quasipolynomial", "format_polynomial",
    "verify_extremal_stability", "verify_homological_stability", "verify_vanishing_stability",
    "vanishing_hypotheses", "freeness_probe", "probe_question", "parse_sequence_csv", "NO_FIT", "INSUFFICIENT",
]
