"""Bidegrees, slopes, rays and sparse tables of graded dimensions."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd
from types import MappingProxyType
from typing import Iterator, Mapping


class IncompleteData(ValueError):
    """Raised when a lookup reaches past the authoritative weight bound."""


@dataclass(frozen=True, order=True)
class Bidegree:
    weight: int
    degree: int

    def __add__(self, other: "Bidegree") -> "Bidegree":
        return Bidegree(self.weight + other.weight, self.degree + other.degree)

    def __neg__(self) -> "Bidegree":
        return Bidegree(-self.weight, -self.degree)

    def __sub__(self, other: "Bidegree") -> "Bidegree":
        return self + (-other)

    def __iter__(self) -> Iterator[int]:
        yield self.weight
        yield self.degree


@dataclass(frozen=True)
class Slope:
    """A reduced rational number with positive denominator."""

    num: int
    den: int = 1

    def __post_init__(self):
        if self.den == 0:
            raise ValueError("slope denominator must be nonzero")
        g = gcd(self.num, self.den)
        sign = -1 if self.den < 0 else 1
        object.__setattr__(self, "num", sign * self.num // g)
        object.__setattr__(self, "den", sign * self.den // g)

    @property
    def value(self) -> Fraction:
        return Fraction(self.num, self.den)

    def __str__(self) -> str:
        return f"{self.num}/{self.den}"


def slope_of(b: Bidegree) -> Slope:
    if b.weight == 0:
        raise ValueError("slope undefined at weight 0")
    return Slope(b.degree, b.weight)


@dataclass(frozen=True)
class RaySpec:
    """The ray ``u -> (a*u, b*u + offset)`` for a slope ``b/a``."""

    slope: Slope
    offset: int = 0

    @property
    def step(self) -> Bidegree:
        return Bidegree(self.slope.den, self.slope.num)

    def at(self, u: int) -> Bidegree:
        return Bidegree(self.slope.den * u, self.slope.num * u + self.offset)


@dataclass(frozen=True)
class GradedDims:
    """Sparse dimensions ``dim V_{n,i}``, authoritative for weights ``<= complete_through``.

    Absent entries at or below the bound are zero; anything above the bound is
    unknown and lookups there raise :class:`IncompleteData`.
    """

    entries: Mapping[Bidegree, int] = field(default_factory=dict)
    complete_through: int = -1

    def __post_init__(self):
        clean = {}
        for b, dim in self.entries.items():
            b = b if isinstance(b, Bidegree) else Bidegree(*b)
            if dim < 0:
                raise ValueError(f"negative dimension {dim} at {b}")
            if b.weight > self.complete_through:
                raise ValueError(
                    f"entry at weight {b.weight} exceeds complete_through={self.complete_through}"
                )
            if dim:
                clean[b] = int(dim)
        object.__setattr__(self, "entries", MappingProxyType(dict(sorted(clean.items()))))

    def __getitem__(self, b) -> int:
        b = b if isinstance(b, Bidegree) else Bidegree(*b)
        if b.weight > self.complete_through:
            raise IncompleteData(
                f"incomplete data: weight {b.weight} beyond complete_through={self.complete_through}"
            )
        return self.entries.get(b, 0)

    def __eq__(self, other) -> bool:
        if not isinstance(other, GradedDims):
            return NotImplemented
        return (
            dict(self.entries) == dict(other.entries)
            and self.complete_through == other.complete_through
        )

    def __hash__(self):
        return hash((tuple(self.entries.items()), self.complete_through))

    def row(self, weight: int) -> dict[int, int]:
        """Nonzero ``degree -> dim`` for a single weight."""
        if weight > self.complete_through:
            raise IncompleteData(
                f"incomplete data: weight {weight} beyond complete_through={self.complete_through}"
            )
        return {b.degree: d for b, d in self.entries.items() if b.weight == weight}

    def truncated(self, n_max: int) -> "GradedDims":
        """The same data, complete only through ``min(n_max, complete_through)``."""
        bound = min(n_max, self.complete_through)
        return GradedDims({b: d for b, d in self.entries.items() if b.weight <= bound}, bound)

    def __add__(self, other: "GradedDims") -> "GradedDims":
        bound = min(self.complete_through, other.complete_through)
        out: dict[Bidegree, int] = {}
        for src in (self, other):
            for b, dim in src.entries.items():
                if b.weight <= bound:
                    out[b] = out.get(b, 0) + dim
        return GradedDims(out, bound)


def ray_extract(dims: GradedDims, ray: RaySpec, length: int) -> list[int]:
    """Dimensions along ``ray`` for ``u = 0 .. length-1``.

    This is the ray's graded dimension sampled at the weights ``a*u`` where it
    can be nonzero; at weights not divisible by ``a`` it vanishes by convention.
    """
    return [dims[ray.at(u)] for u in range(length)]


def parity_component(dims: GradedDims, eps: int) -> GradedDims:
    if eps not in (0, 1):
        raise ValueError(f"parity must be 0 or 1, got {eps!r}")
    kept = {b: d for b, d in dims.entries.items() if b.degree % 2 == eps}
    return GradedDims(kept, dims.complete_through)
