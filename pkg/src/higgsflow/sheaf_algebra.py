"""Formal line bundles on a curve of genus g and their direct sums.

A line class is ``K^{k/2} (x) T`` where ``K^{1/2}`` is a fixed (never chosen)
square root of the canonical bundle and ``T`` is a product of opaque symbols
with a recorded total degree.  Everything is exact: degrees are
:class:`fractions.Fraction` values in ``(1/2)Z``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import groupby
from typing import Iterable, Sequence

from .errors import ParameterError

Rational = Fraction


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    return all(n % d for d in range(2, math.isqrt(n) + 1))


def as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        raise TypeError("floating point degrees are not accepted")
    return Fraction(x)


def _check_half_integral(x: Fraction, what: str) -> None:
    if (2 * x).denominator != 1:
        raise ParameterError(f"{what} must lie in (1/2)Z, got {x}")


@dataclass(frozen=True)
class CurveContext:
    """Characteristic ``p`` and genus ``g`` of the ambient curve."""

    p: int
    g: int

    def __post_init__(self):
        if not isinstance(self.p, int) or not _is_prime(self.p):
            raise ParameterError(f"p must be prime, got {self.p!r}")
        if not isinstance(self.g, int) or self.g < 0:
            raise ParameterError(f"g must be a non-negative integer, got {self.g!r}")

    @property
    def canonical_degree(self) -> int:
        return 2 * self.g - 2


@dataclass(frozen=True, order=True)
class TwistTerm:
    """One opaque symbol raised to ``power``; ``order`` is its torsion order."""

    label: str
    power: int = 1
    order: int | None = None

    def render(self) -> str:
        s = self.label
        if self.power != 1:
            s += f"^{self.power}"
        if self.order is not None:
            s += f"%{self.order}"
        return s


def _normalize_terms(terms: Iterable[TwistTerm]) -> tuple[TwistTerm, ...]:
    merged: dict[str, list] = {}
    for t in terms:
        if t.order is not None and t.order < 1:
            raise ParameterError(f"torsion order must be positive: {t}")
        if t.label in merged:
            if merged[t.label][1] != t.order:
                raise ParameterError(f"conflicting torsion orders for {t.label!r}")
            merged[t.label][0] += t.power
        else:
            merged[t.label] = [t.power, t.order]
    out = []
    for label, (power, order) in merged.items():
        if order is not None:
            power %= order
        if power:
            out.append(TwistTerm(label, power, order))
    return tuple(sorted(out))


@dataclass(frozen=True)
class LineClass:
    """Formal line bundle ``K^{kc_halves/2} (x) twist``.

    Equality compares ``kc_halves``, the reduced multiset of twist symbols and
    the twist degree, which is all the constructions ever need.
    """

    kc_halves: int = 0
    twist_degree: Fraction = Fraction(0)
    terms: tuple[TwistTerm, ...] = field(default=())

    def __post_init__(self):
        if not isinstance(self.kc_halves, int):
            raise ParameterError("kc_halves must be an integer")
        deg = as_fraction(self.twist_degree)
        _check_half_integral(deg, "twist degree")
        terms = _normalize_terms(self.terms)
        if terms and all(t.order is not None for t in terms) and deg != 0:
            raise ParameterError("a pure torsion twist has degree 0")
        if not terms and deg != 0:
            raise ParameterError("a twist of nonzero degree needs a label")
        object.__setattr__(self, "twist_degree", deg)
        object.__setattr__(self, "terms", terms)

    # constructors -------------------------------------------------------
    @classmethod
    def trivial(cls) -> "LineClass":
        return cls()

    @classmethod
    def canonical(cls, power: int = 1) -> "LineClass":
        """``K^power``."""
        return cls(kc_halves=2 * power)

    @classmethod
    def half_canonical(cls, halves: int) -> "LineClass":
        return cls(kc_halves=halves)

    @classmethod
    def symbol(cls, label: str, degree=0, torsion: int | None = None) -> "LineClass":
        return cls(0, as_fraction(degree), (TwistTerm(label, 1, torsion),))

    # derived ------------------------------------------------------------
    def degree(self, ctx: CurveContext) -> Fraction:
        return self.kc_halves * (ctx.g - 1) + self.twist_degree

    @property
    def twist_label(self) -> str | None:
        if not self.terms:
            return None
        return "*".join(t.render() for t in self.terms)

    @property
    def torsion_order(self) -> int | None:
        """Order of the twist when it is pure torsion, else ``None``."""
        if not self.terms or any(t.order is None for t in self.terms):
            return None
        n = 1
        for t in self.terms:
            n = math.lcm(n, t.order // math.gcd(t.power, t.order))
        return n

    def is_trivial(self) -> bool:
        return self.kc_halves == 0 and not self.terms and self.twist_degree == 0

    def __mul__(self, other: "LineClass") -> "LineClass":
        return tensor_lines(self, other)

    def dual(self) -> "LineClass":
        return LineClass(
            -self.kc_halves,
            -self.twist_degree,
            tuple(TwistTerm(t.label, -t.power, t.order) for t in self.terms),
        )

    def power(self, n: int) -> "LineClass":
        return LineClass(
            n * self.kc_halves,
            n * self.twist_degree,
            tuple(TwistTerm(t.label, n * t.power, t.order) for t in self.terms),
        )

    def render(self) -> str:
        parts = []
        if self.kc_halves:
            k = Fraction(self.kc_halves, 2)
            parts.append("K" if k == 1 else f"K^({k})")
        if self.terms:
            parts.append(self.twist_label)
        return "*".join(parts) if parts else "O"


def line_degree(ctx: CurveContext, l: LineClass) -> Fraction:
    return l.degree(ctx)


def tensor_lines(a: LineClass, b: LineClass) -> LineClass:
    return LineClass(
        a.kc_halves + b.kc_halves,
        a.twist_degree + b.twist_degree,
        a.terms + b.terms,
    )


@dataclass(frozen=True)
class BundleSum:
    """Ordered direct sum of line classes over a fixed curve."""

    context: CurveContext
    summands: tuple[LineClass, ...]

    def __post_init__(self):
        summands = tuple(self.summands)
        if not summands:
            raise ParameterError("a bundle needs at least one summand")
        object.__setattr__(self, "summands", summands)

    @property
    def rank(self) -> int:
        return len(self.summands)

    @property
    def degrees(self) -> list[Fraction]:
        return [l.degree(self.context) for l in self.summands]

    @property
    def degree(self) -> Fraction:
        return sum(self.degrees, Fraction(0))

    @property
    def slope(self) -> Fraction:
        return self.degree / self.rank

    def tensor(self, line: LineClass) -> "BundleSum":
        return BundleSum(self.context, tuple(s * line for s in self.summands))

    def concat(self, other: "BundleSum") -> "BundleSum":
        if other.context != self.context:
            raise ParameterError("cannot add bundles over different curves")
        return BundleSum(self.context, self.summands + other.summands)


def bundle_stats(b: BundleSum) -> tuple[int, Fraction, Fraction]:
    return b.rank, b.degree, b.slope


def euler_characteristic(ctx: CurveContext, rank: int, degree) -> Fraction:
    """Riemann-Roch: ``chi = deg + rank (1 - g)``."""
    if rank < 1:
        raise ParameterError("rank must be positive")
    return as_fraction(degree) + rank * (1 - ctx.g)


def serre_ledger(ctx: CurveContext, rank: int, degree, h0: int) -> Fraction:
    """Return ``h^1`` of a bundle from ``h^0`` (equivalently ``h^0`` of its Serre dual)."""
    chi = euler_characteristic(ctx, rank, degree)
    if h0 < 0 or h0 < chi:
        raise ParameterError(f"h0={h0} is inconsistent with chi={chi}")
    return h0 - chi


def hn_grouping(b: BundleSum) -> list[tuple[int, ...]]:
    """Harder-Narasimhan grouping of a sum of lines.

    Returns summand indices grouped by equal degree, groups in strictly
    decreasing degree; indices keep their original order inside a group.
    """
    degs = b.degrees
    order = sorted(range(b.rank), key=lambda i: (-degs[i], i))
    return [tuple(g) for _, g in groupby(order, key=lambda i: degs[i])]


def group_degrees(b: BundleSum, groups: Sequence[Sequence[int]]) -> list[list[Fraction]]:
    degs = b.degrees
    return [[degs[i] for i in grp] for grp in groups]


def is_semistable_sum(b: BundleSum) -> bool:
    """A sum of lines is semistable exactly when all summands share one degree."""
    return len(hn_grouping(b)) == 1
