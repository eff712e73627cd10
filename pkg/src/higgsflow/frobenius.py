"""Frobenius pullback and pushforward bookkeeping on curves.

Stability of ``F_* L`` and the subbundle slope bound are imported results,
represented here as rules; only degree identities are computed.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import overload

from .errors import NotDescendedError, OutOfModelError, ParameterError
from .higgs_core import GradedHiggsBundle
from .sheaf_algebra import BundleSum, CurveContext, LineClass, as_fraction, hn_grouping

SUN_PUSHFORWARD = "Sun: F_* of a (semi)stable bundle is (semi)stable on curves of genus >= 1 (stable if g >= 2)"
SUN_SLOPE_BOUND = "Sun: mu(E) - mu(F_*L) <= -(p - rk E)(g - 1)/p for proper subbundles E of F_*L"
CANONICAL_FILTRATION = "canonical filtration of F^*F_*E: graded maps are isomorphisms and it is the HN filtration for g >= 2"


def pullback_line(ctx: CurveContext, l: LineClass) -> LineClass:
    """``F^* L = L^p`` for the absolute Frobenius."""
    return l.power(ctx.p)


@overload
def frobenius_pullback(b: BundleSum) -> BundleSum: ...
@overload
def frobenius_pullback(b: GradedHiggsBundle) -> GradedHiggsBundle: ...


def frobenius_pullback(b):
    if isinstance(b, GradedHiggsBundle):
        if b.arrows:
            raise OutOfModelError("Frobenius pullback of a nonzero Higgs field is not modelled")
        return GradedHiggsBundle(frobenius_pullback(b.base))
    ctx = b.context
    return BundleSum(ctx, tuple(pullback_line(ctx, l) for l in b.summands))


@dataclass(frozen=True)
class PushforwardBundle:
    context: CurveContext
    source_line: LineClass

    @property
    def rank(self) -> int:
        return self.context.p

    @property
    def degree(self) -> Fraction:
        ctx = self.context
        return self.source_line.degree(ctx) + (ctx.p - 1) * (ctx.g - 1)

    @property
    def slope(self) -> Fraction:
        return self.degree / self.rank

    @property
    def stability_flag(self) -> str:
        return "stable" if self.context.g >= 2 else "semistable"


def frobenius_pushforward_line(ctx: CurveContext, l: LineClass) -> PushforwardBundle:
    if ctx.g < 1:
        raise ParameterError("F_* L is only modelled on curves of genus >= 1")
    return PushforwardBundle(ctx, l)


def canonical_filtration_graded(ctx: CurveContext, l: LineClass) -> GradedHiggsBundle:
    """Graded of the canonical filtration on ``F^* F_* l``: ``K^{p-1} l -> ... -> l``."""
    if ctx.g < 1:
        raise ParameterError("canonical filtration needs genus >= 1")
    summands = [LineClass.canonical(ctx.p - 1 - i) * l for i in range(ctx.p)]
    return GradedHiggsBundle.chain(ctx, summands)


@dataclass(frozen=True)
class HNComparison:
    equal: bool
    note: str = ""

    def __bool__(self) -> bool:
        return self.equal


def hn_equals_canonical(ctx: CurveContext, l: LineClass) -> HNComparison:
    """Check that HN grouping of the canonical graded pieces is the chain order."""
    if ctx.g <= 1:
        return HNComparison(False, f"g={ctx.g}: graded pieces have equal degree, HN filtration is trivial")
    chain = canonical_filtration_graded(ctx, l)
    groups = hn_grouping(chain.base)
    ok = groups == [(i,) for i in range(chain.rank)]
    return HNComparison(ok, "" if ok else f"HN grouping {groups} differs from chain order")


def sun_bound(ctx: CurveContext, r: int) -> Fraction:
    """Upper bound for ``mu(E) - mu(F_* L)`` over rank-``r`` subbundles ``E``."""
    if ctx.g < 2:
        raise ParameterError("the slope bound needs g >= 2")
    if not 1 <= r < ctx.p:
        raise ParameterError(f"subbundle rank must lie in 1..{ctx.p - 1}, got {r}")
    return Fraction(-(ctx.p - r) * (ctx.g - 1), ctx.p)


def check_sun(ctx: CurveContext, sub_slope, sub_rank: int, l: LineClass) -> bool:
    mu = frobenius_pushforward_line(ctx, l).slope
    return as_fraction(sub_slope) - mu <= sun_bound(ctx, sub_rank)


def max_descended_degree(ctx: CurveContext, n: int, l: LineClass) -> Fraction:
    """Largest ``deg F^* N`` for a rank-``n`` subbundle ``N`` of ``F_* l``, from the slope bound."""
    mu_sub = frobenius_pushforward_line(ctx, l).slope + sun_bound(ctx, n)
    return ctx.p * n * mu_sub


def cartier_descent_degree(ctx: CurveContext, deg_n) -> Fraction:
    """Degree of ``N~`` with ``F^* N~ = N``."""
    d = as_fraction(deg_n)
    q = d / ctx.p
    if d.denominator != 1 or q.denominator != 1:
        raise NotDescendedError(f"degree {d} is not divisible by p={ctx.p}")
    return q
