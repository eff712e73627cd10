from fractions import Fraction

import pytest

from higgsflow.errors import NotDescendedError, OutOfModelError, ParameterError
from higgsflow.frobenius import (
    canonical_filtration_graded,
    cartier_descent_degree,
    check_sun,
    frobenius_pullback,
    frobenius_pushforward_line,
    hn_equals_canonical,
    sun_bound,
)
from higgsflow.higgs_core import GradedHiggsBundle, Stability, nilpotency_exponent, stability_verdict, validate_higgs
from higgsflow.sheaf_algebra import BundleSum, CurveContext, LineClass

O = LineClass.trivial()


def test_pullback_half_canonical():
    ctx = CurveContext(2, 2)
    out = frobenius_pullback(BundleSum(ctx, (LineClass.half_canonical(1),)))
    assert out.summands == (LineClass.canonical(),)
    assert out.degree == 2


def test_pullback_scales_degree():
    ctx = CurveContext(5, 2)
    b = BundleSum(ctx, (LineClass.symbol("A", 2), LineClass.symbol("B", 1)))
    out = frobenius_pullback(b)
    assert (out.rank, out.degree) == (2, 15)
    assert frobenius_pullback(BundleSum(ctx, (O,))).summands == (O,)


def test_pullback_of_zero_field_higgs():
    ctx = CurveContext(3, 2)
    h = GradedHiggsBundle.zero_field(ctx, [LineClass.symbol("M", 1)])
    assert frobenius_pullback(h).degree == 3
    with pytest.raises(OutOfModelError):
        frobenius_pullback(GradedHiggsBundle.chain(ctx, [LineClass.canonical(), O]))


def test_pushforward_line():
    e = frobenius_pushforward_line(CurveContext(3, 2), O)
    assert (e.rank, e.degree, e.stability_flag) == (3, 2, "stable")
    for p in (2, 3, 5, 7):
        for g in range(1, 7):
            ctx = CurveContext(p, g)
            assert frobenius_pushforward_line(ctx, LineClass.half_canonical(1 - p)).degree == 0
    e = frobenius_pushforward_line(CurveContext(2, 1), LineClass.symbol("D", 1))
    assert (e.rank, e.degree, e.stability_flag) == (2, 1, "semistable")
    with pytest.raises(ParameterError):
        frobenius_pushforward_line(CurveContext(2, 0), O)


def test_canonical_filtration_graded():
    ctx = CurveContext(3, 2)
    c = canonical_filtration_graded(ctx, O)
    assert c.degrees == [4, 2, 0]
    assert nilpotency_exponent(c) == 2
    assert c.degree == 6 == 3 * frobenius_pushforward_line(ctx, O).degree
    assert canonical_filtration_graded(CurveContext(2, 2), LineClass.half_canonical(-1)).degrees == [1, -1]


def test_canonical_graded_is_valid_iso_chain_and_stable():
    for p in (2, 3, 5):
        for g in (2, 3):
            c = canonical_filtration_graded(CurveContext(p, g), LineClass.symbol("L", 1))
            assert validate_higgs(c) == []
            assert all(c.vanishing_degree(a) == 0 for a in c.arrows)
            assert stability_verdict(c).status is Stability.STABLE


def test_hn_equals_canonical():
    assert hn_equals_canonical(CurveContext(5, 2), O)
    r = hn_equals_canonical(CurveContext(2, 1), O)
    assert not r and "g=1" in r.note
    assert hn_equals_canonical(CurveContext(2, 3), LineClass.symbol("X", -5))


def test_sun_bound():
    assert sun_bound(CurveContext(3, 2), 1) == Fraction(-2, 3)
    assert sun_bound(CurveContext(2, 2), 1) == Fraction(-1, 2)
    with pytest.raises(ParameterError):
        sun_bound(CurveContext(3, 2), 3)
    with pytest.raises(ParameterError):
        sun_bound(CurveContext(3, 1), 1)


def test_check_sun():
    ctx = CurveContext(3, 2)
    mu = frobenius_pushforward_line(ctx, O).slope
    assert not check_sun(ctx, mu, 1, O)
    assert check_sun(ctx, mu + sun_bound(ctx, 1), 1, O)


def test_cartier_descent_degree():
    assert cartier_descent_degree(CurveContext(3, 2), 6) == 2
    with pytest.raises(NotDescendedError):
        cartier_descent_degree(CurveContext(2, 2), 3)
    assert cartier_descent_degree(CurveContext(5, 2), 0) == 0
    with pytest.raises(NotDescendedError):
        cartier_descent_degree(CurveContext(2, 2), Fraction(1, 2))
