from fractions import Fraction

import pytest

from higgsflow.errors import ParameterError
from higgsflow.sheaf_algebra import (
    BundleSum,
    CurveContext,
    LineClass,
    bundle_stats,
    euler_characteristic,
    hn_grouping,
    group_degrees,
    line_degree,
    serre_ledger,
    tensor_lines,
)

K = LineClass.canonical()
O = LineClass.trivial()


def test_context_validation():
    assert CurveContext(5, 0).canonical_degree == -2
    for bad in [(4, 2), (1, 2), (2, -1)]:
        with pytest.raises(ParameterError):
            CurveContext(*bad)


def test_line_degree():
    assert line_degree(CurveContext(2, 2), K) == 2
    assert line_degree(CurveContext(2, 3), LineClass.half_canonical(1)) == 2
    assert line_degree(CurveContext(2, 2), LineClass.symbol("A_1", 1)) == 1


def test_degrees_are_exact_half_integers():
    l = LineClass.symbol("T", Fraction(1, 2))
    assert l.degree(CurveContext(3, 4)) == Fraction(1, 2)
    with pytest.raises(ParameterError):
        LineClass.symbol("T", Fraction(1, 3))
    with pytest.raises(TypeError):
        LineClass.symbol("T", 0.5)


def test_tensor_lines():
    ctx = CurveContext(2, 2)
    L = LineClass.symbol("L", 0, torsion=2)
    assert tensor_lines(L, L) == O
    assert tensor_lines(L, L).is_trivial()
    half = LineClass.half_canonical(1)
    assert half * half == K
    assert (LineClass.symbol("A_2", 2) * K).degree(ctx) == 4


def test_torsion_invariants():
    L = LineClass.symbol("L", 0, torsion=2)
    assert L.torsion_order == 2
    assert L.power(3) == L
    with pytest.raises(ParameterError):
        LineClass.symbol("L", 1, torsion=2)
    with pytest.raises(ParameterError):
        LineClass(0, Fraction(1), ())


def test_dual_and_render():
    A = LineClass.symbol("A", 3)
    assert (A * A.dual()).is_trivial()
    assert LineClass.half_canonical(-1).render() == "K^(-1/2)"
    assert O.render() == "O"


def test_bundle_stats():
    assert bundle_stats(BundleSum(CurveContext(2, 2), (K, O))) == (2, 2, 1)
    v = BundleSum(CurveContext(2, 2), (LineClass.canonical(2), K, O))
    assert bundle_stats(v) == (3, 6, 2)
    u = BundleSum(CurveContext(2, 3), (LineClass.half_canonical(1), LineClass.half_canonical(-1)))
    assert bundle_stats(u) == (2, 0, 0)
    with pytest.raises(ParameterError):
        BundleSum(CurveContext(2, 2), ())


def test_euler_characteristic():
    assert euler_characteristic(CurveContext(2, 2), 1, 0) == -1
    assert euler_characteristic(CurveContext(2, 2), 4, 0) == -4
    assert euler_characteristic(CurveContext(2, 5), 1, 8) == 4


def test_serre_ledger():
    assert serre_ledger(CurveContext(2, 2), 4, 0, 2) == 6
    for g in range(0, 8):
        assert serre_ledger(CurveContext(2, g), 1, 0, 1) == g
    assert serre_ledger(CurveContext(2, 3), 4, 0, 2) == 10
    with pytest.raises(ParameterError):
        serre_ledger(CurveContext(2, 0), 1, 0, 0)


def test_hn_grouping():
    ctx = CurveContext(2, 2)
    b = BundleSum(ctx, tuple(LineClass.symbol(f"D{i}", d) if d else O for i, d in enumerate([3, 0, 3, 1])))
    assert group_degrees(b, hn_grouping(b)) == [[3, 3], [1], [0]]
    c = BundleSum(CurveContext(3, 2), (LineClass.canonical(2), K, O))
    assert hn_grouping(c) == [(0,), (1,), (2,)]
    assert hn_grouping(BundleSum(ctx, (O, O, O))) == [(0, 1, 2)]


def test_chi_of_canonical():
    for g in range(0, 10):
        ctx = CurveContext(2, g)
        assert euler_characteristic(ctx, 1, K.degree(ctx)) == g - 1
