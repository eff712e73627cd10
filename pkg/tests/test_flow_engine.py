import pytest

from higgsflow.constructions import VlParameters, build_big_rank, build_El, build_uniformizing, build_Vl
from higgsflow.errors import ExponentRangeError, UnstableInputError
from higgsflow.flow_engine import (
    Assumptions,
    FiltrationChoice,
    FlowStatus,
    Provenance,
    StrongStatus,
    Unknown,
    canonical_connection_flat,
    choose_gr_semistable,
    inverse_cartier,
    make_flat,
    minimal_gr_exponent,
    pushforward_pullback_flat,
    run_flow,
    strong_semistability_verdict,
    term_exponent,
)
from higgsflow.higgs_core import GradedHiggsBundle, direct_sum, nilpotency_exponent, polystable_check
from higgsflow.sheaf_algebra import CurveContext, LineClass

O = LineClass.trivial()
GENERIC = Assumptions(generic_curve=True)


def test_inverse_cartier_zero_field():
    ctx = CurveContext(5, 2)
    h = GradedHiggsBundle.zero_field(ctx, [LineClass.symbol("A", 2), LineClass.symbol("B", 1)])
    f = inverse_cartier(h)
    assert (f.rank, f.degree, f.p_curvature_exponent) == (2, 15, 0)
    assert f.provenance is Provenance.CANONICAL_CONNECTION_ON


def test_inverse_cartier_uniformizing():
    ctx = CurveContext(3, 2)
    f = inverse_cartier(build_uniformizing(ctx))
    assert (f.rank, f.degree, f.p_curvature_exponent) == (2, 0, 1)
    assert f.provenance is Provenance.UNIFORMIZING


def test_inverse_cartier_exponent_too_large():
    ctx = CurveContext(2, 2)
    h = GradedHiggsBundle.chain(ctx, [LineClass.canonical(2), LineClass.canonical(), O])
    assert nilpotency_exponent(h) == 2
    with pytest.raises(ExponentRangeError):
        inverse_cartier(h)


def test_choose_trivial_on_canonical_connection():
    ctx = CurveContext(3, 2)
    h = GradedHiggsBundle.zero_field(ctx, [LineClass.symbol("M", 1)] * 2)
    c = choose_gr_semistable(canonical_connection_flat(h))
    assert isinstance(c, FiltrationChoice) and c.filtration_id == "trivial"
    assert c.graded.degrees == [3, 3] and c.graded.has_zero_field


def test_choose_canonical_on_pushforward_pullback():
    c = choose_gr_semistable(pushforward_pullback_flat(CurveContext(3, 2), O))
    assert c.filtration_id == "canonical" and c.unique
    assert c.graded.degrees == [4, 2, 0]


def test_choose_vl_filtration():
    params = VlParameters.default(CurveContext(2, 2), 2)
    c = choose_gr_semistable(build_Vl(params))
    assert c.filtration_id == "V_ell" and c.unique
    assert term_exponent(c.graded) == 2


def test_choose_unrecognized_is_unknown():
    ctx = CurveContext(3, 2)
    f = make_flat(ctx, 2, 0, 1, Provenance.INVERSE_CARTIER_OF)
    c = choose_gr_semistable(f)
    assert isinstance(c, Unknown) and not c


def test_uniformizing_needs_generic_flag():
    f = inverse_cartier(build_uniformizing(CurveContext(3, 2)))
    assert isinstance(choose_gr_semistable(f), Unknown)
    assert choose_gr_semistable(f, GENERIC).filtration_id == "hn"


def test_minimal_gr_exponent():
    for p in (2, 3, 5):
        params = VlParameters.default(CurveContext(p, 2), 1)
        e, kf = minimal_gr_exponent(build_Vl(params))
        assert e == p and kf.fid == "V_ell"
    big = build_big_rank(CurveContext(3, 2), 5)
    e, _ = minimal_gr_exponent(big.flat)
    assert e == 3
    ctx = CurveContext(3, 2)
    stable = GradedHiggsBundle.zero_field(ctx, [LineClass.symbol("M", 1)])
    e, _ = minimal_gr_exponent(canonical_connection_flat(stable))
    assert e == 0
    assert isinstance(minimal_gr_exponent(make_flat(ctx, 2, 0, 1, Provenance.INVERSE_CARTIER_OF)), Unknown)


def test_zero_field_flow_multiplies_degree():
    ctx = CurveContext(3, 2)
    h = GradedHiggsBundle.zero_field(ctx, [LineClass.symbol("M", 1)] * 2)
    t = run_flow(h, 3)
    assert t.status is FlowStatus.COMPLETED
    assert [s.graded.degree for s in t.steps] == [6, 18, 54]
    assert all(s.graded.rank == 2 for s in t.steps)


def test_uniformizing_flow_returns():
    ctx = CurveContext(3, 2)
    u = build_uniformizing(ctx)
    t = run_flow(u, 4, GENERIC)
    assert t.status is FlowStatus.COMPLETED
    assert t.returns_to_start == (2, 4)
    first = t.steps[0].graded
    assert first != u and first.degrees == u.degrees
    assert (first.summands[0] * u.summands[0].dual()).torsion_order == 2


def test_uniformizing_flow_without_flag_blocks():
    t = run_flow(build_uniformizing(CurveContext(3, 2)), 2)
    assert t.blocked and t.blocked_at == 1 and t.certificate is None


def test_el_flow_blocks_with_certificate():
    for p, ell in ((2, 2), (3, 1), (5, 2)):
        ctx = CurveContext(p, 2)
        el = build_El(VlParameters.default(ctx, ell))
        t = run_flow(el.higgs, 3)
        assert t.blocked and t.blocked_at == 1
        assert nilpotency_exponent(t.certificate) == p
        assert polystable_check(t.certificate)


def test_flow_rejects_unstable_start():
    ctx = CurveContext(3, 2)
    h = GradedHiggsBundle.zero_field(ctx, [O, LineClass.canonical()])
    with pytest.raises(UnstableInputError):
        run_flow(h, 1)


def test_verdict_small_rank():
    ctx = CurveContext(3, 2)
    v = strong_semistability_verdict(build_uniformizing(ctx))
    assert v.status is StrongStatus.STRONGLY_SEMISTABLE and v.certificate is None


def test_verdict_el():
    for p in (2, 3, 5):
        el = build_El(VlParameters.default(CurveContext(p, 2), 1))
        v = strong_semistability_verdict(el.higgs)
        assert v.status is StrongStatus.NOT_STRONGLY_SEMISTABLE
        assert v.certificate_exponent == p


def test_verdict_elliptic():
    ctx = CurveContext(2, 1)
    h = direct_sum(GradedHiggsBundle.chain(ctx, [O, O]), GradedHiggsBundle.chain(ctx, [O, O]))
    assert h.rank > ctx.p
    v = strong_semistability_verdict(h)
    assert v.status is StrongStatus.STRONGLY_SEMISTABLE and "genus" in v.reason

