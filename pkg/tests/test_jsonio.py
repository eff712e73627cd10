import json
from fractions import Fraction

import pytest

from higgsflow.constructions import VlParameters, build_El, build_tensor_counterexample
from higgsflow.errors import ParameterError
from higgsflow.flow_engine import Assumptions, OpaqueHiggs, run_flow
from higgsflow.higgs_core import GradedHiggsBundle, sym_uniformizing, tensor_higgs
from higgsflow.jsonio import (
    build_catalog_object,
    frac,
    higgs_from_json,
    higgs_to_json,
    line_from_json,
    line_to_json,
    load_term,
    opaque_to_json,
    parse_frac,
    plain,
    trace_to_json,
)
from higgsflow.sheaf_algebra import CurveContext, LineClass

G2 = CurveContext(2, 2)


def roundtrip(d):
    return json.loads(json.dumps(d))


def test_fractions():
    assert frac(Fraction(3, 2)) == "3/2"
    assert frac(4) == "4/1"
    assert parse_frac("-7/3") == Fraction(-7, 3)
    assert parse_frac(5) == 5
    for bad in (0.5, True, "x", "1/0"):
        with pytest.raises(ParameterError):
            parse_frac(bad)
    assert plain({"a": [Fraction(1, 3), None, True]}) == {"a": ["1/3", None, True]}


@pytest.mark.parametrize("line", [
    LineClass.trivial(),
    LineClass.canonical(3),
    LineClass.half_canonical(-1),
    LineClass.symbol("L_2", 1),
    LineClass.symbol("T", 0, torsion=2),
    LineClass.symbol("A", 2) * LineClass.symbol("B", -1).power(2) * LineClass.canonical(),
    LineClass.symbol("N", Fraction(1, 2)),
])
def test_line_roundtrip(line):
    assert line_from_json(roundtrip(line_to_json(line))) == line


def test_higgs_roundtrip():
    hs = [
        GradedHiggsBundle.chain(G2, [LineClass.canonical(2), LineClass.canonical(), LineClass.trivial()]),
        GradedHiggsBundle.zero_field(G2, [LineClass.symbol("M", 1)] * 2),
        tensor_higgs(sym_uniformizing(G2, 2), sym_uniformizing(G2, 1)),
    ]
    for h in hs:
        assert higgs_from_json(roundtrip(higgs_to_json(h))) == h


def test_higgs_json_shape():
    d = higgs_to_json(GradedHiggsBundle.chain(G2, [LineClass.trivial(), LineClass.canonical()]))
    assert d["context"] == {"p": 2, "g": 2}
    assert d["degrees"] == ["0/1", "2/1"]
    assert d["arrows"] == [{"from": 0, "to": 1, "delta": "4/1"}]


def test_higgs_from_json_needs_context():
    d = higgs_to_json(sym_uniformizing(G2, 1), with_context=False)
    with pytest.raises(ParameterError):
        higgs_from_json(d)
    assert higgs_from_json(d, G2) == sym_uniformizing(G2, 1)


def test_catalog_objects():
    el = build_catalog_object({"catalog": "E_ell", "p": 2, "g": 2, "ell": 2})
    assert isinstance(el, OpaqueHiggs) and (el.rank, el.degree) == (3, 3)
    assert build_catalog_object({"catalog": "chain_F", "p": 3, "g": 2, "m": 2}).degrees == [4, 2, 0]
    e2 = build_catalog_object({"catalog": "E2", "p": 3, "g": 2}, Assumptions(True))
    assert e2.degree == 0
    with pytest.raises(ParameterError):
        build_catalog_object({"catalog": "E2", "p": 3, "g": 2})
    with pytest.raises(ParameterError):
        build_catalog_object({"catalog": "nope", "p": 3, "g": 2})
    with pytest.raises(ParameterError):
        build_catalog_object({"catalog": "chain_F", "p": 3, "g": 2})


def test_opaque_reload_through_catalog():
    el = build_El(VlParameters.default(CurveContext(3, 2), 1)).higgs
    d = roundtrip(opaque_to_json(el))
    assert d["opaque"] and d["degree"] == "5/1"
    back = load_term(d)
    assert (back.rank, back.degree, back.label) == (el.rank, el.degree, el.label)
    d.pop("catalog")
    with pytest.raises(ParameterError):
        load_term(d)


def test_load_term_variants():
    u = sym_uniformizing(G2, 1)
    assert load_term(roundtrip(higgs_to_json(u))) == u
    assert load_term({"catalog": "uniformizing", "p": 2, "g": 2}) == u
    with pytest.raises(ParameterError):
        load_term([1, 2])


def test_trace_json_is_serializable():
    el = build_El(VlParameters.default(G2, 2)).higgs
    d = roundtrip(trace_to_json(run_flow(el, 2)))
    assert d["status"] == "blocked" and d["blocked_at"] == 1
    t = build_tensor_counterexample(G2)
    assert roundtrip(plain({"e": t.e_prime}))["e"]["degrees"]
