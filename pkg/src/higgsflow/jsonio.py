"""JSON forms of the model objects.

Fractions are always written as ``"num/den"`` strings so files round-trip
exactly.  Opaque Higgs objects are written with the catalog entry that
rebuilds them; reading one back goes through :func:`build_catalog_object`.
"""
from __future__ import annotations

import re
from fractions import Fraction
from typing import Any

from . import constructions as C
from .errors import ParameterError
from .frobenius import canonical_filtration_graded
from .flow_engine import (
    Assumptions,
    FlatObject,
    FlowTrace,
    KnownFiltration,
    OpaqueHiggs,
    StrongVerdict,
    Unknown,
)
from .higgs_core import (
    GradedHiggsBundle,
    HiggsArrow,
    StabilityVerdict,
    nilpotency_exponent,
    stability_verdict,
    sym_uniformizing,
)
from .sheaf_algebra import BundleSum, CurveContext, LineClass, TwistTerm

_TERM = re.compile(r"^([^\^%*]+)(?:\^(-?\d+))?(?:%(\d+))?$")


def frac(x) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def parse_frac(s) -> Fraction:
    if isinstance(s, bool) or isinstance(s, float):
        raise ParameterError(f"expected an exact fraction string, got {s!r}")
    if isinstance(s, int):
        return Fraction(s)
    try:
        return Fraction(str(s))
    except (ValueError, ZeroDivisionError) as exc:
        raise ParameterError(f"bad fraction {s!r}") from exc


def plain(x: Any) -> Any:
    """Recursively convert values to JSON-ready data (fractions to strings)."""
    if isinstance(x, bool) or x is None or isinstance(x, (int, str)):
        return x
    if isinstance(x, Fraction):
        return frac(x)
    if isinstance(x, dict):
        return {str(k): plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [plain(v) for v in x]
    if isinstance(x, LineClass):
        return line_to_json(x)
    if isinstance(x, GradedHiggsBundle):
        return higgs_to_json(x)
    if hasattr(x, "value"):
        return x.value
    raise TypeError(f"cannot serialize {type(x).__name__}")


# lines and bundles -----------------------------------------------------------------

def context_to_json(ctx: CurveContext) -> dict:
    return {"p": ctx.p, "g": ctx.g}


def context_from_json(d: dict) -> CurveContext:
    try:
        return CurveContext(int(d["p"]), int(d["g"]))
    except (KeyError, TypeError) as exc:
        raise ParameterError(f"bad context {d!r}") from exc


def line_to_json(l: LineClass) -> dict:
    twist = None
    if l.terms:
        twist = {"label": l.twist_label, "degree": frac(l.twist_degree)}
    return {"kc_halves": l.kc_halves, "twist": twist, "torsion": l.torsion_order}


def _parse_terms(label: str) -> tuple[TwistTerm, ...]:
    out = []
    for part in label.split("*"):
        m = _TERM.match(part)
        if not m:
            raise ParameterError(f"bad twist label component {part!r}")
        out.append(TwistTerm(m[1], int(m[2]) if m[2] else 1, int(m[3]) if m[3] else None))
    return tuple(out)


def line_from_json(d: dict) -> LineClass:
    if not isinstance(d, dict) or "kc_halves" not in d:
        raise ParameterError(f"bad line class {d!r}")
    twist = d.get("twist")
    if not twist:
        return LineClass(int(d["kc_halves"]))
    terms = _parse_terms(twist["label"])
    torsion = d.get("torsion")
    if torsion is not None and len(terms) == 1 and terms[0].order is None:
        terms = (TwistTerm(terms[0].label, terms[0].power, int(torsion)),)
    return LineClass(int(d["kc_halves"]), parse_frac(twist.get("degree", "0")), terms)


def bundle_to_json(b: BundleSum) -> dict:
    return {"context": context_to_json(b.context), "summands": [line_to_json(l) for l in b.summands]}


def higgs_to_json(h: GradedHiggsBundle, with_context: bool = True) -> dict:
    d: dict[str, Any] = {}
    if with_context:
        d["context"] = context_to_json(h.context)
    d["summands"] = [line_to_json(l) for l in h.summands]
    d["degrees"] = [frac(x) for x in h.degrees]
    d["arrows"] = [{"from": a.source, "to": a.target, "delta": frac(h.vanishing_degree(a))}
                   for a in h.arrows]
    if h.grid is not None:
        d["grid"] = list(h.grid)
    return d


def higgs_from_json(d: dict, ctx: CurveContext | None = None) -> GradedHiggsBundle:
    if "context" in d:
        ctx = context_from_json(d["context"])
    if ctx is None:
        raise ParameterError("a Higgs bundle needs a context {p, g}")
    try:
        summands = tuple(line_from_json(x) for x in d["summands"])
        arrows = tuple(HiggsArrow(int(a["from"]), int(a["to"])) for a in d.get("arrows", ()))
    except (KeyError, TypeError) as exc:
        raise ParameterError(f"bad Higgs bundle JSON: {exc}") from exc
    grid = tuple(d["grid"]) if d.get("grid") else None
    h = GradedHiggsBundle(BundleSum(ctx, summands), arrows, grid)
    return h


def verdict_to_json(v: StabilityVerdict) -> dict:
    return {
        "status": v.status.value,
        "slope": frac(v.slope),
        "witness": sorted(v.witness) if v.witness is not None else None,
        "witness_slope": frac(v.witness_slope) if v.witness_slope is not None else None,
    }


# flow objects ----------------------------------------------------------------------

def opaque_to_json(h: OpaqueHiggs) -> dict:
    return {
        "opaque": True,
        "context": context_to_json(h.context),
        "label": h.label,
        "rank": h.rank,
        "degree": frac(h.degree),
        "exponent": h.exponent,
        "stability": h.stability.value,
        "stability_source": h.stability_source,
        "catalog": plain(h.catalog) or None,
    }


def term_to_json(t) -> dict | None:
    if t is None:
        return None
    if isinstance(t, OpaqueHiggs):
        return opaque_to_json(t)
    d = higgs_to_json(t)
    d["exponent"] = nilpotency_exponent(t)
    if not t.is_grid:
        d["stability"] = verdict_to_json(stability_verdict(t))
    return d


def filtration_to_json(kf: KnownFiltration) -> dict:
    return {
        "id": kf.fid,
        "graded": term_to_json(kf.graded),
        "gr_semistable": kf.gr_semistable,
        "gr_polystable": kf.gr_polystable,
        "unique": kf.unique,
        "source": kf.source,
        "requires_generic": kf.requires_generic,
    }


def flat_to_json(f: FlatObject) -> dict:
    return {
        "label": f.label,
        "provenance": f.provenance.value,
        "rank": f.rank,
        "degree": frac(f.degree),
        "p_curvature_exponent": f.p_curvature_exponent,
        "semistable": f.semistable,
        "filtrations": [filtration_to_json(k) for k in f.known_filtrations],
    }


def strong_verdict_to_json(v: StrongVerdict) -> dict:
    return {
        "status": v.status.value,
        "reason": v.reason,
        "kind": "rule" if v.source else "computed",
        "source": v.source,
        "certificate": term_to_json(v.certificate),
        "certificate_exponent": v.certificate_exponent,
    }


def trace_to_json(t: FlowTrace) -> dict:
    steps = []
    for s in t.steps:
        steps.append({
            "index": s.index,
            "higgs": term_to_json(s.higgs),
            "flat": flat_to_json(s.flat),
            "filtration": s.filtration_id,
            "graded": term_to_json(s.graded),
            "semistable": s.semistable,
            "exponent_ok": s.exponent_ok,
            "kind": "rule" if s.source and not s.source.startswith("computed") else "computed",
            "source": s.source,
        })
    return {
        "context": context_to_json(t.context),
        "assumptions": t.assumptions.as_dict(),
        "initial": term_to_json(t.initial),
        "steps": steps,
        "status": t.status.value,
        "blocked_at": t.blocked_at,
        "reason": t.reason,
        "certificate": term_to_json(t.certificate),
        "returns_to_start": list(t.returns_to_start),
    }


def claim_to_json(c) -> dict:
    d = {"claim": c.claim, "kind": c.kind, "holds": c.holds, "values": plain(c.values)}
    if c.kind == "rule":
        d["source"] = c.source
    return d


# catalog ---------------------------------------------------------------------------

CATALOG_KEYS = (
    "E_ell", "big_rank", "E1", "E2", "tensor_product", "chain_F", "uniformizing", "sym",
    "canonical_graded",
)


def _need(d: dict, *keys):
    missing = [k for k in keys if k not in d]
    if missing:
        raise ParameterError(f"catalog entry {d.get('catalog')!r} needs {missing}")
    return [d[k] for k in keys]


def build_catalog_object(d: dict, assumptions: Assumptions = Assumptions()):
    """Rebuild a named object from ``{"catalog": name, ...parameters}``."""
    name = d.get("catalog")
    if name not in CATALOG_KEYS:
        raise ParameterError(f"unknown catalog object {name!r}; known: {', '.join(CATALOG_KEYS)}")
    ctx = CurveContext(*(int(x) for x in _need(d, "p", "g")))
    if name == "E_ell":
        (ell,) = _need(d, "ell")
        params = C.VlParameters(ctx, int(ell), int(d["d_L"])) if "d_L" in d else C.VlParameters.default(ctx, int(ell))
        return C.build_El(params).higgs
    if name == "big_rank":
        (rank,) = _need(d, "rank")
        return C.build_big_rank(ctx, int(rank)).higgs
    if name in ("E1", "E2", "tensor_product"):
        t = C.build_tensor_counterexample(ctx, assumptions)
        if t.unknown_reason:
            raise ParameterError(t.unknown_reason)
        return {"E1": t.e1, "E2": t.e2, "tensor_product": t.product}[name]
    if name == "chain_F":
        (m,) = _need(d, "m")
        return C.build_chain_F(ctx, int(m))
    if name == "uniformizing":
        return C.build_uniformizing(ctx)
    if name == "sym":
        (m,) = _need(d, "m")
        return sym_uniformizing(ctx, int(m))
    (line,) = _need(d, "line")
    return canonical_filtration_graded(ctx, line_from_json(line))


def load_term(d: dict, assumptions: Assumptions = Assumptions()):
    """Read a flow input: a catalog reference or an explicit graded Higgs bundle."""
    if not isinstance(d, dict):
        raise ParameterError("input must be a JSON object")
    if d.get("opaque"):
        if not isinstance(d.get("catalog"), dict):
            raise ParameterError("opaque objects can only be loaded through their catalog entry")
        return build_catalog_object(d["catalog"], assumptions)
    if "catalog" in d:
        return build_catalog_object(d, assumptions)
    return higgs_from_json(d)


def unknown_to_json(u: Unknown) -> dict:
    return {"status": "Unknown", "reason": u.reason}
