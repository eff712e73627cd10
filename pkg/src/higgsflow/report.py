"""Scenario runners and reports.

A scenario is a plain config dict.  :func:`run_scenario` turns it into a
deterministic report body; timing is attached separately so that re-running
a config reproduces the body exactly, which is what :func:`validate_report`
relies on.
"""
from __future__ import annotations

import csv
import io
import json
import os
import time
from typing import Iterable

from . import constructions as C
from . import oracle
from .errors import BoundsError, ParameterError
from .flow_engine import Assumptions, StrongStatus, run_flow
from .frobenius import sun_bound
from .jsonio import (
    claim_to_json,
    frac,
    higgs_to_json,
    load_term,
    opaque_to_json,
    plain,
    term_to_json,
    trace_to_json,
)
from .higgs_core import nilpotency_exponent, polystable_check
from .sheaf_algebra import CurveContext, _is_prime

TOOL = "higgsflow"
VERSION = "0.1.0"

COMMANDS = ("verify", "scan", "flow", "construct", "oracle-check")
VERIFY_TARGETS = ("counterexample", "big-rank", "tensor", "extension")
CONSTRUCT_TARGETS = ("chain-F", "uniformizing", "sym", "vl", "el", "big-rank", "p2", "tensor", "pushforward")
SCAN_COLUMNS = ("p", "g", "ell", "n", "bound", "mu_V", "reduced", "strict", "equality", "sun_bound")


# parsing helpers ---------------------------------------------------------------------

def parse_int_list(spec: str | Iterable[int] | None) -> list[int]:
    """``"2,3"``, ``"2..6"`` (inclusive) or a mix such as ``"2,5..7"``."""
    if spec is None:
        return []
    if not isinstance(spec, str):
        return [int(x) for x in spec]
    out: list[int] = []
    for part in filter(None, (s.strip() for s in spec.split(","))):
        try:
            if ".." in part:
                lo, hi = part.split("..", 1)
                out.extend(range(int(lo), int(hi) + 1))
            else:
                out.append(int(part))
        except ValueError as exc:
            raise ParameterError(f"bad integer list {spec!r}") from exc
    return out


def _grid(cfg: dict, key: str, default=None) -> list[int]:
    """Values of ``key``; ``default`` when absent, an error when given but empty."""
    spec = cfg.get(key)
    if spec is None:
        return parse_int_list(default)
    vals = parse_int_list(spec)
    if not vals:
        raise ParameterError(f"empty grid: --{key.replace('_', '-')} has no values")
    return vals


def _primes(ps: list[int]) -> list[int]:
    if not ps:
        raise ParameterError("empty grid: no values of p")
    bad = [p for p in ps if not _is_prime(p)]
    if bad:
        raise ParameterError(f"p must be prime, got {bad}")
    return ps


def _genera(gs: list[int], minimum: int) -> list[int]:
    if not gs:
        raise ParameterError("empty grid: no values of g")
    bad = [g for g in gs if g < minimum]
    if bad:
        raise ParameterError(f"this command needs g >= {minimum}, got {bad}")
    return gs


def _entry(name: str, kind: str, holds: bool, values: dict | None = None, source: str = "") -> dict:
    e = {"name": name, "kind": kind, "holds": bool(holds), "values": plain(values or {})}
    if kind == "rule":
        e["source"] = source
    return e


def _claims(prefix: str, claims) -> list[dict]:
    out = []
    for c in claims:
        d = claim_to_json(c)
        out.append(_entry(f"{prefix}: {d['claim']}", d["kind"], d["holds"], c.values, d.get("source", "")))
    return out


def _verdict_entry(name: str, v, expect: StrongStatus) -> dict:
    values = {"status": v.status.value, "reason": v.reason, "certificate_exponent": v.certificate_exponent}
    if v.source:
        return _entry(name, "rule", v.status is expect, values, v.source)
    return _entry(name, "computed", v.status is expect, values)


# scenarios -------------------------------------------------------------------------

def _ell_values(cfg: dict, g: int) -> list[int]:
    ells = _grid(cfg, "ell")
    valid = range(1, 2 * (g - 1) + 1)
    return [e for e in ells if e in valid] if ells else list(valid)


def _verify_counterexample(cfg: dict) -> dict:
    results = []
    for p in _primes(_grid(cfg, "p", "2")):
        for g in _genera(_grid(cfg, "g", "2"), 2):
            ctx = CurveContext(p, g)
            ells = _ell_values(cfg, g)
            if not ells:
                raise ParameterError(f"empty grid: no valid ell for g={g}")
            for ell in ells:
                r = C.build_El(C.VlParameters.default(ctx, ell))
                tag = f"p={p},g={g},ell={ell}"
                results += _claims(f"V_ell {tag}", r.trace)
                v = r.verdict
                ok = v.status is StrongStatus.NOT_STRONGLY_SEMISTABLE and v.certificate_exponent == p
                results.append(_entry(
                    f"E_ell {tag}: rank {r.higgs.rank}, not strongly semistable", "computed", ok,
                    {"rank": r.higgs.rank, "degree": r.higgs.degree, "slope": r.higgs.slope,
                     "d_L": r.params.d_L, "certificate_exponent": v.certificate_exponent}))
                results.append(_verdict_entry(f"E_ell {tag}: verdict", v, StrongStatus.NOT_STRONGLY_SEMISTABLE))
    return {"results": results}


def _verify_big_rank(cfg: dict) -> dict:
    results = []
    for p in _primes(_grid(cfg, "p", "2")):
        for g in _genera(_grid(cfg, "g", "2"), 2):
            ranks = _grid(cfg, "rank") or list(range(p + 1, p + 5))
            for n in ranks:
                if n <= p:
                    raise ParameterError(f"rank {n} <= p = {p} is small rank")
                r = C.build_big_rank(CurveContext(p, g), n)
                v = r.verdict
                ok = (r.higgs.slope == g - 1 and r.higgs.exponent <= 1
                      and v.status is StrongStatus.NOT_STRONGLY_SEMISTABLE and v.certificate_exponent == p)
                results.append(_entry(
                    f"big rank p={p},g={g}: rank {n}, not strongly semistable", "computed", ok,
                    {"rank": r.higgs.rank, "degree": r.higgs.degree, "slope": r.higgs.slope,
                     "added_lines": r.copies, "higgs_exponent": r.higgs.exponent,
                     "certificate_exponent": v.certificate_exponent}))
                results.append(_verdict_entry(f"big rank p={p},g={g},rank={n}: verdict", v,
                                              StrongStatus.NOT_STRONGLY_SEMISTABLE))
    return {"results": results}


def _verify_tensor(cfg: dict) -> dict:
    results = []
    assumptions = Assumptions(bool(cfg.get("assume_generic")))
    for p in _primes(_grid(cfg, "p", "2")):
        for g in _genera(_grid(cfg, "g", "2"), 2):
            t = C.build_tensor_counterexample(CurveContext(p, g), assumptions)
            tag = f"p={p},g={g}"
            if t.unknown_reason:
                results.append(_entry(f"tensor {tag}: Unknown", "computed", False,
                                      {"status": StrongStatus.UNKNOWN.value, "reason": t.unknown_reason}))
                continue
            results += _claims(f"tensor {tag}", t.trace)
            results.append(_verdict_entry(f"tensor {tag}: E1", t.verdicts["E1"], StrongStatus.STRONGLY_SEMISTABLE))
            results.append(_verdict_entry(f"tensor {tag}: E2", t.verdicts["E2"], StrongStatus.STRONGLY_SEMISTABLE))
            vp = t.verdicts["product"]
            results.append(_verdict_entry(f"tensor {tag}: E1 * E2", vp, StrongStatus.NOT_STRONGLY_SEMISTABLE))
            results.append(_entry(
                f"tensor {tag}: certificate exponent is p", "computed", vp.certificate_exponent == p,
                {"certificate_exponent": vp.certificate_exponent, "e_prime_rank": t.e_prime.rank,
                 "e_prime_degree": t.e_prime.degree, "pieces": [x.rank for x in t.pieces]}))
    return {"results": results}


def _verify_extension(cfg: dict) -> dict:
    results = []
    for g in _genera(_grid(cfg, "g", "2..10"), 1):
        led = C.extension_example_ledger(CurveContext(2, g))
        ok = led.bound_A == 3 * g - 1 and led.h0_end_twisted == 4 * g - 2 and led.strict == (g > 1)
        results.append(_entry(
            f"extension g={g}: h0(A) <= {led.bound_A} vs h0(End V * K) = {led.h0_end_twisted}", "computed", ok,
            {"bound": led.bound_A, "h0_end": led.h0_end_twisted, "strict": led.strict, "boundary": led.boundary}))
    return {"results": results}


def scan_rows(cfg: dict) -> list[dict]:
    rows = []
    for p in _primes(_grid(cfg, "p", "2,3,5,7")):
        for g in _genera(_grid(cfg, "g", "2..6"), 2):
            ctx = CurveContext(p, g)
            for ell in _ell_values(cfg, g):
                params = C.VlParameters.default(ctx, ell)
                mu_v = params.vl_degree / (p + 1)
                ns = _grid(cfg, "n") or list(range(1, p))
                for n in (n for n in ns if 1 <= n < p):
                    red = C.reduced_expression(ctx, n, ell)
                    rows.append({
                        "p": p, "g": g, "ell": ell, "n": n,
                        "bound": frac(C.sub_slope_bound(params, n)),
                        "mu_V": frac(mu_v),
                        "reduced": red,
                        "strict": red > 0,
                        "equality": red == 0,
                        "sun_bound": frac(sun_bound(ctx, n)),
                    })
    return rows


def _scan(cfg: dict) -> dict:
    rows = scan_rows(cfg)
    if not rows:
        raise ParameterError("empty grid: the scan produced no rows")
    nonneg = all(r["reduced"] >= 0 for r in rows)
    locus = all(r["equality"] == (r["n"] == 1 and r["ell"] == 2 * (r["g"] - 1)) for r in rows)
    eq_rows = [[r["p"], r["g"], r["ell"], r["n"]] for r in rows if r["equality"]]
    results = [
        _entry("reduced expression is non-negative on the grid", "computed", nonneg, {"rows": len(rows)}),
        _entry("equality exactly at n = 1, ell = 2(g-1)", "computed", locus, {"equality_rows": eq_rows}),
    ]
    return {"results": results, "rows": rows}


def _flow(cfg: dict) -> dict:
    assumptions = Assumptions(bool(cfg.get("assume_generic")))
    term = load_term(cfg["input"], assumptions)
    steps = int(cfg.get("steps") or 1)
    if steps < 1:
        raise ParameterError("--steps must be positive")
    trace = run_flow(term, steps, assumptions)
    p = term.context.p
    expect = bool(cfg.get("expect_blocked"))
    results = []
    for s in trace.steps:
        ok = bool(s.semistable and s.exponent_ok)
        name = f"step {s.index}: Gr C^-1"
        if expect and trace.blocked and s.index == trace.blocked_at:
            name, ok = name + " blocks as expected", True
        kind = "rule" if s.source and not s.source.startswith("computed") else "computed"
        results.append(_entry(name, kind, ok, {
            "filtration": s.filtration_id, "degree": s.graded.degree if s.graded is not None else None,
            "semistable": s.semistable, "exponent_ok": s.exponent_ok}, s.source))
    if expect:
        cert = trace.certificate
        e = None if cert is None else nilpotency_exponent(cert)
        ok = trace.blocked and cert is not None and polystable_check(cert) and e > p - 1
        results.append(_entry("flow blocks with a polystable certificate of exponent > p-1", "computed", ok,
                              {"blocked_at": trace.blocked_at, "certificate_exponent": e, "p": p}))
    else:
        results.append(_entry("flow is not blocked", "computed", not trace.blocked,
                              {"status": trace.status.value, "reason": trace.reason}))
    return {"results": results, "trace": trace_to_json(trace)}


def _construct(cfg: dict) -> dict:
    target = cfg["target"]
    ps = _primes(_grid(cfg, "p", "2"))
    gs = _genera(_grid(cfg, "g", "2"), 1)
    if len(ps) != 1 or len(gs) != 1:
        raise ParameterError("construct takes a single p and g")
    ctx = CurveContext(ps[0], gs[0])
    assumptions = Assumptions(bool(cfg.get("assume_generic")))
    m = int(cfg.get("m") if cfg.get("m") is not None else 1)
    results: list[dict] = []
    if target == "chain-F":
        obj = C.build_chain_F(ctx, m)
    elif target == "uniformizing":
        obj = C.build_uniformizing(ctx)
    elif target == "sym":
        from .higgs_core import sym_uniformizing
        obj = sym_uniformizing(ctx, m)
    elif target in ("vl", "el"):
        ells = _grid(cfg, "ell") or [2 * (ctx.g - 1)]
        if len(ells) != 1:
            raise ParameterError("construct takes a single ell")
        r = C.build_El(C.VlParameters.default(ctx, ells[0]))
        results += _claims("V_ell", r.trace)
        if target == "vl":
            graded = r.flat.filtration("V_ell").graded
            return {"results": results, "object": higgs_to_json(graded),
                    "flat": {"rank": r.flat.rank, "degree": frac(r.flat.degree),
                             "p_curvature_exponent": r.flat.p_curvature_exponent}}
        obj = r.higgs
        results.append(_verdict_entry("verdict", r.verdict, StrongStatus.NOT_STRONGLY_SEMISTABLE))
    elif target == "big-rank":
        ranks = _grid(cfg, "rank") or [ctx.p + 2]
        r = C.build_big_rank(ctx, ranks[0])
        obj = r.higgs
        results.append(_verdict_entry("verdict", r.verdict, StrongStatus.NOT_STRONGLY_SEMISTABLE))
    elif target == "p2":
        flat = C.build_p2_flat(ctx)
        graded = flat.filtration("p2").graded
        twisted = C.p2_uniformizing_twist(ctx)
        results.append(_entry("graded of the p=2 flat bundle", "computed", True,
                              {"degrees": graded.degrees, "twist_available": twisted is not None}))
        return {"results": results, "object": higgs_to_json(graded)}
    elif target == "tensor":
        t = C.build_tensor_counterexample(ctx, assumptions)
        if t.unknown_reason:
            results.append(_entry("tensor: Unknown", "computed", False, {"reason": t.unknown_reason}))
            return {"results": results, "object": None}
        results += _claims("tensor", t.trace)
        obj = t.product
    elif target == "pushforward":
        from .frobenius import canonical_filtration_graded
        from .sheaf_algebra import LineClass
        obj = canonical_filtration_graded(ctx, LineClass.half_canonical(1 - ctx.p))
    else:
        raise ParameterError(f"unknown construct target {target!r}")
    results.append(_entry(f"constructed {target}", "computed", True,
                          {"rank": obj.rank, "degree": obj.degree}))
    data = opaque_to_json(obj) if hasattr(obj, "catalog") else term_to_json(obj)
    return {"results": results, "object": data}


def _oracle_check(cfg: dict) -> dict:
    q = int(cfg.get("field") or 3)
    max_rank = int(cfg.get("max_rank") or 5)
    cases = int(cfg.get("cases") or 200)
    seed = int(cfg.get("seed") or 0)
    if q not in oracle.FIELDS:
        raise BoundsError(f"--field must be one of {oracle.FIELDS}")
    if not 1 <= max_rank <= oracle.MAX_ENUM_DIM:
        raise BoundsError(f"--max-rank must lie in 1..{oracle.MAX_ENUM_DIM}")
    ctx2 = CurveContext(2, 2)
    suites = {
        "random chain-sums agree with the subset model":
            oracle.check_random_chain_sums(cases, q, seed, max_rank),
        "chains F^m (m <= 4, g = 2..5) agree":
            oracle.check_chain_family(
                [C.build_chain_F(CurveContext(2, g), m) for g in range(2, 6)
                 for m in range(0, min(4, max_rank - 1) + 1)], q),
        "arrow scalars 2 and 3 over F_5 give the same suprema":
            oracle.check_scalar_independence(10, seed, min(max_rank, 4)),
        "Jordan types of grids (total rank <= 8) agree":
            oracle.check_jordan_types(oracle.grid_cases(ctx2)),
        f"J_n(0) has n + 1 invariant subspaces over F_{q}":
            oracle.check_jordan_block_counts(q, max_rank),
    }
    results = []
    for name, bad in suites.items():
        results.append(_entry(name, "computed", not bad, {
            "mismatches": [{"case": m.case, "subset_model": m.subset_model, "brute_force": m.brute_force,
                            "higgs": higgs_to_json(m.higgs) if m.higgs is not None else None}
                           for m in bad]}))
    return {"results": results}


_VERIFY = {
    "counterexample": _verify_counterexample,
    "big-rank": _verify_big_rank,
    "tensor": _verify_tensor,
    "extension": _verify_extension,
}


def run_scenario(cfg: dict) -> dict:
    """Deterministic report body for a config."""
    cmd = cfg.get("command")
    if cmd == "verify":
        if cfg.get("target") not in _VERIFY:
            raise ParameterError(f"verify target must be one of {VERIFY_TARGETS}")
        body = _VERIFY[cfg["target"]](cfg)
    elif cmd == "scan":
        body = _scan(cfg)
    elif cmd == "flow":
        body = _flow(cfg)
    elif cmd == "construct":
        body = _construct(cfg)
    elif cmd == "oracle-check":
        body = _oracle_check(cfg)
    else:
        raise ParameterError(f"unknown command {cmd!r}")
    results = body.pop("results")
    passed = bool(results) and all(e["holds"] for e in results)
    return {"tool": TOOL, "version": VERSION, "config": plain(cfg), "results": results,
            "passed": passed, **plain(body)}


def make_report(cfg: dict) -> dict:
    t0 = time.perf_counter()
    body = run_scenario(cfg)
    body["timing"] = {"seconds": round(time.perf_counter() - t0, 6)}
    return body


def seed_from_env(default: int = 0) -> int:
    raw = os.environ.get("HIGGSFLOW_SEED")
    if raw is None or raw == "":
        return default
    try:
        return int(raw)
    except ValueError as exc:
        raise ParameterError(f"HIGGSFLOW_SEED must be an integer, got {raw!r}") from exc


# validation and rendering ------------------------------------------------------------

REQUIRED_KEYS = ("tool", "version", "config", "results", "passed")


def validate_report(report: dict, rerun: bool = True) -> list[str]:
    """Problems with a report; empty when every entry is tagged and the body reproduces."""
    problems = [f"missing key {k!r}" for k in REQUIRED_KEYS if k not in report]
    if problems:
        return problems
    for i, e in enumerate(report["results"]):
        kind = e.get("kind")
        if kind not in ("computed", "rule"):
            problems.append(f"result {i} has kind {kind!r}")
        elif kind == "rule" and not e.get("source"):
            problems.append(f"rule result {i} ({e.get('name')}) carries no citation")
    if report["passed"] != (bool(report["results"]) and all(e.get("holds") for e in report["results"])):
        problems.append("overall pass flag disagrees with the results")
    if rerun and not problems:
        fresh = json.loads(json.dumps(run_scenario(dict(report["config"]))))
        stored = {k: v for k, v in report.items() if k != "timing"}
        if fresh != stored:
            diff = sorted(k for k in set(fresh) | set(stored) if fresh.get(k) != stored.get(k))
            problems.append(f"recomputed report differs in {diff}")
    return problems


def render(report: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(report, indent=2) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        if "rows" in report:
            w = csv.DictWriter(buf, fieldnames=SCAN_COLUMNS, lineterminator="\n")
            w.writeheader()
            w.writerows(report["rows"])
        else:
            w = csv.writer(buf, lineterminator="\n")
            w.writerow(["name", "kind", "holds", "source"])
            for e in report["results"]:
                w.writerow([e["name"], e["kind"], e["holds"], e.get("source", "")])
        return buf.getvalue()
    lines = [f"{TOOL} {report['version']}: {report['config'].get('command')} "
             f"{report['config'].get('target') or ''}".rstrip()]
    for e in report["results"]:
        mark = "PASS" if e["holds"] else "FAIL"
        tag = f" [rule: {e['source']}]" if e["kind"] == "rule" else ""
        lines.append(f"  {mark} {e['name']}{tag}")
    lines.append("passed" if report["passed"] else "FAILED")
    return "\n".join(lines) + "\n"

