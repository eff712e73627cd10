"""``higgsflow`` command line.

Exit codes: 0 success, 1 verification failure (Unknown included), 2 usage or
configuration error.
"""
from __future__ import annotations

import argparse
import json
import sys

from .errors import BoundsError, HiggsFlowError, InternalInconsistency, ParameterError
from .report import CONSTRUCT_TARGETS, VERIFY_TARGETS, make_report, render, seed_from_env, validate_report

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _common(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--p", help="prime(s): '2', '2,3' or '2..7'")
    sp.add_argument("--g", help="genus or genera, same syntax as --p")
    sp.add_argument("--assume-generic", action="store_true", help="assume the curve is generic (needed for odd p)")
    sp.add_argument("--format", choices=("json", "text", "csv"), default="json")
    sp.add_argument("--out", help="write the report here instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="higgsflow", description="Exact checks for nilpotent Higgs bundles in characteristic p.")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    v = sub.add_parser("verify", help="run a verifier")
    v.add_argument("target", choices=VERIFY_TARGETS)
    _common(v)
    v.add_argument("--ell", help="ell value(s); defaults to every valid ell")
    v.add_argument("--rank", help="target rank(s) for big-rank")

    s = sub.add_parser("scan", help="sweep the reduced stability inequality")
    _common(s)
    s.add_argument("--ell")
    s.add_argument("--n", help="subbundle rank(s); defaults to 1..p-1")

    f = sub.add_parser("flow", help="run the Higgs-de Rham flow from a JSON object file")
    f.add_argument("input", help="JSON file: a catalog reference, a Higgs bundle, or a construct report ('-' for stdin)")
    f.add_argument("--steps", type=int, default=1)
    f.add_argument("--expect-blocked", action="store_true")
    f.add_argument("--assume-generic", action="store_true")
    f.add_argument("--format", choices=("json", "text", "csv"), default="json")
    f.add_argument("--out")

    c = sub.add_parser("construct", help="build a named object and print its JSON")
    c.add_argument("target", choices=CONSTRUCT_TARGETS)
    _common(c)
    c.add_argument("--ell")
    c.add_argument("--rank")
    c.add_argument("--m", type=int, help="power for chain-F and sym")

    o = sub.add_parser("oracle-check", help="compare the subset model with brute force")
    o.add_argument("--field", type=int, default=3)
    o.add_argument("--max-rank", type=int, default=5)
    o.add_argument("--cases", type=int, default=200)
    o.add_argument("--format", choices=("json", "text", "csv"), default="json")
    o.add_argument("--out")

    val = sub.add_parser("validate", help="check a saved report by recomputing it")
    val.add_argument("report")
    return ap


def _read_json(path: str):
    try:
        if path == "-":
            return json.load(sys.stdin)
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise ParameterError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParameterError(f"{path} is not valid JSON: {exc}") from exc


def config_from_args(ns: argparse.Namespace) -> dict:
    cfg = {"command": ns.command}
    for key in ("target", "p", "g", "ell", "rank", "n", "m", "steps", "field", "max_rank", "cases"):
        val = getattr(ns, key, None)
        if val is not None:
            cfg[key] = val
    for flag in ("assume_generic", "expect_blocked"):
        if getattr(ns, flag, False):
            cfg[flag] = True
    if ns.command == "flow":
        data = _read_json(ns.input)
        if isinstance(data, dict) and data.get("tool") and "object" in data:
            data = data["object"]
        cfg["input"] = data
    if ns.command == "oracle-check":
        cfg["seed"] = seed_from_env()
    return cfg


def main(argv: list[str] | None = None) -> int:
    ns = build_parser().parse_args(argv)
    try:
        if ns.command == "validate":
            problems = validate_report(_read_json(ns.report))
            for p in problems:
                print(p, file=sys.stderr)
            print("valid" if not problems else "invalid")
            return EXIT_OK if not problems else EXIT_FAIL
        cfg = config_from_args(ns)
        report = make_report(cfg)
    except (ParameterError, BoundsError) as exc:
        print(f"higgsflow: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InternalInconsistency as exc:
        print(f"higgsflow: internal check failed: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except HiggsFlowError as exc:
        print(f"higgsflow: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    text = render(report, ns.format)
    if ns.out:
        with open(ns.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK if report["passed"] else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
