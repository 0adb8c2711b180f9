"""Command-line front end.

Every command prints one JSON RunReport on stdout and a short summary on
stderr.  Exit status: 0 for definite verdicts, 2 when anything is undecided,
1 for usage errors.  All results are at the invariant level.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from dataclasses import replace
from pathlib import Path
from typing import Sequence

from . import __version__
from .blowup import BlowupConfig, c_stability, verify_claims
from .certify import KINDS, CertifyBudget, certify, check_balanced_exactness, equivalence_report, verify_certificate
from .cohomology import compute_group
from .cones import SolverConfig, example_form, p_membership, sp_membership, wp_membership
from .exterior import Form
from .lie import ModelError, catalog_names, load_model, verify_model

SEED_ENV = "PKAHLER_SEED"

REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "RunReport",
    "type": "object",
    "required": ["tool", "version", "command", "config", "verdicts", "result", "timing"],
    "properties": {
        "tool": {"const": "pkahler"},
        "version": {"type": "string"},
        "command": {"type": "array", "items": {"type": "string"}},
        "config": {"type": "object"},
        "verdicts": {"type": "object", "additionalProperties": {"type": ["string", "boolean", "integer"]}},
        "result": {},
        "timing": {"type": "object", "required": ["seconds"], "properties": {"seconds": {"type": "number"}}},
    },
    "additionalProperties": False,
}

FLOAT_KEYS = ("eps", "tol", "blowup_eps", "margin")
INT_KEYS = ("seed", "restarts", "samples", "budget", "max_generators")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="pkahler", description="p-Kähler verification engine (invariant level).")
    ap.add_argument("--config", type=Path, help="JSON file with default values for the flags")
    ap.add_argument("--version", action="version", version=f"pkahler {__version__}")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def solver_flags(p):
        p.add_argument("--seed", type=int)
        p.add_argument("--eps", type=float, help="strictness margin")
        p.add_argument("--tol", type=float, help="numerical tolerance")
        p.add_argument("--restarts", type=int)

    m = sub.add_parser("models", help="catalog management")
    m.add_argument("action", choices=["list", "show", "verify"])
    m.add_argument("name", nargs="?")

    c = sub.add_parser("cohomology", help="de Rham / Bott-Chern / Aeppli dimensions")
    c.add_argument("--model", required=True)
    c.add_argument("--flavor", default="deRham", choices=["deRham", "BottChern", "Aeppli"])
    c.add_argument("--degree", type=int, help="degree (bidegree (k,k) for BottChern/Aeppli); default all")

    k = sub.add_parser("cone", help="membership in SP, P, WP")
    src = k.add_mutually_exclusive_group(required=True)
    src.add_argument("--form", type=Path, help="JSON form file")
    src.add_argument("--example", choices=["omega", "coordinate", "gamma"])
    k.add_argument("--n", type=int)
    k.add_argument("--p", type=int)
    k.add_argument("--cone", default="all", choices=["WP", "P", "SP", "all"])
    k.add_argument("--samples", type=int)
    solver_flags(k)

    ce = sub.add_parser("certify", help="existence or nonexistence certificate")
    ce.add_argument("--model", required=True)
    ce.add_argument("--p", type=int, required=True)
    ce.add_argument("--kind", required=True, choices=list(KINDS))
    ce.add_argument("--budget", type=int, help="cutting-plane rounds")
    ce.add_argument("--max-generators", dest="max_generators", type=int)
    solver_flags(ce)

    eq = sub.add_parser("equivalence", help="all four kinds on a parallelizable model")
    eq.add_argument("--model", required=True)
    eq.add_argument("--p", type=int, required=True)
    eq.add_argument("--budget", type=int)
    solver_flags(eq)

    b = sub.add_parser("balanced", help="closedness and exactness of omega^(n-1)")
    b.add_argument("--model", required=True)
    b.add_argument("--primitive", type=Path, help="JSON form to test as a d-primitive")

    bl = sub.add_parser("blowup", help="blow-up local model checks")
    bl.add_argument("action", choices=["verify"])
    bl.add_argument("--n", type=int, required=True)
    bl.add_argument("--p", type=int, required=True)
    bl.add_argument("--samples", type=int)
    bl.add_argument("--seed", type=int)
    bl.add_argument("--eps", dest="blowup_eps", type=float, help="cutoff radius")
    bl.add_argument("--margin", type=float, help="required margin on E")
    bl.add_argument("--no-c", dest="no_c", action="store_true", help="skip the estimate of c")
    return ap


def _settings(args: argparse.Namespace) -> dict:
    """Flags override the config file, which overrides the seed env var."""
    merged: dict = {}
    if os.environ.get(SEED_ENV):
        try:
            merged["seed"] = int(os.environ[SEED_ENV])
        except ValueError:
            raise UsageError(f"{SEED_ENV} must be an integer")
    if args.config is not None:
        try:
            data = json.loads(args.config.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config file: {exc}")
        if not isinstance(data, dict):
            raise UsageError("config file must hold a JSON object")
        for key, val in data.items():
            key = key.replace("-", "_")
            if key in FLOAT_KEYS:
                merged[key] = float(val)
            elif key in INT_KEYS:
                merged[key] = int(val)
            else:
                raise UsageError(f"unknown config key {key!r}")
    for key in FLOAT_KEYS + INT_KEYS:
        val = getattr(args, key, None)
        if val is not None:
            merged[key] = val
    return merged


def _solver(s: dict) -> SolverConfig:
    base = SolverConfig()
    kw = {k: s[k] for k in ("seed", "eps", "tol", "restarts", "samples") if k in s}
    try:
        return replace(base, **kw)
    except ValueError as exc:
        raise UsageError(str(exc))


def _budget(s: dict) -> CertifyBudget:
    b = CertifyBudget()
    if "budget" in s:
        b = replace(b, rounds=s["budget"])
    if "max_generators" in s:
        b = replace(b, max_generators=s["max_generators"])
    return b


def _model(name: str):
    try:
        return load_model(name)
    except (ModelError, ValueError, OSError) as exc:
        raise UsageError(str(exc))


# commands -------------------------------------------------------------------------------


def cmd_models(args, s):
    if args.action == "list":
        names = catalog_names()
        return {"catalog": names, "aliases": {"etabeta(3)": "iwasawa"}}, {}, "\n".join(names)
    if not args.name:
        raise UsageError("models show/verify needs a model name")
    model = _model(args.name)
    if args.action == "show":
        return model.to_json(), {}, f"{model.name}: n={model.n}"
    rep = verify_model(model)
    verdict = "pass" if rep.passed else "fail"
    return {"model": model.name, "d_squared_zero": rep.passed, "violations": rep.violations}, \
        {"structure_equations": verdict}, f"{model.name}: d^2 = 0 {verdict}"


def cmd_cohomology(args, s):
    model = _model(args.model)
    top = 2 * model.n if args.flavor == "deRham" else model.n
    degrees = [args.degree] if args.degree is not None else list(range(top + 1))
    groups = []
    for k in degrees:
        try:
            groups.append(compute_group(model, args.flavor, k).to_json())
        except ValueError as exc:
            raise UsageError(str(exc))
    dims = [g["dimension"] for g in groups]
    return {"model": model.name, "flavor": args.flavor, "level": "invariant", "degrees": degrees,
            "dimensions": dims, "groups": groups}, {}, f"{model.name} {args.flavor} dims {dims}"


def cmd_cone(args, s):
    cfg = _solver(s)
    if args.form is not None:
        try:
            form = Form.from_json(json.loads(args.form.read_text()))
        except (OSError, ValueError, KeyError) as exc:
            raise UsageError(f"cannot read form: {exc}")
    else:
        if args.n is None or args.p is None:
            raise UsageError("--example needs --n and --p")
        try:
            form = example_form(args.example, args.n, args.p)
        except ValueError as exc:
            raise UsageError(str(exc))
    tests = {"WP": wp_membership, "P": p_membership, "SP": sp_membership}
    names = list(tests) if args.cone == "all" else [args.cone]
    reports, verdicts = {}, {}
    for name in names:
        try:
            rep = tests[name](form, cfg)
        except ValueError as exc:
            raise UsageError(str(exc))
        reports[name] = rep.to_json()
        verdicts[name] = rep.verdict
    return {"form": form.to_json(), "reports": reports}, verdicts, \
        ", ".join(f"{k}: {v}" for k, v in verdicts.items())


def cmd_certify(args, s):
    model = _model(args.model)
    cfg = _solver(s)
    if not 1 <= args.p <= model.n - 1:
        raise UsageError(f"p must lie in 1..{model.n - 1}")
    cert = certify(model, args.p, args.kind, cfg, _budget(s))
    out = cert.to_json()
    verdicts = {"status": cert.status}
    if cert.status != "undecided":
        ok = verify_certificate(model, cert, cfg)
        out["reverified"] = ok
        verdicts["reverified"] = ok
    return out, verdicts, f"{model.name} p={args.p} {args.kind}: {cert.status} (invariant level)"


def cmd_equivalence(args, s):
    model = _model(args.model)
    if not 1 <= args.p <= model.n - 1:
        raise UsageError(f"p must lie in 1..{model.n - 1}")
    try:
        rep = equivalence_report(model, args.p, _solver(s), _budget(s))
    except ValueError as exc:
        raise UsageError(str(exc))
    rep.pop("_results")
    verdicts = dict(rep["verdicts"])
    verdicts["agree"] = rep["agree"]
    return rep, verdicts, f"{model.name} p={args.p}: {rep['verdicts']} agree={rep['agree']}"


def cmd_balanced(args, s):
    model = _model(args.model)
    prim = None
    if args.primitive is not None:
        try:
            prim = Form.from_json(json.loads(args.primitive.read_text()))
        except (OSError, ValueError, KeyError) as exc:
            raise UsageError(f"cannot read primitive: {exc}")
    rep = check_balanced_exactness(model, prim)
    verdicts = {"power_closed": rep["power_closed"]}
    if "d_exact" in rep:
        verdicts["d_exact"] = rep["d_exact"]["status"]
    if prim is not None:
        verdicts["supplied_primitive_ok"] = rep["supplied_primitive_ok"]
    return rep, verdicts, f"{model.name}: " + ", ".join(f"{k}={v}" for k, v in verdicts.items())


def cmd_blowup(args, s):
    kw = {}
    if "samples" in s:
        kw["samples"] = s["samples"]
    if "seed" in s:
        kw["seed"] = s["seed"]
    if "blowup_eps" in s:
        kw["eps"] = s["blowup_eps"]
    if "margin" in s:
        kw["margin"] = s["margin"]
    cfg = BlowupConfig(**kw)
    if args.n < 2 or not 1 <= args.p <= args.n - 1:
        raise UsageError("need n >= 2 and 1 <= p <= n-1")
    rep = verify_claims(args.n, args.p, cfg)
    verdicts = {"claims": "pass" if rep["passed"] else "fail"}
    if not args.no_c:
        rep["c_estimate"] = c_stability(args.n, args.p, None, cfg)
        stable = rep["c_estimate"]["relative_change"]
        verdicts["c_stable"] = bool(stable is not None and stable < 0.1)
    return rep, verdicts, f"blow-up n={args.n} p={args.p}: claims {verdicts['claims']} (sampled)"


COMMANDS = {
    "models": cmd_models,
    "cohomology": cmd_cohomology,
    "cone": cmd_cone,
    "certify": cmd_certify,
    "equivalence": cmd_equivalence,
    "balanced": cmd_balanced,
    "blowup": cmd_blowup,
}


def _exit_code(verdicts: dict) -> int:
    return 2 if any(v == "undecided" for v in verdicts.values()) else 0


def run(argv: Sequence[str] | None = None) -> tuple[int, dict | None]:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                            format="%(name)s: %(message)s", stream=sys.stderr)
        settings = _settings(args)
        start = time.perf_counter()
        result, verdicts, summary = COMMANDS[args.command](args, settings)
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        return 1, None
    report = {
        "tool": "pkahler",
        "version": __version__,
        "command": argv,
        "config": settings,
        "verdicts": verdicts,
        "result": result,
        "timing": {"seconds": round(time.perf_counter() - start, 6)},
    }
    print(summary, file=sys.stderr)
    return _exit_code(verdicts), report


def main(argv: Sequence[str] | None = None) -> int:
    code, report = run(argv)
    if report is not None:
        json.dump(report, sys.stdout, sort_keys=True, default=str)
        sys.stdout.write("\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
