"""Config-driven experiment runner.

    ergolab run CONFIG [--out DIR] [--seed N] [--max-N N] [--tolerance T] [--threads K]

Exit status: 0 when the experiment's checks pass, 2 when a check fails, 1 on
a configuration error (nothing is written in that case).
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import os
import sys
from fractions import Fraction

import jsonschema

from . import __version__
from .abgroup import AbGroup

EXPERIMENTS = ("limit-formula", "khintchine", "counterexample", "seminorms", "cl-group", "tower",
               "identity-b7", "vdc", "characteristic")

NUMBER = {
    "oneOf": [
        {"type": "integer"},
        {"type": "object", "required": ["kind", "value"], "additionalProperties": False,
         "properties": {"kind": {"enum": ["int", "rational", "float"]}, "value": {"type": "string"}}},
    ]
}

SYSTEM = {
    "type": "object", "required": ["type"],
    "properties": {
        "type": {"enum": ["rotation", "skew"]},
        "moduli": {"type": "array", "items": {"type": "integer", "minimum": 2}, "minItems": 1},
        "phi": {"type": "array", "items": {"type": "array", "items": {"type": "integer"}}},
        "acting": {"type": "object", "properties": {
            "free_rank": {"type": "integer", "minimum": 0},
            "torsion": {"type": "array", "items": {"type": "integer", "minimum": 2}}},
            "additionalProperties": False},
        "subs": {"type": "object", "additionalProperties": {"$ref": "#/$defs/number"}},
    },
    "additionalProperties": False,
}

OBSERVABLE = {
    "oneOf": [
        {"type": "object", "required": ["values"], "additionalProperties": False,
         "properties": {"values": {"type": "array", "items": {"$ref": "#/$defs/number"}, "minItems": 1}}},
        {"type": "object", "required": ["terms"], "additionalProperties": False,
         "properties": {"terms": {"type": "array", "items": {
             "type": "object", "required": ["m"], "additionalProperties": False,
             "properties": {"m": {"type": "array", "items": {"type": "integer"}, "minItems": 2, "maxItems": 2},
                            "c": {"$ref": "#/$defs/number"}, "phase": {"$ref": "#/$defs/number"}}}}}},
    ]
}

PARAMS = {
    "counterexample": {"required": ["d"], "properties": {"d": {"type": "integer", "minimum": 2, "maximum": 10}}},
    "khintchine": {"required": ["system", "A", "a", "b", "epsilon"], "properties": {
        "system": {"$ref": "#/$defs/system"}, "A": {"type": "array", "items": {"type": "integer", "minimum": 0}},
        "a": {"type": "integer"}, "b": {"type": "integer"}, "epsilon": {"$ref": "#/$defs/number"}}},
    "limit-formula": {"required": ["observables"], "properties": {
        "model": {"enum": ["skew"]}, "k": {"type": "integer", "minimum": 1, "maximum": 4},
        "pattern": {"type": "array", "items": {"type": "integer"}, "minItems": 2, "maxItems": 2},
        "observables": {"type": "array", "items": {"$ref": "#/$defs/observable"}, "minItems": 1, "maxItems": 4},
        "mc_samples": {"type": "integer", "minimum": 0}, "subs": {"type": "object"}}},
    "seminorms": {"required": ["system", "f"], "properties": {
        "system": {"$ref": "#/$defs/system"}, "f": {"$ref": "#/$defs/observable"},
        "k_max": {"type": "integer", "minimum": 1, "maximum": 3}}},
    "cl-group": {"required": ["d"], "properties": {"d": {"type": "integer", "minimum": 1, "maximum": 4}}},
    "tower": {"required": ["system", "depth"], "properties": {
        "system": {"$ref": "#/$defs/system"}, "depth": {"type": "integer", "minimum": 0, "maximum": 6},
        "n": {"type": "array", "items": {"type": "integer", "minimum": 2}}}},
    "identity-b7": {"required": ["moduli", "a", "b"], "properties": {
        "moduli": {"type": "array", "items": {"type": "integer", "minimum": 2}, "minItems": 1},
        "a": {"type": "integer"}, "b": {"type": "integer"}}},
    "vdc": {"required": ["family"], "properties": {
        "family": {"enum": ["orthonormal", "exponential", "quadratic", "random"]},
        "dim": {"type": "integer", "minimum": 1}, "N": {"type": "array", "items": {"type": "integer", "minimum": 1}},
        "H": {"type": "integer", "minimum": 1}}},
    "characteristic": {"required": ["system", "a", "b", "observables"], "properties": {
        "system": {"$ref": "#/$defs/system"}, "a": {"type": "integer"}, "b": {"type": "integer"},
        "observables": {"type": "array", "items": {"$ref": "#/$defs/observable"}, "minItems": 3, "maxItems": 3}}},
}


def build_schema() -> dict:
    branches = []
    for name, p in PARAMS.items():
        params = {"type": "object", "additionalProperties": False, **p}
        branches.append({"if": {"properties": {"experiment": {"const": name}}},
                         "then": {"properties": {"params": params}}})
    return {
        "$schema": "https://json-schema.org/draft/2020-12/schema",
        "type": "object",
        "required": ["experiment", "params"],
        "additionalProperties": False,
        "properties": {"experiment": {"enum": list(EXPERIMENTS)}, "seed": {"type": "integer"},
                       "params": {"type": "object"}, "description": {"type": "string"}},
        "allOf": branches,
        "$defs": {"number": NUMBER, "system": SYSTEM, "observable": OBSERVABLE},
    }


SCHEMA = build_schema()


class ConfigError(Exception):
    pass


def validate_config(cfg) -> list:
    """Schema violations as 'JSON-pointer: message' strings (empty when valid)."""
    v = jsonschema.Draft202012Validator(SCHEMA)
    out = []
    for err in sorted(v.iter_errors(cfg), key=lambda e: list(map(str, e.absolute_path))):
        ptr = "/" + "/".join(str(p) for p in err.absolute_path)
        out.append(f"{ptr}: {err.message}")
    return out


# --- interpreting config values ---------------------------------------------------------

def parse_number(x, where: str = ""):
    if isinstance(x, int):
        return x
    kind, val = x["kind"], x["value"]
    try:
        if kind == "int":
            return int(val)
        if kind == "rational":
            return Fraction(val)
        return float(val)
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"{where}: bad {kind} value {val!r}") from exc


def _exact(x, where: str) -> Fraction:
    v = parse_number(x, where)
    if isinstance(v, float):
        raise ConfigError(f"{where}: an exact (int or rational) value is required")
    return Fraction(v)


def build_system(spec: dict, where: str):
    from .phases import Phase
    from .systems import rotation_system, skew_product
    try:
        if spec["type"] == "rotation":
            if "moduli" not in spec or "phi" not in spec:
                raise ConfigError(f"{where}: rotation needs moduli and phi")
            K = AbGroup.from_moduli(spec["moduli"])
            acting = spec.get("acting")
            G = AbGroup(acting.get("free_rank", 0), tuple(acting.get("torsion", ()))) if acting else AbGroup(1)
            return rotation_system(K, [tuple(p) for p in spec["phi"]], G)
        return skew_product(Phase.symbol("alpha"), Phase.symbol("beta"))
    except ConfigError:
        raise
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def skew_subs(spec: dict | None) -> dict:
    from .nilhomog import DEFAULT_SUBS
    subs = dict(DEFAULT_SUBS)
    for k, v in (spec or {}).items():
        subs[k] = float(parse_number(v, f"/subs/{k}"))
    return subs


def build_observable(spec: dict, where: str, n: int | None = None):
    from .phases import ExactComplex, Phase
    from .systems import PointFunction, TrigPoly
    if "values" in spec:
        vals = [_exact(v, f"{where}/values/{i}") for i, v in enumerate(spec["values"])]
        if n is not None and len(vals) != n:
            raise ConfigError(f"{where}/values: {len(vals)} values for {n} points")
        return PointFunction(tuple(vals))
    f = TrigPoly()
    for i, t in enumerate(spec["terms"]):
        c = ExactComplex.from_rational(_exact(t.get("c", 1), f"{where}/terms/{i}/c"))
        if "phase" in t:
            c = c * ExactComplex.e(Phase(_exact(t["phase"], f"{where}/terms/{i}/phase")))
        f = f + TrigPoly.character(tuple(t["m"]), c)
    return f


# --- output helpers ------------------------------------------------------------------------------

def clean(obj):
    """JSON-ready copy: Fractions as strings, floats at 12 significant digits."""
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, str)):
        return obj
    if isinstance(obj, float):
        if math.isinf(obj) or math.isnan(obj):
            return str(obj)
        return float(f"{obj:.12g}")
    if isinstance(obj, complex):
        return [clean(obj.real), clean(obj.imag)]
    if isinstance(obj, dict):
        return {str(k): clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [clean(v) for v in obj]
    if hasattr(obj, "to_dict"):
        return clean(obj.to_dict())
    if hasattr(obj, "item"):
        return clean(obj.item())
    return str(obj)


def _fmt_cell(v) -> str:
    v = clean(v)
    if isinstance(v, list):
        return " ".join(str(x) for x in v)
    return str(v)


class Outcome:
    def __init__(self):
        self.passed = True
        self.result: dict = {}
        self.tables: dict = {}       # name -> (header, rows)
        self.plots: dict = {}        # name -> (xlabel, ylabel, points)
        self.checks: dict = {}

    def check(self, name: str, ok: bool):
        self.checks[name] = bool(ok)
        self.passed &= bool(ok)


# --- experiments ----------------------------------------------------------------------------------

def exp_counterexample(p, ctx, out: Outcome):
    from .nilhomog import counterexample_f2
    r = counterexample_f2(p["d"])
    out.result = r.to_dict()
    out.check("lhs_equals_f2", r.lhs_equals_f2)
    out.check("rhs_zero", r.rhs_zero)
    out.check("discrepancy_is_1", r.discrepancy == 1)
    out.tables["points"] = (["x", "u", "lhs", "rhs"],
                            [(list(x), u[0], r.lhs[i].to_dict(), r.rhs[i].to_dict())
                             for i, (x, u) in enumerate(r_points(p["d"]))])


def r_points(d):
    from .cocycles import counterexample_cocycle
    from .systems import abelian_extension
    rho = counterexample_cocycle(d)
    Y, _ = abelian_extension(rho.system, rho.target, rho)
    return list(Y.points)


def exp_khintchine(p, ctx, out: Outcome):
    from .recurrence import khintchine_scan
    X = build_system(p["system"], "/params/system")
    if p["system"]["type"] != "rotation":
        raise ConfigError("/params/system: khintchine needs a finite system")
    if any(i >= X.n for i in p["A"]):
        raise ConfigError("/params/A: index out of range")
    eps = parse_number(p["epsilon"], "/params/epsilon")
    r = ctx.run(lambda: khintchine_scan(X, p["A"], p["a"], p["b"], eps))
    out.result = r.to_dict()
    out.tables["khintchine"] = (["g", "correlation", "good"], [(list(g), c, ok) for g, c, ok in r.rows()])
    out.plots["correlation"] = ("g_index", "correlation", [(i, float(c)) for i, (_, c, _) in enumerate(r.rows())])
    out.check("good_nonempty", bool(r.good))
    out.check("zero_good", tuple(X.group.zero) in set(map(tuple, r.good)))


def exp_limit_formula(p, ctx, out: Outcome):
    from .nilhomog import SkewCLGroup, homogeneous_system, limit_formula_compare
    from .phases import Phase
    fs = [build_observable(o, f"/params/observables/{i}") for i, o in enumerate(p["observables"])]
    if any(not hasattr(f, "terms") for f in fs):
        raise ConfigError("/params/observables: the skew model needs trigonometric observables")
    if "pattern" in p:
        a, b = p["pattern"]
        coeffs = (a, b, a + b)
        if len(fs) != 3:
            raise ConfigError("/params/observables: a pattern needs three observables")
    else:
        k = p.get("k", len(fs))
        if k != len(fs):
            raise ConfigError("/params/k: k must equal the number of observables")
        coeffs = tuple(range(1, k + 1))
    subs = skew_subs(p.get("subs"))
    H = homogeneous_system(SkewCLGroup(), None, [(Phase.symbol("alpha"), 1, Phase.symbol("beta"))])
    mc = min(p.get("mc_samples", 0), ctx.max_N or 10**9)
    r = ctx.run(lambda: limit_formula_compare(H, fs, coeffs=coeffs, mc_samples=mc, seed=ctx.seed, subs=subs))
    out.result = {"coeffs": list(coeffs), "lhs_terms": r.lhs.to_list(), "rhs_terms": r.rhs.to_list(),
                  "equal": r.equal, "mc_residual": r.mc_residual, "mc_samples": mc}
    out.check("symbolic_equal", r.equal)
    if r.mc_residual is not None:
        out.check("monte_carlo", r.mc_residual <= ctx.tolerance(1e-2))


def exp_seminorms(p, ctx, out: Outcome):
    from .averages import fourier_u2, gowers_cubic_integral, gowers_recursive
    X = build_system(p["system"], "/params/system")
    if p["system"]["type"] != "rotation":
        raise ConfigError("/params/system: seminorms need a finite system")
    f = build_observable(p["f"], "/params/f", X.n)
    rows = []
    for k in range(1, p.get("k_max", 3) + 1):
        c = gowers_cubic_integral(X, f, k)
        r = gowers_recursive(X, f, k)
        from .phases import ExactComplex
        ok = ExactComplex.coerce(c) == ExactComplex.coerce(r)
        out.check(f"cubic_equals_recursive_k{k}", ok)
        rows.append((k, _exact_str(c), _exact_str(r), ok))
    out.tables["seminorms"] = (["k", "cubic", "recursive", "agree"], rows)
    res = {"rows": [list(r) for r in rows]}
    if X.is_ergodic():
        fu = fourier_u2(X, f)
        res["fourier_u2"] = _exact_str(fu)
        out.check("fourier_identity", _exact_str(fu) == rows[1][1] if len(rows) > 1 else True)
    out.result = res


def _exact_str(v) -> str:
    if isinstance(v, Fraction):
        return str(v)
    from .phases import ExactComplex
    v = ExactComplex.coerce(v)
    q = v.as_fraction()
    return str(q) if q is not None else json.dumps(clean(v.to_dict()), sort_keys=True)


def exp_cl_group(p, ctx, out: Outcome):
    from .cocycles import character_stabilizer, cl_group, counterexample_cocycle
    rho = counterexample_cocycle(p["d"])
    rep = ctx.run(lambda: cl_group(rho))
    out.result = rep.to_dict()
    out.check("membership_verified", rep.membership_verified)
    out.check("closed", rep.closed)
    out.check("two_step", rep.two_step)
    out.check("stabilizer_is_characters",
              {(e.s, e.F) for e in rep.stabilizer} == character_stabilizer(rho))
    out.result["stabilizer_is_characters"] = out.checks["stabilizer_is_characters"]


def exp_tower(p, ctx, out: Outcome):
    from .specext import divisible_tower
    X = build_system(p["system"], "/params/system")
    if p["system"]["type"] != "rotation":
        raise ConfigError("/params/system: towers need a finite system")
    stages = ctx.run(lambda: divisible_tower(X, p["depth"], tuple(p.get("n", [2]))))
    out.result = {"stages": [s.to_dict() for s in stages]}
    out.tables["tower"] = (["stage", "size", "group", "ergodic", "new_roots"],
                           [(s.stage, s.system.n, list(s.group), s.ergodic, len(s.new_roots)) for s in stages])
    out.plots["size"] = ("stage", "size", [(s.stage, s.system.n) for s in stages])
    out.check("all_ergodic", all(s.ergodic for s in stages))


def exp_identity_b7(p, ctx, out: Outcome):
    from .specext import verify_ab_set_identity
    try:
        U = AbGroup.from_moduli(p["moduli"])
    except ValueError as exc:
        raise ConfigError(f"/params/moduli: {exc}") from exc
    r = ctx.run(lambda: verify_ab_set_identity(U, p["a"], p["b"]))
    out.result = r.to_dict()
    if r.hypotheses_hold:
        out.check("sets_equal", r.equal)


def exp_vdc(p, ctx, out: Outcome):
    from .averages import vector_family, vdc_check
    Ns = p.get("N", [64, 256, 1024])
    if ctx.max_N:
        Ns = [n for n in Ns if n <= ctx.max_N] or [min(Ns)]
    G, xs = vector_family(p["family"], ctx.seed, p.get("dim", 3), max(Ns))
    r = ctx.run(lambda: vdc_check(G, xs, Ns, p.get("H"), tol=ctx.tolerance(1e-9)))
    out.result = {"rows": [list(x) for x in r.rows], "M_estimate": r.M_estimate, "min_slack": r.min_slack,
                  "passed": r.passed}
    out.tables["vdc"] = (["N", "lhs", "rhs", "slack"], r.rows)
    out.plots["slack"] = ("N", "slack", [(row[0], row[3]) for row in r.rows])
    out.check("inequality", r.passed)


def exp_characteristic(p, ctx, out: Outcome):
    from .averages import characteristic_compare
    X = build_system(p["system"], "/params/system")
    n = X.n if p["system"]["type"] == "rotation" else None
    fs = [build_observable(o, f"/params/observables/{i}", n) for i, o in enumerate(p["observables"])]
    r = ctx.run(lambda: characteristic_compare(X, p["a"], p["b"], fs))
    out.result = {"two_term_discrepancy": r.two_term_discrepancy, "three_term_discrepancy": r.three_term_discrepancy,
                  "exact_equal_two": r.exact_equal_two, "exact_equal_three": r.exact_equal_three, "note": r.note}
    out.check("two_term", r.exact_equal_two)
    out.check("three_term", r.exact_equal_three)


RUNNERS = {"counterexample": exp_counterexample, "khintchine": exp_khintchine,
           "limit-formula": exp_limit_formula, "seminorms": exp_seminorms, "cl-group": exp_cl_group,
           "tower": exp_tower, "identity-b7": exp_identity_b7, "vdc": exp_vdc,
           "characteristic": exp_characteristic}


class Context:
    def __init__(self, seed: int, max_N, tol, threads):
        self.seed = seed
        self.max_N = max_N
        self._tol = tol
        self.threads = threads

    def tolerance(self, default: float) -> float:
        return default if self._tol is None else self._tol

    @staticmethod
    def run(fn):
        # errors raised by validated-but-impossible inputs surface as config errors
        try:
            return fn()
        except (ValueError, NotImplementedError) as exc:
            raise ConfigError(str(exc)) from exc


# --- driver -----------------------------------------------------------------------------------------

def config_hash(cfg: dict) -> str:
    return hashlib.sha256(json.dumps(cfg, sort_keys=True, separators=(",", ":")).encode()).hexdigest()


def execute(cfg: dict, seed=None, max_N=None, tolerance=None, threads=1):
    """Run a validated config; returns (Outcome, report dict)."""
    errs = validate_config(cfg)
    if errs:
        raise ConfigError("; ".join(errs))
    seed = cfg.get("seed", 0) if seed is None else seed
    ctx = Context(seed, max_N, tolerance, threads)
    out = Outcome()
    RUNNERS[cfg["experiment"]](cfg["params"], ctx, out)
    report = {"experiment": cfg["experiment"], "config_sha256": config_hash(cfg), "version": __version__,
              "seed": seed, "passed": out.passed, "checks": out.checks, "result": out.result}
    if tolerance is not None:
        report["tolerance"] = tolerance
    if max_N is not None:
        report["max_N"] = max_N
    return out, clean(report)


def render_files(out: Outcome, report: dict) -> dict:
    files = {"report.json": json.dumps(report, sort_keys=True, indent=2) + "\n"}
    for name, (header, rows) in sorted(out.tables.items()):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt_cell(v) for v in row])
        files[f"{name}.csv"] = buf.getvalue()
    for name, (xl, yl, pts) in sorted(out.plots.items()):
        lines = [f"# {xl} {yl}"] + [f"{_fmt_cell(x)} {_fmt_cell(y)}" for x, y in pts]
        files[f"{name}.dat"] = "\n".join(lines) + "\n"
    return files


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="ergolab", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="cmd", required=True)
    r = sub.add_parser("run", help="run an experiment config")
    r.add_argument("config")
    r.add_argument("--out", default=None, help="output directory (default: ergolab-out/<experiment>)")
    r.add_argument("--seed", type=int, default=None)
    r.add_argument("--max-N", dest="max_N", type=int, default=None)
    r.add_argument("--tolerance", type=float, default=None)
    r.add_argument("--threads", type=int, default=1, help="accepted for compatibility; runs are serial")
    sub.add_parser("schema", help="print the config JSON schema")
    args = ap.parse_args(argv)
    if args.cmd == "schema":
        print(json.dumps(SCHEMA, sort_keys=True, indent=2))
        return 0
    try:
        with open(args.config) as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    try:
        out, report = execute(cfg, args.seed, args.max_N, args.tolerance, args.threads)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    files = render_files(out, report)
    dest = args.out or os.path.join("ergolab-out", cfg["experiment"])
    os.makedirs(dest, exist_ok=True)
    for name, text in files.items():
        with open(os.path.join(dest, name), "w") as fh:
            fh.write(text)
    status = "PASS" if out.passed else "FAIL"
    print(f"{cfg['experiment']}: {status} ({dest})")
    for name, ok in sorted(out.checks.items()):
        print(f"  {'ok  ' if ok else 'FAIL'} {name}")
    return 0 if out.passed else 2
