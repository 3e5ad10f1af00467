"""Command-line driver: run a scenario, sweep one parameter, or list the catalog.

Scenario files are JSON objects::

    {
      "name": "sine",
      "kind": "main",
      "construction": {"name": "sine_eigenpair", "params": {"cells": 128}},
      "exponent": {"q": 1.0},
      "options": {"tol": 1e-6},
      "sweep": {"parameter": "cells", "values": [64, 128]}
    }

``kind`` is a certificate kind, ``"constant"``, ``"extremal"`` or
``"catalog"``.  Instead of ``construction`` a scenario may give an inline
``table`` (domain, nodes or cells, u values, V values or ``"manufactured"``)
or a seeded ``trial`` profile (domain, seed, modes, cells).

Exit codes: 0 when every certificate passes, 1 when any fails or is vacuous,
2 on malformed input or evaluation errors.
"""

from __future__ import annotations

import argparse
import copy
import csv
import io
import json
import math
import sys
import time
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from . import __version__
from .constructions import CATALOG, CATALOG_CLAIMS, build, hardy_trial, manufactured_solution
from .core_model import Annulus, Ball, Domain, GridFunction, Interval, Potential, RadialGrid, conjugate, make_grid
from .extremals import closed_form_constant, maximize_constant
from .verify import KINDS, Case, Certificate, check_certificate

SPECIAL_KINDS = ("constant", "extremal", "catalog")
CASE_OPTIONS = ("E", "C2", "lambda_scan", "tol", "residual_tol", "hardy_weight", "beta", "s")


class ScenarioError(ValueError):
    """Malformed scenario; ``field`` names the offending entry."""

    def __init__(self, field: str, message: str):
        super().__init__(f"field {field!r}: {message}")
        self.field = field


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------


def load_scenario(path) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ScenarioError("--scenario", f"cannot read {path}: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError("<file>", f"JSON parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if not isinstance(data, dict):
        raise ScenarioError("<file>", "the scenario must be a JSON object")
    return data


def _number(value, field: str, positive: bool = False, integer: bool = False) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float, str)):
        raise ScenarioError(field, f"expected a number, got {value!r}")
    try:
        x = float(value)
    except ValueError:
        raise ScenarioError(field, f"expected a number, got {value!r}") from None
    if math.isnan(x):
        raise ScenarioError(field, "NaN is not allowed")
    if positive and not x > 0:
        raise ScenarioError(field, f"must be positive, got {value!r}")
    if integer:
        if x != int(x):
            raise ScenarioError(field, f"expected an integer, got {value!r}")
        return int(x)
    return x


def parse_domain(spec, field: str = "domain") -> Domain:
    if not isinstance(spec, dict):
        raise ScenarioError(field, f"expected an object with a 'type', got {spec!r}")
    kind = spec.get("type")
    try:
        if kind == "interval":
            b = _number(spec.get("half_length", 0.5), f"{field}.half_length", positive=True)
            return Interval(b, _number(spec.get("center", 0.0), f"{field}.center"))
        if kind == "ball":
            if "n" not in spec:
                raise ScenarioError(f"{field}.n", "missing")
            n = _number(spec["n"], f"{field}.n", positive=True, integer=True)
            return Ball(n, _number(spec.get("radius", 1.0), f"{field}.radius", positive=True))
        if kind == "annulus":
            for key in ("n", "inner", "outer"):
                if key not in spec:
                    raise ScenarioError(f"{field}.{key}", "missing")
            n = _number(spec["n"], f"{field}.n", positive=True, integer=True)
            return Annulus(n, _number(spec["inner"], f"{field}.inner", positive=True), _number(spec["outer"], f"{field}.outer", positive=True))
    except ScenarioError:
        raise
    except ValueError as exc:
        raise ScenarioError(field, str(exc)) from None
    raise ScenarioError(f"{field}.type", f"expected 'interval', 'ball' or 'annulus', got {kind!r}")


def parse_exponent(spec, field: str = "exponent") -> float:
    """Return q from ``{"q": ...}`` or ``{"r": ...}`` (``"inf"`` allowed)."""
    if not isinstance(spec, dict) or not ({"q", "r"} & set(spec)):
        raise ScenarioError(field, "expected an object with 'q' or 'r'")
    if "q" in spec:
        q = _number(spec["q"], f"{field}.q")
        if not q >= 1:
            raise ScenarioError(f"{field}.q", f"must be >= 1, got {spec['q']!r}")
        return q
    r = _number(spec["r"], f"{field}.r")
    if not r >= 1:
        raise ScenarioError(f"{field}.r", f"must be >= 1, got {spec['r']!r}")
    return conjugate(r)


def validate(sc: dict) -> None:
    name = sc.get("name", "")
    if not isinstance(name, str):
        raise ScenarioError("name", "expected a string")
    kind = sc.get("kind")
    if kind not in KINDS and kind not in SPECIAL_KINDS:
        raise ScenarioError("kind", f"unknown kind {kind!r}")
    opts = sc.get("options", {})
    if not isinstance(opts, dict):
        raise ScenarioError("options", "expected an object")
    for key in opts:
        if key not in CASE_OPTIONS + ("cells", "refine", "seed"):
            raise ScenarioError(f"options.{key}", "unknown option")
    if "cells" in opts:
        c = _number(opts["cells"], "options.cells", positive=True, integer=True)
        if c < 16:
            raise ScenarioError("options.cells", f"need at least 16 cells, got {c}")
    for key in ("tol", "residual_tol", "C2"):
        if key in opts:
            _number(opts[key], f"options.{key}", positive=True)
    if "lambda_scan" in opts:
        _number(opts["lambda_scan"], "options.lambda_scan", positive=True, integer=True)
    if kind == "catalog":
        return
    if kind in ("constant", "extremal"):
        parse_domain(sc.get("domain"))
        parse_exponent(sc.get("exponent"))
        return
    sources = [k for k in ("construction", "table", "trial") if k in sc]
    if len(sources) != 1:
        raise ScenarioError("construction", "give exactly one of 'construction', 'table' or 'trial'")
    if "construction" in sc:
        con = sc["construction"]
        if not isinstance(con, dict) or con.get("name") not in CATALOG:
            got = con.get("name") if isinstance(con, dict) else con
            raise ScenarioError("construction.name", f"unknown construction {got!r}")
        if not isinstance(con.get("params", {}), dict):
            raise ScenarioError("construction.params", "expected an object")
        if isinstance(con.get("params", {}).get("domain"), dict):
            parse_domain(con["params"]["domain"], "construction.params.domain")
    elif "table" in sc:
        parse_domain(sc["table"].get("domain") if isinstance(sc["table"], dict) else None, "table.domain")
    else:
        parse_domain(sc["trial"].get("domain") if isinstance(sc["trial"], dict) else None, "trial.domain")
    if "exponent" in sc:
        parse_exponent(sc["exponent"])


def parse_sweep(sc: dict, flag: Optional[str]) -> Tuple[str, List[Any]]:
    """The single swept parameter and its values; the --sweep flag wins."""
    if flag is not None:
        if flag.count("=") != 1:
            raise ScenarioError("--sweep", "expected NAME=v1,v2,...")
        name, raw = flag.split("=")
        values = [json.loads(v) if v.strip() not in ("inf", "-inf") else float(v) for v in raw.split(",") if v.strip()]
        if not name or not values:
            raise ScenarioError("--sweep", "expected NAME=v1,v2,...")
        return name.strip(), values
    spec = sc.get("sweep")
    if spec is None:
        raise ScenarioError("sweep", "missing; give a 'sweep' object or --sweep")
    if isinstance(spec, list):
        if len(spec) != 1:
            raise ScenarioError("sweep", f"exactly one swept parameter is supported, got {len(spec)}")
        spec = spec[0]
    if not isinstance(spec, dict) or set(spec) != {"parameter", "values"}:
        raise ScenarioError("sweep", "expected {'parameter': name, 'values': [...]}")
    values = spec["values"]
    if isinstance(spec["parameter"], list):
        raise ScenarioError("sweep.parameter", "exactly one swept parameter is supported")
    if not isinstance(values, list) or not values:
        raise ScenarioError("sweep.values", "expected a nonempty list")
    return str(spec["parameter"]), values


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------


def _table_case(spec: dict, cells_override) -> Tuple[GridFunction, Potential]:
    domain = parse_domain(spec.get("domain"), "table.domain")
    if "nodes" in spec:
        try:
            grid = RadialGrid(spec["nodes"], domain)
        except (ValueError, TypeError) as exc:
            raise ScenarioError("table.nodes", str(exc)) from None
    else:
        cells = cells_override or _number(spec.get("cells", 0), "table.cells", positive=True, integer=True)
        grid = make_grid(domain, cells)
    u_vals = np.asarray(spec.get("u", []), dtype=float)
    if u_vals.shape != grid.nodes.shape:
        raise ScenarioError("table.u", f"expected {grid.nodes.size} values, got {u_vals.size}")
    u = GridFunction(grid, u_vals)
    V_spec = spec.get("V")
    if V_spec == "manufactured":
        return u, manufactured_solution(u).V
    V_vals = np.asarray(V_spec if V_spec is not None else [], dtype=float)
    if V_vals.shape != grid.nodes.shape:
        raise ScenarioError("table.V", f"expected {grid.nodes.size} values or 'manufactured'")
    return u, Potential(GridFunction(grid, V_vals))


def make_case(sc: dict, overrides: dict) -> Tuple[Case, dict]:
    """Build the Case for a certificate scenario; also return construction quantities."""
    opts = {**sc.get("options", {}), **overrides}
    extras = {k: opts[k] for k in CASE_OPTIONS if k in opts}
    if "exponent" in sc:
        extras["exponent"] = {"q": parse_exponent(sc["exponent"])}
    quantities: Dict[str, float] = {}
    if "construction" in sc:
        con = sc["construction"]
        params = dict(con.get("params", {}))
        for key, value in overrides.items():
            if key not in CASE_OPTIONS and key not in ("seed", "refine"):
                params[key] = value
        if "cells" in opts:
            params["cells"] = opts["cells"]
        if isinstance(params.get("domain"), dict):
            params["domain"] = parse_domain(params["domain"], "construction.params.domain")
        try:
            rec = build(con["name"], **params)
        except TypeError as exc:
            raise ScenarioError("construction.params", str(exc)) from None
        quantities = {k: float(v) for k, v in rec.quantities.items() if np.isscalar(v)}
        own = rec.scenario.get("exponent")
        if "exponent" in extras and own is not None and Case(rec.u, exponent=own).q != extras["exponent"]["q"]:
            # the record's constant belongs to its own exponent
            extras.update(K=None, K_provenance=None)
        return Case.from_record(rec, **extras), quantities
    if "table" in sc:
        u, V = _table_case(sc["table"], opts.get("cells"))
        return Case(u=u, V=V, **extras), quantities
    spec = sc["trial"]
    domain = parse_domain(spec.get("domain"), "trial.domain")
    seed = int(opts.get("seed", spec.get("seed", 0)))
    cells = int(opts.get("cells", spec.get("cells", 128)))
    u = hardy_trial(domain, seed, int(spec.get("modes", 6)), cells)
    extras.setdefault("hardy_weight", spec.get("hardy_weight"))
    return Case(u=u, **extras), quantities


def _constant_entry(sc: dict, overrides: dict) -> dict:
    opts = {**sc.get("options", {}), **overrides}
    domain = parse_domain(sc["domain"])
    q = parse_exponent(sc["exponent"])
    res = maximize_constant(domain, q, size=int(opts.get("cells", 256)), refine=bool(opts.get("refine", False)))
    closed = closed_form_constant(domain, q)
    return {
        "domain": repr(domain),
        "q": q,
        "K": res.K,
        "closed_form": closed,
        "iterations": res.iterations,
        "residual": res.residual,
        "converged": res.converged,
        "refinement": [[c, k] for c, k in res.refinement],
        "refinement_order": res.refinement_order,
        "extrapolated": res.extrapolated,
    }


def evaluate(sc: dict, overrides: Optional[dict] = None) -> Tuple[List[Certificate], dict]:
    """Certificates for one scenario plus side information (constants, record quantities)."""
    overrides = overrides or {}
    kind = sc["kind"]
    if kind == "catalog":
        return [], {"catalog": catalog_listing()}
    if kind == "constant":
        return [], {"constants": [_constant_entry(sc, overrides)]}
    if kind == "extremal":
        opts = {**sc.get("options", {}), **overrides}
        dom = parse_domain(sc["domain"])
        q = parse_exponent(sc["exponent"])
        rec = build("euler_lagrange_pair", domain=dom, q=q, cells=int(opts.get("cells", 128)))
        cert = check_certificate("main", Case.from_record(rec, **{k: opts[k] for k in CASE_OPTIONS if k in opts}))
        return [cert], {"constants": [_constant_entry(sc, overrides)]}
    case, quantities = make_case(sc, overrides)
    cert = check_certificate(kind, case)
    side: dict = {"construction_quantities": quantities} if quantities else {}
    if sc.get("options", {}).get("refine"):
        side["refinement"] = _refinement_table(sc, overrides, case.grid.size)
    return [cert], side


def _refinement_table(sc: dict, overrides: dict, cells: int) -> List[dict]:
    rows = []
    for c in (cells, 2 * cells, 4 * cells):
        case, _ = make_case(sc, {**overrides, "cells": c})
        cert = check_certificate(sc["kind"], case)
        rows.append({"cells": c, "lhs": cert.lhs, "slack": cert.slack, "residual": cert.residual})
    return rows


def catalog_listing() -> List[dict]:
    out = []
    for name in sorted(CATALOG):
        _, defaults = CATALOG[name]
        claims = CATALOG_CLAIMS[name]
        out.append({"name": name, "parameters": dict(sorted(defaults.items())), "claims": {k: claims[k] for k in sorted(claims)}})
    return out


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def to_jsonable(obj):
    """Plain JSON values; non-finite floats become the strings 'inf', '-inf', 'nan'."""
    if isinstance(obj, Certificate):
        return to_jsonable(obj.to_dict())
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isfinite(x):
            return x
        return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if obj is None or isinstance(obj, str):
        return obj
    if callable(obj):
        return getattr(obj, "__name__", type(obj).__name__)
    return repr(obj)


def dump_json(obj) -> str:
    return json.dumps(to_jsonable(obj), indent=2, sort_keys=True, allow_nan=False) + "\n"


def make_report(sc: dict, certs: List[Certificate], side: dict, seconds: float, rows: Optional[List[dict]] = None) -> dict:
    report = {
        "toolkit_version": __version__,
        "scenario": sc,
        "certificates": [c.to_dict() for c in certs],
        "timing": {"seconds": seconds},
        **side,
    }
    if rows is not None:
        report["sweep"] = rows
    return report


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return "%.17g" % float(x)
    if x is None:
        return ""
    return str(x)


def sweep_row(value, cert: Certificate, quantities: dict) -> dict:
    row = {"parameter": value, "lhs": cert.lhs, "rhs": cert.rhs, "slack": cert.slack, "pass": cert.passed}
    for k, v in cert.quantities:
        row.setdefault(k, v)
    for k, v in quantities.items():
        row.setdefault(f"construction_{k}", v)
    return row


def write_csv(rows: List[dict]) -> str:
    header: List[str] = []
    for row in rows:
        header += [k for k in row if k not in header]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(row.get(k)) for k in header])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def _overrides(args) -> dict:
    out = {}
    if getattr(args, "grid", None) is not None:
        if args.grid < 16:
            raise ScenarioError("--grid", f"need at least 16 cells, got {args.grid}")
        out["cells"] = args.grid
    if getattr(args, "tol", None) is not None:
        if not args.tol > 0:
            raise ScenarioError("--tol", "must be positive")
        out["tol"] = args.tol
    if getattr(args, "seed", None) is not None:
        out["seed"] = args.seed
    return out


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8", newline="\n")
    else:
        sys.stdout.write(text)


def _exit_code(certs: List[Certificate], side: dict) -> int:
    ok = all(c.passed for c in certs)
    ok = ok and all(e.get("converged", True) for e in side.get("constants", []))
    return 0 if ok else 1


def cmd_run(args) -> int:
    sc = load_scenario(args.scenario)
    validate(sc)
    t0 = time.perf_counter()
    certs, side = evaluate(sc, _overrides(args))
    seconds = time.perf_counter() - t0
    if args.format == "csv":
        rows = [sweep_row(sc.get("name", ""), c, side.get("construction_quantities", {})) for c in certs]
        _emit(write_csv(rows), args.out)
    else:
        _emit(dump_json(make_report(sc, certs, side, seconds)), args.out)
    for c in certs:
        if c.vacuous or not c.passed:
            note = c.metadata.get("annotation", "inequality fails")
            print(f"{c.kind}: FAIL ({note}); lhs={c.lhs:.6g} rhs={c.rhs:.6g}", file=sys.stderr)
    return _exit_code(certs, side)


def cmd_sweep(args) -> int:
    sc = load_scenario(args.scenario)
    validate(sc)
    if sc["kind"] in SPECIAL_KINDS:
        raise ScenarioError("kind", "sweeps need a certificate kind")
    name, values = parse_sweep(sc, args.sweep)
    base = _overrides(args)
    t0 = time.perf_counter()
    rows, certs = [], []
    for value in values:
        point = copy.deepcopy(sc)
        over = dict(base)
        if name in ("q", "r"):
            point["exponent"] = {name: value}
            params = point.get("construction", {}).get("params")
            if params is not None and "q" in CATALOG[point["construction"]["name"]][1]:
                params["q"] = conjugate(float(value)) if name == "r" else value
        else:
            over[name] = value
        cert_list, side = evaluate(point, over)
        certs += cert_list
        rows += [sweep_row(value, c, side.get("construction_quantities", {})) for c in cert_list]
    seconds = time.perf_counter() - t0
    if args.format == "csv":
        _emit(write_csv(rows), args.out)
    else:
        _emit(dump_json(make_report(sc, certs, {"swept_parameter": name}, seconds, rows)), args.out)
    return _exit_code(certs, {})


def cmd_catalog(args) -> int:
    listing = catalog_listing()
    if args.format == "csv":
        rows = [{"name": e["name"], "claims": " ".join(e["claims"]), "parameters": json.dumps(e["parameters"], sort_keys=True)} for e in listing]
        _emit(write_csv(rows), args.out)
    else:
        _emit(dump_json({"toolkit_version": __version__, "catalog": listing}), args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="minsupport", description="Certificates for minimal-support inequalities.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, scenario=True):
        if scenario:
            p.add_argument("--scenario", required=True, help="scenario JSON file")
        p.add_argument("--out", default=None, help="output path (default: stdout)")
        p.add_argument("--format", choices=("report", "csv"), default="report")
        p.add_argument("--grid", type=int, default=None, help="number of grid cells")
        p.add_argument("--tol", type=float, default=None, help="certificate tolerance")
        p.add_argument("--seed", type=int, default=None, help="seed for random trial profiles")

    p = sub.add_parser("run", help="evaluate one scenario")
    common(p)
    p.set_defaults(func=cmd_run)
    p = sub.add_parser("sweep", help="evaluate a scenario over one parameter")
    common(p)
    p.add_argument("--sweep", default=None, help="NAME=v1,v2,... (overrides the scenario's sweep)")
    p.set_defaults(func=cmd_sweep)
    p = sub.add_parser("catalog", help="list the construction catalog")
    common(p, scenario=False)
    p.set_defaults(func=cmd_catalog)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, KeyError, TypeError, FloatingPointError, RuntimeError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
