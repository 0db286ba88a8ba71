"""Command-line interface.

Exit codes: 0 success or Certified, 1 Falsified, 2 usage or parameter
error, 3 Inconclusive.  Structured results are JSON (with a
``schema_version``), tables are CSV with a header row.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import re
import sys
from pathlib import Path

import numpy as np

from . import certifier as cert
from . import extremals as ext
from . import minimizer as mz
from .exceptions import HardySeriesError
from .functionals import HardyParams, RadialProfile, rayleigh_quotient, rayleigh_quotient_degenerate
from .geometry import from_cli
from .quadrature import (BetaExponents, Finiteness, classify_finiteness, divergence_probe,
                         singular_radial_integral)
from .special_functions import dxk_dt, xk

SCHEMA_VERSION = 1
EXIT_OK, EXIT_FALSIFIED, EXIT_USAGE, EXIT_INCONCLUSIVE = 0, 1, 2, 3
_VERDICT_EXIT = {cert.Verdict.CERTIFIED: EXIT_OK, cert.Verdict.FALSIFIED: EXIT_FALSIFIED,
                 cert.Verdict.INCONCLUSIVE: EXIT_INCONCLUSIVE}


class UsageError(Exception):
    pass


# -- serialisation ---------------------------------------------------------------------

_FLOAT_TAG = "\x00f"
_FLOAT_RE = re.compile(r'"\\u0000f([^"]*)"')


def fmt_float(x):
    """17 significant digits, which round-trips every double."""
    s = format(float(x), ".17g")
    return s if any(ch in s for ch in ".eEn") else s + ".0"


def _tag_floats(obj):
    if isinstance(obj, dict):
        return {k: _tag_floats(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_tag_floats(v) for v in obj]
    if isinstance(obj, float):
        return _FLOAT_TAG + fmt_float(obj)
    return obj


def _clean(obj):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to strings."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_clean(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else repr(x)
    if isinstance(obj, np.integer):
        return int(obj)
    if hasattr(obj, "value") and isinstance(getattr(obj, "value"), str):
        return obj.value
    return obj


def dumps_json(command, config, result):
    doc = {"schema_version": SCHEMA_VERSION, "command": command, "config": config,
           "result": result}
    text = json.dumps(_tag_floats(_clean(doc)), indent=2, sort_keys=True)
    return _FLOAT_RE.sub(lambda mt: mt.group(1), text) + "\n"


def dumps_csv(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt_float(x) if isinstance(x, (float, np.floating)) else x for x in row])
    return buf.getvalue()


def _floats(text, name):
    try:
        vals = [float(x) for x in str(text).replace(";", ",").split(",") if x.strip()]
    except ValueError as exc:
        raise UsageError(f"{name}: expected comma-separated numbers, got {text!r}") from exc
    if not vals:
        raise UsageError(f"{name}: empty list")
    return vals


def _config(args):
    skip = {"func", "out"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


# -- shared argument groups --------------------------------------------------------------

def _add_geometry(p):
    p.add_argument("--geometry", choices=("point", "tube", "boundary"), default=None,
                   help="default: point if k = N, boundary if k = 1, else tube")
    p.add_argument("--dim", type=int, default=None,
                   help="ambient dimension N (default k, or 3 when k = 1)")
    p.add_argument("--k", "--codim", dest="codim", type=int, default=None,
                   help="codimension k of the singular set")
    p.add_argument("--delta", type=float, default=1.0, help="sup of d over the domain")
    p.add_argument("--cross-measure", type=float, default=1.0)


def _add_problem(p):
    p.add_argument("--p", type=float, default=2.0)
    p.add_argument("--m", type=int, default=1)
    p.add_argument("--D-factor", dest="D_factor", type=float, default=1.0,
                   help="scale D as a multiple of delta")
    p.add_argument("--gamma", type=float, default=2.0)


def resolve_geometry(geometry, dim, k):
    """Fill in whichever of geometry, N and k was left out."""
    if dim is None:
        dim = k if k is not None and k >= 2 else 3
    if geometry is None:
        if k is None or k == dim:
            geometry = "point"
        elif k == 1:
            geometry = "boundary"
        else:
            geometry = "tube"
    if geometry == "point" and k not in (None, dim):
        raise UsageError(f"point geometry needs k = N, got k={k}, N={dim}")
    if geometry == "boundary" and k not in (None, 1):
        raise UsageError(f"boundary geometry needs k = 1, got k={k}")
    return geometry, dim, k


def _problem(args):
    geometry, dim, k = resolve_geometry(args.geometry, args.dim, args.codim)
    dom = from_cli(geometry, dim, k, args.delta, args.cross_measure)
    params = HardyParams(dom.N, dom.k, args.p, args.m, args.D_factor * dom.delta)
    params.check_domain(dom)
    return dom, params


def _grid(args):
    return cert.GridSpec(n=args.grid, t_min=args.t_min)


# -- commands -------------------------------------------------------------------------------

def cmd_xfun(args):
    ts = _floats(args.t, "--t")
    res = {"i": args.i, "t": ts, "X": [float(xk(args.i, t)) for t in ts]}
    if args.deriv_beta is not None:
        res["dX_beta_dt"] = [float(dxk_dt(args.i, args.deriv_beta, t)) for t in ts]
    return res, EXIT_OK


def cmd_finiteness(args):
    b = _floats(args.beta, "--beta")
    be = BetaExponents(b[0], tuple(b[1:]), args.delta, args.D)
    verdict = classify_finiteness(be)
    res = {"beta": b, "verdict": verdict.value}
    if verdict is Finiteness.FINITE:
        res["value"] = singular_radial_integral(be, rel_tol=args.rel_tol)
    if args.probe:
        eps = np.geomspace(args.delta * 1e-1, args.delta * 1e-30, 8)
        res["probe_eps"] = eps
        res["probe_values"] = divergence_probe(be, eps)
    return res, EXIT_OK


def _selector(args, params, grid):
    if args.a == "auto":
        return cert.choose_a(params, D=params.D, grid=grid, sup_d=args.delta)
    try:
        a = float(args.a)
    except ValueError as exc:
        raise UsageError("--a must be 'auto' or a number") from exc
    return cert.CaseSelector.for_params(params, a)


def cmd_certify(args):
    params = HardyParams(args.N or max(args.k, 1), args.k, args.p, args.m,
                         args.D_factor * args.delta)
    grid = _grid(args)
    if args.a == "auto" and args.search_D:
        auto = cert.auto_certify(params, args.delta, grid=grid)
        rep = auto.report
    else:
        sel = _selector(args, params, grid)
        rep = cert.certify_main(params, sel, grid, args.delta)
    return rep.to_dict(), _VERDICT_EXIT[rep.verdict]


def cmd_certify_degenerate(args):
    rep = cert.certify_degenerate(args.k, args.m, args.D_factor * args.delta, _grid(args),
                                  args.delta)
    return rep.to_dict(), _VERDICT_EXIT[rep.verdict]


def cmd_find_d0(args):
    params = HardyParams(args.N or max(args.k, 1), args.k, args.p, args.m, args.delta)
    grid = _grid(args)
    if args.a == "auto":
        auto = cert.auto_certify(params, args.delta, grid=grid,
                                 factors=tuple(f for f in cert.DEFAULT_D_FACTORS
                                               if f <= args.max_factor) or (1.0,))
        sel, D0 = auto.selector, auto.D0
    else:
        sel = cert.CaseSelector.for_params(params, float(args.a))
        D0 = cert.find_D0(params, sel, args.delta, args.max_factor, grid)
    return {"D0": D0, "a": sel.a_value, "case": sel.case, "sup_d": args.delta}, EXIT_OK


def cmd_quotient(args):
    dom, params = _problem(args)
    if args.csv:
        data = np.loadtxt(args.csv, delimiter=",", skiprows=1, ndmin=2)
        prof = RadialProfile.from_ru(data[:, 0], data[:, 1], params.D, params.shift,
                                     params.level)
        if params.degenerate:
            q = rayleigh_quotient_degenerate(prof, dom, params.k, params.m, args.gamma,
                                             params.D, full=True)
        else:
            q = rayleigh_quotient(prof, dom, params, args.gamma, full=True)
        num, den = q.numerator, q.denominator
    elif args.family == "test":
        alpha = ext.AlphaVector(tuple(_floats(args.alpha, "--alpha")))
        cut = ext.CutoffSpec.for_domain(dom)
        sp_ = ext.sharpness_sweep(params, args.gamma, cut, [alpha], dom)[0]
        num, den = sp_.numerator, sp_.denominator
    else:
        space = mz.DiscreteSpace.for_problem(dom, params, args.dofs, args.length)
        M = params.m - params.level + 1
        num, den = mz.discrete_quotient(dom, params, space, mz.warm_start(space, params.p, M),
                                        args.gamma)
    res = {"numerator": num, "denominator": den, "quotient": num / den,
           "params": {"N": params.N, "k": params.k, "p": params.p, "m": params.m,
                      "D": params.D, "H": params.H, "gamma": args.gamma},
           "theorem_constant": params.series_constant}
    return res, EXIT_OK


def _sweep_schedule(args, params):
    first = 2 if params.degenerate else 0
    if args.offsets:
        return ext.gamma_offset_schedule(params.m, args.gamma, _floats(args.offsets, "--offsets"),
                                         args.ratio, first)
    return ext.ordered_schedule(params.m, _floats(args.schedule, "--schedule"), args.ratio,
                                first)


def cmd_sweep(args):
    dom, params = _problem(args)
    cut = ext.CutoffSpec.for_domain(dom)
    rows = ext.sharpness_sweep(params, args.gamma, cut, _sweep_schedule(args, params), dom)
    header = [f"alpha_{i}" for i in range(params.m + 1)] + ["numerator", "denominator",
                                                             "quotient"]
    table = [list(r.alpha) + [r.numerator, r.denominator, r.quotient] for r in rows]
    return (header, table), EXIT_OK


def cmd_best_constant(args):
    dom, params = _problem(args)
    rows = mz.convergence_table(dom, params, args.dofs, args.refinements, args.length,
                                args.gamma, args.starts, args.seed)
    vals = [r.value for r in rows]
    res = {"theorem_constant": params.series_constant,
           "rows": [{"dofs": r.dofs, "elements": r.elements, "value": r.value,
                     "method": r.method} for r in rows],
           "nonincreasing": mz.is_nonincreasing(vals),
           "best": min(vals)}
    return res, EXIT_OK


# -- report -------------------------------------------------------------------------------------

def read_config(path):
    """Parse a ``key = value`` file (``#`` comments); ``command`` names the subcommand."""
    path = Path(path)
    if not path.is_file():
        raise UsageError(f"missing config file: {path}")
    out = {}
    for n, line in enumerate(path.read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{n}: expected key = value")
        k, v = (s.strip() for s in line.split("=", 1))
        out[k.replace("_", "-")] = v
    if "command" not in out:
        raise UsageError(f"{path}: no 'command' key")
    return out


def config_to_argv(cfg):
    argv = [cfg["command"]]
    for k, v in cfg.items():
        if k == "command":
            continue
        if v.lower() in ("true", "yes"):
            argv.append(f"--{k}")
        elif v.lower() in ("false", "no"):
            continue
        else:
            argv += [f"--{k}", v]
    return argv


def _md(x):
    if isinstance(x, float):
        return fmt_float(x)
    if isinstance(x, dict):
        return ", ".join(f"{k}={_md(v)}" for k, v in x.items())
    return str(x)


def _report_markdown(entries):
    lines = ["# Hardy series report", ""]
    for e in entries:
        lines.append(f"## {e['name']} ({e['command']})")
        lines.append("")
        res = e["result"]
        if e["command"] == "best-constant":
            lines.append(f"theorem constant: {fmt_float(res['theorem_constant'])}")
            lines.append("")
            lines.append("| dofs | value |")
            lines.append("|---|---|")
            for r in res["rows"]:
                lines.append(f"| {r['dofs']} | {fmt_float(r['value'])} |")
        elif e["command"] == "sweep":
            lines.append("| " + " | ".join(res["header"]) + " |")
            lines.append("|" + "---|" * len(res["header"]))
            for row in res["rows"]:
                lines.append("| " + " | ".join(_md(x) for x in row) + " |")
        else:
            for k in sorted(res):
                if k != "grid":
                    lines.append(f"- {k}: {_md(res[k])}")
        lines.append(f"\nexit code: {e['exit_code']}")
        lines.append("")
    return "\n".join(lines)


def cmd_report(args):
    if not args.config:
        raise UsageError("report needs at least one --config file")
    parser = build_parser()
    entries = []
    for path in args.config:
        cfg = read_config(path)
        if cfg["command"] == "report":
            raise UsageError("report configs cannot nest")
        sub = parser.parse_args(config_to_argv(cfg))
        payload, code = sub.func(sub)
        if sub.command == "sweep":
            header, table = payload
            payload = {"header": header, "rows": table}
        entries.append({"name": Path(path).stem, "command": sub.command,
                        "config": _config(sub), "result": _clean(payload), "exit_code": code})
    if args.format == "md":
        return _report_markdown(entries), EXIT_OK
    return {"runs": entries}, EXIT_OK


# -- parser ---------------------------------------------------------------------------------

def _add_cert(p, with_p=True):
    p.add_argument("--k", type=int, required=True)
    if with_p:
        p.add_argument("--p", type=float, required=True)
        p.add_argument("--N", type=int, default=None, help="ambient dimension (default k)")
    p.add_argument("--m", type=int, default=1)
    p.add_argument("--delta", type=float, default=1.0, help="sup of d")
    p.add_argument("--grid", type=int, default=2000)
    p.add_argument("--t-min", dest="t_min", type=float, default=1e-12)


def build_parser():
    ap = argparse.ArgumentParser(prog="hardy-series",
                                 description="Improved Hardy inequalities: series, certificates, "
                                             "best constants.")
    ap.add_argument("--out", default=None, help="write output here instead of stdout")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("xfun", help="iterated logarithm X_i(t)")
    p.add_argument("--i", type=int, required=True)
    p.add_argument("--t", required=True, help="value or comma list in (0, 1]")
    p.add_argument("--deriv-beta", dest="deriv_beta", type=float, default=None)
    p.set_defaults(func=cmd_xfun)

    p = sub.add_parser("finiteness", help="classify and evaluate a canonical singular integral")
    p.add_argument("--beta", required=True, help="b0,b1,...,bm")
    p.add_argument("--delta", type=float, default=1.0)
    p.add_argument("--D", type=float, default=1.0)
    p.add_argument("--rel-tol", dest="rel_tol", type=float, default=1e-10)
    p.add_argument("--probe", action="store_true", help="also tabulate truncated integrals")
    p.set_defaults(func=cmd_finiteness)

    p = sub.add_parser("certify", help="certify the main pointwise inequality on a grid")
    _add_cert(p)
    p.add_argument("--D-factor", dest="D_factor", type=float, default=1.0)
    p.add_argument("--a", default="auto", help="'auto' or a number")
    p.add_argument("--search-D", dest="search_D", action="store_true",
                   help="with --a auto, also search and shrink D")
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("certify-degenerate", help="certify the p = k chain")
    _add_cert(p, with_p=False)
    p.add_argument("--D-factor", dest="D_factor", type=float, default=1.0)
    p.set_defaults(func=cmd_certify_degenerate)

    p = sub.add_parser("find-d0", help="smallest certifying scale D")
    _add_cert(p)
    p.add_argument("--a", default="auto")
    p.add_argument("--max-factor", dest="max_factor", type=float, default=65536.0)
    p.set_defaults(func=cmd_find_d0)

    p = sub.add_parser("quotient", help="Rayleigh quotient of one profile")
    _add_geometry(p)
    _add_problem(p)
    p.add_argument("--csv", default=None, help="CSV of r,u with a header row")
    p.add_argument("--family", choices=("test", "taper"), default="test")
    p.add_argument("--alpha", default="0,0.01", help="alpha_0,...,alpha_m for the test family")
    p.add_argument("--dofs", type=int, default=500)
    p.add_argument("--length", type=float, default=mz.DEFAULT_LENGTH)
    p.set_defaults(func=cmd_quotient)

    p = sub.add_parser("sweep", help="quotients of the test family along a schedule (CSV)")
    _add_geometry(p)
    _add_problem(p)
    p.add_argument("--schedule", default=",".join(repr(x) for x in ext.DEFAULT_FINALS),
                   help="final alpha values")
    p.add_argument("--offsets", default=None,
                   help="denominator offsets eps (alpha_m = 2 - gamma + eps)")
    p.add_argument("--ratio", type=float, default=ext.DEFAULT_RATIO)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("best-constant", help="minimum quotient on nested meshes")
    _add_geometry(p)
    _add_problem(p)
    p.add_argument("--dofs", type=int, default=500)
    p.add_argument("--refinements", type=int, default=2)
    p.add_argument("--length", type=float, default=mz.DEFAULT_LENGTH)
    p.add_argument("--starts", type=int, default=mz.DEFAULT_STARTS)
    p.add_argument("--seed", type=int, default=0, help="seed for random descent starts")
    p.set_defaults(func=cmd_best_constant)

    p = sub.add_parser("report", help="run config files and assemble one document")
    p.add_argument("--config", action="append", default=[], help="key = value config file")
    p.add_argument("--format", choices=("json", "md"), default="json")
    p.set_defaults(func=cmd_report)
    return ap


def _emit(text, out):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def run(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        payload, code = args.func(args)
    except (UsageError, HardySeriesError) as exc:
        sys.stderr.write(json.dumps({"error": type(exc).__name__, "message": str(exc)}) + "\n")
        return EXIT_USAGE
    if args.command == "sweep":
        _emit(dumps_csv(*payload), args.out)
    elif args.command == "report" and isinstance(payload, str):
        _emit(payload, args.out)
    else:
        _emit(dumps_json(args.command, _config(args), payload), args.out)
    return code


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
