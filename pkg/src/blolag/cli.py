"""Command-line front end.

Every subcommand writes one JSON report (to ``--output`` or stdout).  Exit
status is 0 on success, 1 when a requested check fails and 2 on bad input.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys

import numpy as np

from . import __version__, acceptance, decomp, porosity, report
from .geometry import check_dyadic, dyadic_decompose
from .grid import GridError, SampledLine, SampledSlab, load_function, save_function
from .maximal import MaxVariant1D, onesided_max_full, parabolic_max_full
from .oscillation import KINDS, osc_norm
from .weights import (DEFAULT_EPS_GRID, WeightConstantSpec, bridge_check, eps_scan,
                      sandwich_check, weight_constant)

EXIT_OK, EXIT_CHECK, EXIT_INPUT = 0, 1, 2


class InputError(Exception):
    pass


def _grid_list(text: str | None, default=None):
    if text is None:
        return default
    try:
        vals = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise InputError(f"cannot parse grid {text!r}") from None
    if not vals:
        raise InputError("empty grid")
    return tuple(vals)


def _load(path):
    if path is None:
        raise InputError("--input is required")
    return load_function(path)


def _setting(f) -> str:
    return "parabolic" if isinstance(f, SampledSlab) else "1d"


def _need_gamma(args, f):
    if isinstance(f, SampledSlab) and args.gamma is None:
        raise InputError("slab inputs need --gamma")


def _max_m(args):
    return None if args.max_len is None else max(1, args.max_len // 2)


# ------------------------------------------------------------ subcommands

def cmd_maximal(args):
    f = _load(args.input)
    if isinstance(f, SampledSlab):
        _need_gamma(args, f)
        kind = args.variant if args.variant in ("maximal", "natural") else "maximal"
        vals = parabolic_max_full(f, args.gamma, kind, args.engine, mode=args.mode, max_k=args.max_k)
        out = {"variant": kind, "defined_cells": int(np.isfinite(vals).sum()),
               "max": float(np.nanmax(vals)), "min": float(np.nanmin(vals))}
        grid = f.with_values(np.nan_to_num(vals, nan=0.0))
    else:
        variant = MaxVariant1D.parse(args.variant, args.gamma)
        res = onesided_max_full(f, variant, args.engine, args.mode, args.max_len)
        vals = res.values
        sl = res.defined()
        out = {"variant": variant.kind, "defined": [sl.start, sl.stop], "values": vals[sl],
               "windows": [[int(s), int(n)] for s, n in zip(res.start[sl], res.length[sl])]}
        grid = f.with_values(vals[sl], start=sl.start)
    if args.values_output:
        save_function(grid, args.values_output)
    return out, None, EXIT_OK


def cmd_norm(args):
    f = _load(args.input)
    _need_gamma(args, f)
    rep = osc_norm(f, args.kind, gamma=args.gamma, q=args.q, alpha=args.alpha, tau=args.tau,
                   mode=args.mode, max_m=_max_m(args), max_k=args.max_k)
    return rep.to_json(), rep.family_caps, EXIT_OK


def _corruptions(items) -> dict:
    out = {}
    for item in items or []:
        name, _, val = item.partition("=")
        if name not in ("adjacent", "gapped") or not val:
            raise InputError(f"--override-constant expects adjacent=X or gapped=X, got {item!r}")
        out[name] = float(val)
    return out


def cmd_weight(args):
    w = _load(args.input)
    setting = _setting(w)
    _need_gamma(args, w)
    spec = WeightConstantSpec(q=args.q, gapped=args.gapped, setting=setting, gamma=args.gamma,
                              tau=args.tau, mode=args.mode, max_m=_max_m(args), max_k=args.max_k)
    rep = weight_constant(w, spec)
    out = {"weight": rep.to_json()}
    code = EXIT_OK
    if args.check == "sandwich":
        if setting != "1d" or args.gapped is None:
            raise InputError("the sandwich check needs a line input and --gapped")
        s = sandwich_check(w, args.gapped, args.tol, _corruptions(args.override_constant))
        out["sandwich"] = s
        if s["violated"]:
            print("violated: " + "; ".join(s["violated"]), file=sys.stderr)
            code = EXIT_CHECK
    elif args.check == "bridge":
        b = bridge_check(w, setting, args.gamma, args.mode, _max_m(args), args.max_k, args.tol)
        out["bridge"] = b.to_json()
        if not b.passed:
            print("violated: log bridge", file=sys.stderr)
            code = EXIT_CHECK
    return out, rep.family_caps, code


def _write_csv(path, header, rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(header)
        for row in rows:
            wr.writerow([format(v, ".17g") if isinstance(v, float) else v for v in row])


def cmd_epsscan(args):
    f = _load(args.input)
    _need_gamma(args, f)
    scan = eps_scan(f, _setting(f), _grid_list(args.eps_grid, DEFAULT_EPS_GRID), args.levels,
                    gamma=args.gamma, max_k=args.max_k)
    if args.curve_output:
        _write_csv(args.curve_output, ("eps", "window", "constant"), scan.curve_rows())
    return scan.to_json(), None, EXIT_OK


def cmd_jn(args):
    f = _load(args.input)
    setting = args.setting or ("parabolic" if isinstance(f, SampledSlab) else "1d-lagged")
    if setting == "parabolic":
        _need_gamma(args, f)
    prof = decomp.jn_profile(f, setting, _grid_list(args.lambda_grid), gamma=args.gamma,
                             mode=args.mode if args.mode != "auto" else "exhaustive",
                             max_m=_max_m(args), max_k=args.max_k)
    if args.curve_output:
        if prof.tails_negative is None:
            rows = zip(prof.lambdas.tolist(), prof.tails.tolist())
            _write_csv(args.curve_output, ("lambda", "tail"), rows)
        else:
            rows = zip(prof.lambdas.tolist(), prof.tails.tolist(), prof.tails_negative.tolist())
            _write_csv(args.curve_output, ("lambda", "tail", "tail_negative"), rows)
    return prof.to_json(), prof.family_caps, EXIT_OK


def cmd_decompose(args):
    f = _load(args.input)
    setting = _setting(f)
    _need_gamma(args, f)
    code = EXIT_OK
    if args.method == "blo":
        res = decomp.blo_decompose(f, setting, gamma=args.gamma,
                                   eps_grid=_grid_list(args.eps_grid, DEFAULT_EPS_GRID),
                                   delta_grid=_grid_list(args.delta_grid, decomp.DEFAULT_DELTA_GRID),
                                   cap=args.cap, max_k=args.max_k).to_json()
    elif args.method == "bennett":
        b = decomp.bennett_decompose(f, setting, gamma=args.gamma, max_m=_max_m(args),
                                     max_k=args.max_k, slack=args.tol)
        res = b.to_json()
        if not (b.upper_pass and b.lower_pass):
            code = EXIT_CHECK
    elif args.method == "cr":
        res = decomp.cr_factor(f, args.delta, setting, args.gamma, args.max_k).to_json()
    elif args.method == "power":
        res = decomp.cr_power_check(f, args.delta, setting, args.gamma, args.max_k).to_json()
    else:
        res = decomp.dist_to_linfty(f, setting, _grid_list(args.eps_grid, DEFAULT_EPS_GRID),
                                    delta=args.delta).to_json()
    return res, None, code


def cmd_porosity(args):
    if args.set is None or args.window is None:
        raise InputError("porosity needs --set and --window")
    try:
        with open(args.set, encoding="utf-8") as fh:
            E = porosity.SetModel.from_json(json.load(fh))
    except (OSError, json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise InputError(f"cannot read set model: {exc}") from None
    grid = load_function(args.window)
    if isinstance(grid, SampledLine):
        cert = porosity.right_sided_porosity_1d(E, grid, mode=args.mode if args.mode != "auto" else "exhaustive",
                                                max_m=_max_m(args))
        out = {"certificate": cert.to_json()}
    elif args.alpha is not None:
        if args.gamma is None:
            raise InputError("slab windows need --gamma")
        rep = porosity.distance_weight_pipeline(E, args.alpha, args.gamma, grid, max_depth=args.depth,
                                                max_k=args.max_k)
        cert = rep.pop("certificate")
        out = {"pipeline": rep}
    else:
        if args.gamma is None:
            raise InputError("slab windows need --gamma")
        cert = porosity.fit_porosity_check(E, args.gamma, grid, max_depth=args.depth,
                                           max_k=args.max_k)
        out = {"certificate": cert.to_json()}
    val = porosity.validate_certificate(cert, E)
    out["validation"] = val
    return out, cert.caps, EXIT_OK if val["ok"] else EXIT_CHECK


def cmd_harnack(args):
    u = _load(args.input)
    if not isinstance(u, SampledSlab):
        raise InputError("harnack needs a slab input")
    if args.gamma is None:
        raise InputError("harnack needs --gamma")
    rep = porosity.harnack_check(u, args.gamma, max_k=args.max_k, slack=args.tol)
    if u.p == 2:
        rep["heat_residual"] = porosity.heat_residual(u)
    return rep, rep["family_caps"], EXIT_OK if rep["bridge_pass"] else EXIT_CHECK


def cmd_dyadic(args):
    gamma = 0.0 if args.gamma is None else args.gamma
    block, hx, ht = acceptance.dyadic_block(args.n, args.p, gamma, args.depth)
    root = dyadic_decompose(block, args.p, gamma, args.depth, hx=hx, ht=ht)
    res = check_dyadic(root, args.p, args.n)
    counts = sorted({len(nd.children) for nd in root.walk() if nd.children})
    nodes = sum(len(layer) for layer in root.levels())
    out = {"properties": res, "child_counts": counts, "nodes": nodes,
           "root": {"lo": root.lo, "hi": root.hi}}
    return out, None, EXIT_OK if all(res.values()) else EXIT_CHECK


def cmd_selftest(args):
    rows = acceptance.run_all()
    for r in rows:
        print(r.line())
    rep = {"criteria": [r.to_json() for r in rows],
           "passed": sum(r.passed for r in rows), "total": len(rows)}
    return rep, None, EXIT_OK if all(r.passed for r in rows) else EXIT_CHECK


COMMANDS = {"maximal": cmd_maximal, "norm": cmd_norm, "weight": cmd_weight,
            "epsscan": cmd_epsscan, "jn": cmd_jn, "decompose": cmd_decompose,
            "porosity": cmd_porosity, "harnack": cmd_harnack, "dyadic": cmd_dyadic,
            "selftest": cmd_selftest}


def _range(lo, hi, name, lo_open=False, hi_open=False):
    def check(text):
        try:
            v = float(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"{name} must be a number") from None
        if (v < lo or (lo_open and v == lo)) or (v > hi or (hi_open and v == hi)):
            raise argparse.ArgumentTypeError(f"{name} out of range: {v}")
        return v
    return check


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input")
    common.add_argument("--output")
    common.add_argument("--gamma", type=_range(0, 1, "gamma", hi_open=True))
    common.add_argument("--p", type=_range(1, math.inf, "p", lo_open=True), default=2.0)
    common.add_argument("--q", type=_range(1, math.inf, "q"), default=None)
    common.add_argument("--alpha", type=float)
    common.add_argument("--tau", type=float)
    common.add_argument("--delta", type=_range(0, 1, "delta", True, True), default=0.5)
    common.add_argument("--delta-grid")
    common.add_argument("--eps-grid")
    common.add_argument("--mode", choices=("exhaustive", "ladder", "dyadic-ladder", "auto"),
                        default="exhaustive")
    common.add_argument("--max-len", type=int)
    common.add_argument("--max-k", type=int)
    common.add_argument("--depth", type=int, default=3)
    common.add_argument("--tol", type=_range(0, 1, "tol"), default=1e-9)

    ap = argparse.ArgumentParser(prog="blolag", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)
    s = sub.add_parser("maximal", parents=[common])
    s.add_argument("--variant", default="standard-minus")
    s.add_argument("--engine", choices=("fast", "naive"), default="fast")
    s.add_argument("--values-output")
    s = sub.add_parser("norm", parents=[common])
    s.add_argument("--kind", required=True, choices=KINDS)
    s = sub.add_parser("weight", parents=[common])
    s.add_argument("--gapped", type=_range(0, 0.5, "gapped", lo_open=True))
    s.add_argument("--check", choices=("sandwich", "bridge"))
    s.add_argument("--override-constant", action="append",
                   help="replace a computed constant, e.g. gapped=0.5, to exercise the failure path")
    s = sub.add_parser("epsscan", parents=[common])
    s.add_argument("--levels", type=int, default=5)
    s.add_argument("--curve-output")
    s = sub.add_parser("jn", parents=[common])
    s.add_argument("--setting", choices=("1d-lagged", "1d-adjacent", "parabolic"))
    s.add_argument("--lambda-grid")
    s.add_argument("--curve-output")
    s = sub.add_parser("decompose", parents=[common])
    s.add_argument("--method", choices=("blo", "bennett", "cr", "power", "distance"), default="blo")
    s.add_argument("--cap", type=float, default=50.0)
    s = sub.add_parser("porosity", parents=[common])
    s.add_argument("--set")
    s.add_argument("--window")
    sub.add_parser("harnack", parents=[common])
    s = sub.add_parser("dyadic", parents=[common])
    s.add_argument("--n", type=int, choices=(1, 2, 3), default=1)
    sub.add_parser("selftest", parents=[common])
    return ap


def _config(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k != "command"}


def run(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    if args.command == "weight" and args.q is None:
        args.q = 1.0
    try:
        result, caps, code = COMMANDS[args.command](args)
    except (InputError, GridError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    text = report.dumps(report.build(args.command, _config(args), result, caps))
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    elif args.command != "selftest":
        sys.stdout.write(text)
    return code


def main() -> None:
    sys.exit(run())
