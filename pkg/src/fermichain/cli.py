"""Command-line front end.

Every subcommand writes CSV or JSON whose header echoes the full run config.
Exit codes: 0 ok, 2 usage error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from dataclasses import asdict

import numpy as np

from . import covariance as cv
from . import diagnostics as dg
from . import entanglement as en
from . import io
from . import resource as rs
from .lattice import Window
from .quasifree import PauliString, SupportOutsideWindow

NUMERICAL_ERRORS = (
    cv.QuadratureNotConverged,
    cv.SymbolSingular,
    en.TailNotReached,
    en.TailTooLarge,
    io.NonFiniteOutput,
    SupportOutsideWindow,
    np.linalg.LinAlgError,
)

_LIST_FLAGS = ("--pair", "--lengths", "--N-ladder", "--window")


def _ints(text: str) -> list:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _pair(text: str) -> tuple:
    v = _ints(text)
    if len(v) != 2:
        raise argparse.ArgumentTypeError("a pair is two comma-separated sites")
    return tuple(v)


def _glue_negative_lists(argv: list) -> list:
    # let "--pair -1,0" through argparse, which would read "-1,0" as a flag
    out, i = [], 0
    while i < len(argv):
        tok = argv[i]
        if tok in _LIST_FLAGS and i + 1 < len(argv) and argv[i + 1][:1] == "-" and argv[i + 1][1:2].isdigit():
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
        else:
            out.append(tok)
            i += 1
    return out


def _params(args) -> cv.XYParams:
    return cv.XYParams(args.gamma, args.lam)


def _config(args) -> dict:
    cfg = {k: v for k, v in vars(args).items() if k not in ("func", "out")}
    cfg["quadrature"] = {"grid": cv.DEFAULT_GRID, "refinement_tol": cv.DEFAULT_QUAD_TOL}
    return cfg


def _emit(args, text: str) -> None:
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _table(args, columns, rows, payload=None) -> None:
    cfg = _config(args)
    if args.format == "json":
        doc = {"columns": columns, "rows": rows}
        doc.update(payload or {})
        _emit(args, io.json_text(doc, cfg))
    else:
        _emit(args, io.csv_text(columns, rows, cfg))


# -- subcommands --------------------------------------------------------------------


def cmd_symbol(args) -> None:
    p = _params(args)
    x = cv.offset_grid(args.grid)
    e = cv.symbol_samples(p, x)
    k = cv.dispersion(p, x)
    rows = [
        [float(xi), float(ki), float(m[0, 0].real), float(m[1, 1].real), float(m[0, 1].real), float(m[0, 1].imag), float(np.trace(m).real)]
        for xi, ki, m in zip(x, k, e)
    ]
    _table(args, ["x", "k", "E00", "E11", "E01_re", "E01_im", "trace"], rows)


def cmd_covariance(args) -> None:
    lo, hi = args.window
    cov = cv.build_truncation(_params(args), Window(lo, hi))
    m = cov.majorana_form if args.majorana else cov.complex_form
    meta = dict(_config(args), form="majorana" if args.majorana else "complex", **cov.to_dict())
    if args.out:
        io.write_matrix_dump(args.out, m, meta)
    else:
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "dump.txt")
            io.write_matrix_dump(path, m, meta)
            with open(path) as fh:
                sys.stdout.write(fh.read())


def cmd_trx(args) -> None:
    th = dg.DivergenceThresholds(args.converge_tol, args.min_slope, args.max_residual)
    scan = dg.scan_trace_X(_params(args), args.N_ladder, th, compressed=args.compressed)
    cols = ["N", "trX"] + list(scan.extras)
    rows = [[n, v] + [scan.extras[c][i] for c in scan.extras] for i, (n, v) in enumerate(zip(scan.sizes, scan.values))]
    payload = {"classification": scan.classification, "fit": asdict(scan.fit), "params": scan.params.as_dict()}
    if args.format == "json":
        _table(args, cols, rows, payload)
    else:
        cfg = _config(args)
        text = io.csv_text(cols, rows, cfg)
        summary = f"# classification: {scan.classification}\n# fit: {_oneline(asdict(scan.fit))}\n"
        _emit(args, text + summary)


def _oneline(d: dict) -> str:
    return json.dumps(io._jsonable(d), sort_keys=True)


def cmd_entropy(args) -> None:
    p = _params(args)
    ambient = args.ambient or 4 * max(args.lengths)
    rows = []
    for L in args.lengths:
        spec = en.entanglement_spectrum(p, Window(0, L), ambient)
        rows.append([L, en.block_entropy(spec)])
    fit = en.fit_log2(args.lengths, [r[1] for r in rows]) if len(rows) > 1 else None
    _table(args, ["L", "S_bits"], rows, {"fit_log2": asdict(fit) if fit else None})


def cmd_onecopy(args) -> None:
    tab = en.one_copy_scan(_params(args), args.lengths, args.ambient, args.tail)
    cols = ["L", "E1", "d", "S", "p1", "n_terms", "tail"]
    rows = [[getattr(r, c) for c in cols] for r in tab.rows]
    payload = {
        "entropy_fit": asdict(tab.entropy_fit) if tab.entropy_fit else None,
        "one_copy_fit": asdict(tab.one_copy_fit) if tab.one_copy_fit else None,
        "label": "E1 by exact-conversion majorization (lower bound)",
    }
    _table(args, cols, rows, payload)


def cmd_cluster(args) -> None:
    a, b = PauliString.parse(args.a), PauliString.parse(args.b)
    scan = dg.cluster_scan(a, b, _params(args), args.kmax)
    rows = [[k, v] for k, v in zip(scan.k, scan.connected)]
    payload = {
        "fits": {k: asdict(v) for k, v in scan.fits.items()},
        "preferred": scan.preferred(),
        "vanishing": scan.vanishing,
    }
    _table(args, ["k", "connected"], rows, payload)


def _source(args):
    if args.resource == "omega1":
        span = max(abs(args.M) + args.Lmax, abs(args.M + args.N) + args.Lmax) + 1
        return rs.PairedState(span)
    return _params(args)


def cmd_localize(args) -> None:
    res = en.localization_length(
        _source(args), args.M, args.N, args.eps, args.Lmax, starts=args.starts, seed=args.seed
    )
    cfg = _config(args)
    _emit(args, io.json_text(res.to_dict(), cfg))


def cmd_bell(args) -> None:
    pairs = args.pair or [(0, 1)]
    if args.resource == "omega1":
        span = max(max(abs(s) for s in p) for p in pairs) + 1
        state = rs.PairedState(span)
        rows = [[i, j, rs.chsh_beta(rs.omega1_rdm(state, [i, j]))] for i, j in pairs]
    else:
        rows = [[r.i, r.j, r.beta] for r in rs.beta_scan_xy(_params(args), pairs)]
    _table(args, ["i", "j", "beta"], rows, {"label": "two-qubit marginal lower bound on beta"})


def cmd_selftest(args) -> None:
    from .selftest import run

    failures = run(verbose=True)
    if failures:
        raise SystemExit(3)


# -- parser -----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fermichain", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, func, xy=True, fmt=True):
        p = sub.add_parser(name)
        if xy:
            p.add_argument("--gamma", type=float, default=1.0)
            p.add_argument("--lambda", dest="lam", type=float, default=1.0)
        if fmt:
            p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--out", default=None)
        p.add_argument("--seed", type=int, default=0)
        p.set_defaults(func=func)
        return p

    p = add("symbol", cmd_symbol)
    p.add_argument("--grid", type=int, default=1024)

    p = add("covariance", cmd_covariance, fmt=False)
    p.add_argument("--window", type=_ints, default=[0, 8])
    p.add_argument("--majorana", action="store_true")

    p = add("trx", cmd_trx)
    p.add_argument("--N-ladder", dest="N_ladder", type=_ints, default=list(dg.DEFAULT_LADDER))
    p.add_argument("--converge-tol", type=float, default=dg.DivergenceThresholds.converge_tol)
    p.add_argument("--min-slope", type=float, default=dg.DivergenceThresholds.min_slope)
    p.add_argument("--max-residual", type=float, default=dg.DivergenceThresholds.max_residual)
    p.add_argument("--compressed", action="store_true", help="also report the compression-based trX")

    for name, func in (("entropy", cmd_entropy), ("onecopy", cmd_onecopy)):
        p = add(name, func)
        p.add_argument("--lengths", type=_ints, default=[2, 4, 8, 16, 32, 64])
        p.add_argument("--ambient", type=int, default=None)
        if name == "onecopy":
            p.add_argument("--tail", type=float, default=en.SCHMIDT_TAIL)

    p = add("cluster", cmd_cluster)
    p.add_argument("--a", default="Z0")
    p.add_argument("--b", default="Z0")
    p.add_argument("--kmax", type=int, default=16)

    p = add("localize", cmd_localize, fmt=False)
    p.add_argument("--resource", choices=("xy", "omega1"), default="xy")
    p.add_argument("--M", type=int, default=0)
    p.add_argument("--N", type=int, default=0)
    p.add_argument("--eps", type=float, default=0.01)
    p.add_argument("--Lmax", type=int, default=3)
    p.add_argument("--starts", type=int, default=8)

    p = add("bell", cmd_bell)
    p.add_argument("--resource", choices=("xy", "omega1"), default="xy")
    p.add_argument("--pair", type=_pair, action="append")

    add("selftest", cmd_selftest, xy=False, fmt=False)
    return ap


def main(argv=None) -> int:
    argv = _glue_negative_lists(list(sys.argv[1:] if argv is None else argv))
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:  # argparse: 2 on usage errors, 0 for --help
        return int(exc.code or 0)
    try:
        args.func(args)
    except NUMERICAL_ERRORS as exc:
        print(f"fermichain: numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    except SystemExit as exc:
        return int(exc.code or 0)
    except BrokenPipeError:
        sys.stderr.close()
    return 0


if __name__ == "__main__":
    sys.exit(main())
