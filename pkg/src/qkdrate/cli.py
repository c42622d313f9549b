"""Command-line front end: rates, sweeps, thresholds, verification.

Commands: ``rate`` (one protocol at one error rate), ``sweep`` (Q grid to
CSV/JSON), ``threshold`` (zero-rate error rate), ``verify`` (seeded
property suites), ``commutant`` (group/commutant summary).  Exit codes:
0 ok, 1 usage error, 2 infeasible, 3 verification failure.
"""

from __future__ import annotations

import argparse
import json
import math
import pathlib
import sys

import numpy as np

from . import families, optimize, source, symmetry, verify

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INFEASIBLE = 2
EXIT_VERIFY = 3

CSV_HEADER = "scheme,d,Q,rate,a,b,c,status"

QUBIT_NAMES = ("bb84", "sixstate", "ngon", "cube", "icosahedron",
               "dodecahedron", "cuboid")


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse parser that exits 1 (not 2) on bad arguments."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _fmt(x) -> str:
    """Float cell with 12 significant digits; empty for missing values."""
    if x is None:
        return ""
    x = float(x)
    if math.isnan(x):
        return ""
    return "%.12g" % x


def _json_num(x):
    if x is None:
        return None
    x = float(x)
    return None if math.isnan(x) else x


def _csv_row(row: dict) -> str:
    return ",".join([
        str(row["scheme"]), str(row["d"]), _fmt(row["Q"]), _fmt(row["rate"]),
        _fmt(row["a"]), _fmt(row["b"]), _fmt(row["c"]), row["status"],
    ])


def _emit(text: str, output: str | None) -> None:
    if output:
        pathlib.Path(output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# protocol selection
# ---------------------------------------------------------------------------

def _add_selection_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--scheme", choices=sorted(families.SCHEMES),
                   help="MUB scheme: number of bases (2, d, or d+1)")
    p.add_argument("--d", type=int, help="prime qudit dimension (with --scheme)")
    p.add_argument("--qubit", choices=QUBIT_NAMES,
                   help="named qubit signal set")
    p.add_argument("--n", type=int, help="order for ngon / dihedral")
    p.add_argument("--theta", type=float, help="cuboid aperture angle (radians)")
    p.add_argument("--protocol-file", help="protocol description (JSON)")
    p.add_argument("--group",
                   choices=("pauli", "octahedral", "icosahedral", "dihedral", "cuboid"),
                   help="symmetry group for --protocol-file runs")


def _named_group(name: str, n: int | None, d: int) -> symmetry.GroupRep:
    if name == "pauli":
        return symmetry.pauli_group(d)
    if name == "dihedral":
        if n is None:
            raise _UsageError("--group dihedral requires --n")
        return symmetry.point_group("dihedral", n)
    return symmetry.point_group(name)


def _file_protocol(args) -> families.ProtocolSpec:
    d, bases, probs, _sifting = source.load_protocol_json(args.protocol_file)
    flat = np.concatenate([np.full(b.shape[1], 1.0 / (len(bases) * d)) for b in bases])
    if probs is not None and np.max(np.abs(np.asarray(probs, float) - flat)) > 1e-12:
        raise _UsageError("only uniform basis/symbol probabilities are supported")
    if args.group is None:
        raise _UsageError("--protocol-file requires --group")
    group = _named_group(args.group, args.n, d)
    if group.dim != d:
        raise _UsageError(f"group acts on dimension {group.dim}, protocol has d={d}")
    name = pathlib.Path(args.protocol_file).stem
    return families.ProtocolSpec(name=name, d=d, bases=list(bases),
                                 labels=list(range(len(bases))), group=group)


def _resolve_selection(args):
    """Return ("scheme", scheme, d) or ("protocol", ProtocolSpec)."""
    picked = [x for x in (args.scheme, args.qubit, args.protocol_file) if x is not None]
    if len(picked) != 1:
        raise _UsageError("select exactly one of --scheme, --qubit, --protocol-file")
    if args.scheme is not None:
        if args.d is None:
            raise _UsageError("--scheme requires --d")
        return ("scheme", args.scheme, int(args.d))
    if args.qubit is not None:
        try:
            proto = families.qubit_protocol(args.qubit, n=args.n, theta=args.theta)
        except (ValueError, TypeError) as exc:
            raise _UsageError(str(exc)) from exc
        return ("protocol", proto)
    return ("protocol", _file_protocol(args))


def _check_q(q: float) -> float:
    q = float(q)
    if not (0.0 <= q <= 1.0) or math.isnan(q):
        raise _UsageError(f"error rate Q={q!r} outside [0, 1]")
    return q


def _run_point(selection, q: float, method: str) -> optimize.OptimizationResult:
    if selection[0] == "scheme":
        _, scheme, d = selection
        try:
            return optimize.optimize_scheme(d, scheme, q, method=method)
        except ValueError as exc:
            raise _UsageError(str(exc)) from exc
    if method == "analytic":
        raise _UsageError("--method analytic applies only to --scheme runs")
    return optimize.optimize_protocol(selection[1], q)


def _row_dict(selection, q: float, res: optimize.OptimizationResult) -> dict:
    if selection[0] == "scheme":
        name, d = selection[1], selection[2]
    else:
        name, d = selection[1].name, selection[1].d
    return {"scheme": name, "d": d, "Q": q, "rate": res.r_min,
            "a": res.params.get("a"), "b": res.params.get("b"),
            "c": res.params.get("c"), "status": res.status}


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_rate(args) -> int:
    selection = _resolve_selection(args)
    q = _check_q(args.q)
    res = _run_point(selection, q, args.method)
    row = _row_dict(selection, q, res)
    delta = None
    if args.method == "engine" and selection[0] == "scheme":
        ref = optimize.optimize_scheme(selection[2], selection[1], q, method="numeric")
        if not (math.isnan(res.r_min) or math.isnan(ref.r_min)):
            delta = res.r_min - ref.r_min

    if args.format == "csv":
        _emit(CSV_HEADER + "\n" + _csv_row(row) + "\n", args.output)
    elif args.format == "json":
        obj = {"scheme": row["scheme"], "d": row["d"], "q": q,
               "rate": _json_num(row["rate"]),
               "params": {k: _json_num(row[k]) for k in ("a", "b", "c")},
               "status": row["status"], "method": args.method}
        _emit(json.dumps(obj, indent=2) + "\n", args.output)
    else:
        lines = [f"scheme: {row['scheme']}  d: {row['d']}",
                 f"Q: {_fmt(q)}",
                 f"rate: {_fmt(row['rate'])}" if row["status"] != "infeasible"
                 else "rate: (infeasible)"]
        for k in ("a", "b", "c"):
            if row[k] is not None:
                lines.append(f"{k}: {_fmt(row[k])}")
        lines.append(f"status: {row['status']}")
        lines.append(f"method: {args.method}")
        if delta is not None:
            lines.append(f"closed-form delta: {delta:.3e}")
        _emit("\n".join(lines) + "\n", args.output)
    return EXIT_INFEASIBLE if row["status"] == "infeasible" else EXIT_OK


def _parse_grid(args) -> list:
    values = []
    if args.q_grid:
        try:
            lo, hi, step = (float(t) for t in args.q_grid.split(":"))
        except ValueError as exc:
            raise _UsageError("--q-grid expects lo:hi:step") from exc
        if step <= 0 or hi < lo:
            raise _UsageError("--q-grid expects lo <= hi and step > 0")
        k = 0
        while True:
            v = round(lo + k * step, 12)
            if v > hi + 1e-12:
                break
            values.append(v)
            k += 1
    if args.q is not None:
        for tok in str(args.q).split(","):
            values.append(float(tok))
    if not values:
        raise _UsageError("sweep needs --q-grid lo:hi:step or --q v1,v2,...")
    return sorted(_check_q(v) for v in set(values))


def cmd_sweep(args) -> int:
    selection = _resolve_selection(args)
    qs = _parse_grid(args)
    if selection[0] == "scheme":
        if args.method == "analytic" and selection[1] == "d":
            raise _UsageError("no closed-form optimum for scheme 'd'")
        sel = {"scheme": selection[1], "d": selection[2], "method": args.method}
    else:
        if args.method == "analytic":
            raise _UsageError("--method analytic applies only to --scheme runs")
        sel = {"protocol": selection[1]}
    rows = optimize.sweep_rows(sel, qs)
    if args.format == "json":
        objs = [{"scheme": r["scheme"], "d": r["d"], "q": r["Q"],
                 "rate": _json_num(r["rate"]),
                 "params": {k: _json_num(r[k]) for k in ("a", "b", "c")},
                 "status": r["status"], "method": args.method} for r in rows]
        _emit(json.dumps(objs, indent=2) + "\n", args.output)
    else:  # text and csv share the plot-ready CSV layout
        body = "\n".join(_csv_row(r) for r in rows)
        _emit(CSV_HEADER + "\n" + body + "\n", args.output)
    return EXIT_OK


def cmd_threshold(args) -> int:
    selection = _resolve_selection(args)
    try:
        if selection[0] == "scheme":
            if args.method == "analytic" and selection[1] == "d":
                raise _UsageError("no closed-form optimum for scheme 'd'")
            qstar = optimize.scheme_threshold(selection[2], selection[1],
                                              method=args.method)
        else:
            if args.method == "analytic":
                raise _UsageError("--method analytic applies only to --scheme runs")
            qstar = optimize.protocol_threshold(selection[1])
    except ValueError as exc:
        print(f"threshold: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    _emit("%.6f\n" % qstar, args.output)
    return EXIT_OK


def cmd_verify(args) -> int:
    names = sorted(verify.SUITES) if args.suite == "all" else [args.suite]
    seed = verify.env_seed()
    results, ok = verify.run(names, seed=seed)
    lines = [f"seed: {seed:#x}"]
    for name in names:
        checks = results[name]
        insts = sum(c.instances for c in checks)
        viol = sum(c.violations for c in checks)
        for c in checks:
            mark = "ok " if c.ok else "FAIL"
            lines.append(f"  [{mark}] {c.name}: instances={c.instances} "
                         f"violations={c.violations} worst={c.worst:.3g}")
        lines.append(f"suite {name}: {len(checks)} checks, {insts} instances, "
                     f"{viol} violations")
    lines.append("verification: " + ("PASS" if ok else "FAIL"))
    _emit("\n".join(lines) + "\n", args.output)
    return EXIT_OK if ok else EXIT_VERIFY


def cmd_commutant(args) -> int:
    if args.qubit is not None:
        proto = families.qubit_protocol(args.qubit, n=args.n, theta=args.theta)
        group = proto.group
    elif args.group is not None:
        if args.group == "pauli" and args.d is None:
            raise _UsageError("--group pauli requires --d")
        group = _named_group(args.group, args.n, args.d or 2)
    else:
        raise _UsageError("commutant needs --group or --qubit")
    basis = symmetry.commutant_basis(group)
    lines = [f"group: {group.name or args.group}",
             f"order: {len(group)}",
             f"commutant dimension: {len(basis)}"]
    try:
        projs = symmetry.commutant_projectors(group)
        ranks = ",".join(str(int(round(float(np.real(np.trace(p)))))) for p in projs)
        lines.append(f"block ranks: {ranks}")
    except ValueError:
        lines.append("block ranks: (commutant not abelian)")
    _emit("\n".join(lines) + "\n", args.output)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser assembly
# ---------------------------------------------------------------------------

def build_parser() -> _Parser:
    parser = _Parser(prog="qkdrate",
                     description="Collective-attack key rates for qudit QKD protocols.")
    sub = parser.add_subparsers(dest="command", metavar="command")

    def common(p):
        _add_selection_args(p)
        p.add_argument("--method", choices=("analytic", "numeric", "engine"),
                       default="numeric")
        p.add_argument("--format", choices=("text", "csv", "json"), default="text")
        p.add_argument("--output", help="write to file instead of stdout")

    p_rate = sub.add_parser("rate", help="worst-case key rate at one error rate")
    common(p_rate)
    p_rate.add_argument("--q", type=float, required=True, help="average error rate Q")
    p_rate.set_defaults(fn=cmd_rate)

    p_sweep = sub.add_parser("sweep", help="key-rate curve over a Q grid (CSV)")
    common(p_sweep)
    p_sweep.add_argument("--q", help="comma-separated Q values")
    p_sweep.add_argument("--q-grid", help="grid as lo:hi:step (inclusive)")
    p_sweep.set_defaults(fn=cmd_sweep, format="csv")

    p_thr = sub.add_parser("threshold", help="zero-rate error threshold")
    common(p_thr)
    p_thr.set_defaults(fn=cmd_threshold)

    p_ver = sub.add_parser("verify", help="run the seeded property suites")
    p_ver.add_argument("--suite", choices=("all",) + tuple(sorted(verify.SUITES)),
                       default="all")
    p_ver.add_argument("--output", help="write to file instead of stdout")
    p_ver.set_defaults(fn=cmd_verify)

    p_comm = sub.add_parser("commutant", help="group order, commutant dim, block ranks")
    p_comm.add_argument("--group",
                        choices=("pauli", "octahedral", "icosahedral", "dihedral", "cuboid"))
    p_comm.add_argument("--d", type=int, help="dimension for --group pauli")
    p_comm.add_argument("--n", type=int, help="order for --group dihedral / --qubit ngon")
    p_comm.add_argument("--qubit", choices=QUBIT_NAMES, help="use this signal set's group")
    p_comm.add_argument("--theta", type=float)
    p_comm.add_argument("--output", help="write to file instead of stdout")
    p_comm.set_defaults(fn=cmd_commutant)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "command", None) is None:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    try:
        return args.fn(args)
    except _UsageError as exc:
        print(f"qkdrate {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except families.InfeasibleError as exc:
        print(f"qkdrate {args.command}: infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE


if __name__ == "__main__":
    raise SystemExit(main())
