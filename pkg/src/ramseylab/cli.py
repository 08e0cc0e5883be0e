"""Command-line interface.

Exit status: 0 holds or success, 1 fails with a certificate, 2 inconclusive,
64 usage error, 65 malformed input, 66 missing input file, 70 internal error.
"""
from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

from . import __version__, classes, kernels, niplab
from .arrow import check_arrow, export_cnf
from .formats import (
    ParseError,
    RunReport,
    load_family,
    load_structure,
    parse_signature,
    print_family,
    print_structure,
)
from .formulas import FormulaError, parse_formula_file
from .fraisse import LevelCapExceeded, weakly_saturated_ordered_graph
from .indiscernibles import (
    ExtractionError,
    NotIndiscernible,
    based_on_check,
    check_indiscernible,
    extraction_trace,
)
from .structures import StructureError, enumerate_copies
from .verdicts import EXIT_CODES, BudgetExceeded, Status

EX_USAGE = 64
EX_DATAERR = 65
EX_NOINPUT = 66
EX_SOFTWARE = 70

CLASS_IDS = {
    "ordered-graphs": classes.ordered_graphs,
    "girth5-ordered": classes.girth5_ordered,
    "linear-orders": classes.linear_orders,
}
PROPS = ("hereditary", "jep", "ap", "sap")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


# -- class definition files -------------------------------------------------------

def load_class(ref: str) -> tuple[classes.FiniteClass, str]:
    """A builtin class id or a file of ``forbid`` lines (builtin ids or paths),
    an optional ``size-cap: N`` line and an optional ``signature:`` line."""
    if ref in CLASS_IDS:
        return CLASS_IDS[ref](), ref
    path = Path(ref)
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise FileNotFoundError(f"no such class id or file: {ref}") from None
    sig = None
    cap = 5
    forbidden = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, _, rest = line.partition(" ") if not line.startswith(("signature:", "size-cap:")) else line.partition(":")
        rest = rest.strip()
        if key == "signature":
            sig = parse_signature(rest, lineno)
        elif key == "size-cap":
            try:
                cap = int(rest)
            except ValueError:
                raise ParseError(f"bad size cap {rest!r}", lineno) from None
        elif key == "forbid":
            forbidden.append(load_structure(rest, path.parent)[0])
        else:
            raise ParseError(f"unrecognized line {line!r}", lineno)
    if sig is None:
        if not forbidden:
            raise ParseError("a class file needs a signature or a forbid line")
        sig = forbidden[0].signature
    if any(F.signature != sig for F in forbidden):
        raise ParseError("forbidden structures must share the class signature")
    return classes.forbidden_class(path.stem, sig, forbidden, size_cap=cap), text


def _delta(path: str, signature):
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise FileNotFoundError(f"no such file: {path}") from None
    return parse_formula_file(text, signature), text


# -- subcommands ---------------------------------------------------------------------

def cmd_arrow(args, rep: RunReport) -> None:
    C, tc = load_structure(args.C)
    B, tb = load_structure(args.B)
    A, ta = load_structure(args.A)
    for name, text in (("C", tc), ("B", tb), ("A", ta)):
        rep.add_input(name, text)
    if args.cnf_out:
        export_cnf(C, B, A, args.k).write(args.cnf_out)
        rep.lines.append(f"wrote {args.cnf_out} and {args.cnf_out}.map")
    try:
        v = check_arrow(
            C, B, A, args.k, args.mode, budget=args.budget, jobs=args.jobs,
            node_limit=args.node_limit, solve_with=args.solve_with,
        )
    except BudgetExceeded as exc:
        rep.status = Status.INCONCLUSIVE
        rep.lines.append(f"C -> (B)^A_{args.k}: inconclusive ({exc})")
        return
    rep.status = v.status
    meta = " ".join(f"{k}={val}" for k, val in sorted(v.metadata.items()))
    rep.lines.append(f"C -> (B)^A_{args.k}: {v.status} [{args.mode}] {meta}")
    if v.fails:
        col = v.bad_coloring
        rep.lines.append("bad coloring (copy -> color):")
        rep.lines.extend(f"  {c} -> {k}" for c, k in zip(col.copies, col.assignment))
        rep.certificate = {"bad_coloring": {"copies": col.copies, "colors": col.assignment}}
    elif v.holds:
        cert = {"mode": args.mode, "b_copies": [c.vertex_set for c in enumerate_copies(B, C)]}
        if v.homogeneity_certificates is not None:
            cert["homogeneous_copy_per_coloring"] = v.homogeneity_certificates
        elif args.mode == "cnf":
            cert["unsatisfiable"] = {"nvars": v.metadata["nvars"], "nclauses": v.metadata["nclauses"]}
        else:
            cert["search_exhausted_nodes"] = v.metadata.get("nodes")
        rep.certificate = cert


def cmd_class_check(args, rep: RunReport) -> None:
    K, text = load_class(args.class_)
    rep.add_input("class", text)
    props = [p.strip() for p in args.props.split(",") if p.strip()]
    bad = [p for p in props if p not in PROPS]
    if bad:
        raise UsageError(f"unknown property {bad[0]!r}; choose from {', '.join(PROPS)}")
    checks = {
        "hereditary": classes.hereditary_check, "jep": classes.jep_check,
        "ap": classes.ap_check, "sap": classes.strong_ap_check,
    }
    overall = Status.HOLDS
    certs = {}
    for p in props:
        t = time.perf_counter()
        v = checks[p](K, args.bound)
        rep.timing[p] = time.perf_counter() - t
        rep.lines.append(f"{p} up to size {args.bound}: {v.status}" + (f" ({v.note})" if v.note else ""))
        if v.fails:
            overall = Status.FAILS
            certs[p] = v.certificate
            if isinstance(v.certificate, classes.AmalgamationBase):
                b = v.certificate
                rep.lines.append(f"  A = {b.A!r}")
                rep.lines.append(f"  B1 = {b.B1!r} via {b.f1.map}")
                rep.lines.append(f"  B2 = {b.B2!r} via {b.f2.map}")
        elif v.status is Status.INCONCLUSIVE:
            if overall is Status.HOLDS:
                overall = Status.INCONCLUSIVE
            certs[p] = v.certificate
        elif p != "jep":
            certs[p] = v.note
        else:
            certs[p] = {"pairs": len(v.certificate or {})}
    rep.status = overall
    rep.certificate = certs


def cmd_fraisse(args, rep: RunReport) -> None:
    cert = weakly_saturated_ordered_graph(args.level, allow_large=args.allow_large)
    ok = cert.verify()
    S = cert.structure
    rep.lines.append(f"level {args.level}: {S.size} vertices, {len(S.table('R')) // 2} edges, "
                     f"{len(cert.witness_map)} types witnessed, verified {ok}")
    if args.out:
        Path(args.out).write_text(print_structure(S), encoding="utf-8")
        rep.lines.append(f"wrote {args.out}")
    else:
        rep.lines.append(print_structure(S).rstrip())
    rep.status = Status.HOLDS if ok else Status.FAILS
    rep.certificate = {"level": args.level, "witnesses": {A: e.map for A, e in cert.witness_map.items()}}


def cmd_extract(args, rep: RunReport) -> None:
    fam, ftext = load_family(args.family)
    delta, dtext = _delta(args.delta, fam.target.signature)
    shape, stext = load_structure(args.shape, Path(args.family).parent)
    rep.add_input("family", ftext)
    rep.add_input("delta", dtext)
    rep.add_input("shape", stext)
    try:
        tr = extraction_trace(fam, delta, args.r, shape, node_limit=args.node_limit)
    except ExtractionError as exc:
        rep.status = Status.FAILS
        rep.lines.append(f"extraction failed: {exc}")
        rep.certificate = {"stage": exc.stage, "type": exc.qtype}
        return
    for s, st in enumerate(tr.stages, start=1):
        rep.lines.append(f"stage {s}: {st.qtype.describe()} color {st.color} host size {len(st.host)}")
    rep.lines.append(f"copy: {tr.copy.map}")
    out = print_family(tr.family)
    if args.out:
        Path(args.out).write_text(out, encoding="utf-8")
        rep.lines.append(f"wrote {args.out}")
    else:
        rep.lines.append(out.rstrip())
    rep.status = Status.HOLDS
    rep.certificate = {"copy": tr.copy.map, "stages": [(s.qtype, s.color, s.host) for s in tr.stages]}


def cmd_check_ind(args, rep: RunReport) -> None:
    fam, ftext = load_family(args.family)
    delta, dtext = _delta(args.delta, fam.target.signature)
    rep.add_input("family", ftext)
    rep.add_input("delta", dtext)
    sub = [s.strip() for s in args.sub.split(",")] if args.sub else None
    v = check_indiscernible(fam, sub, delta, args.bound)
    rep.status = v.status
    rep.lines.append(f"indiscernible up to arity {args.bound}: {v.status}" + (f" ({v.note})" if v.note else ""))
    rep.certificate = v.certificate if v.fails else {"bound": args.bound, "formulas": len(delta)}


def cmd_based_on(args, rep: RunReport) -> None:
    newer, ntext = load_family(args.newer)
    older, otext = load_family(args.older)
    sigma, stext = _delta(args.sigma, newer.target.signature)
    for name, text in (("newer", ntext), ("older", otext), ("sigma", stext)):
        rep.add_input(name, text)
    v = based_on_check(newer, older, sigma, args.bound)
    rep.status = v.status
    rep.lines.append(f"based on, up to arity {args.bound}: {v.status}" + (f" ({v.note})" if v.note else ""))
    rep.certificate = v.certificate if v.fails else {"bound": args.bound, "formulas": len(sigma)}


def cmd_nip_demo(args, rep: RunReport) -> None:
    rep.add_input("target", args.target)
    if args.target == "linear-order":
        r = niplab.nip_demo(args.shatter or args.level, seed=args.seed)
    else:
        r = niplab.ip_demo(args.target, args.level, args.shatter, q=args.q)
    rep.timing.update(r.timing)
    n = r.shatter_n
    if r.shatter is not None:
        rep.lines.append(f"shattering at n={n}: parameters {r.shatter.parameters}, "
                         f"{len(r.shatter.instances)} instances")
    else:
        rep.lines.append(f"shattering at n={n}: none")
    rep.lines.extend(r.notes)
    cert: dict = {"shatter": r.shatter and {"parameters": r.shatter.parameters,
                                            "instances": r.shatter.instances}}
    if r.family is not None:
        rep.lines.append(f"raw family: {r.family.index.size} index elements")
        cert["raw_map"] = r.family.map
    if r.extracted is not None:
        rep.lines.append(f"extracted indiscernible: {r.extracted.map}")
        cert["extracted_map"] = r.extracted.map
    if r.collapse is None:
        if r.extracted is None:
            rep.status = Status.INCONCLUSIVE
            return
        rep.lines.append("order-indiscernible: collapse none")
        for arity, vals in sorted(r.order_table.items()):
            rep.lines.append(f"  arity {arity}: values {sorted(vals)} on every realized type")
        cert["order_table"] = {a: sorted(v) for a, v in r.order_table.items()}
        rep.status = Status.HOLDS
    else:
        rep.lines.extend(r.collapse.lines())
        w = r.witness
        rep.lines.append(f"IP witness for theta' at m={w.n}: verified {w.verify()}")
        rep.lines.append(f"  parameters {w.parameters}")
        rep.lines.append(f"  instances {w.instances}")
        cert["collapse"] = {
            "theta": r.collapse.theta.text, "flip": r.collapse.flip,
            "F": r.collapse.F, "G": r.collapse.G,
            "i_star": r.collapse.i_star, "j_star": r.collapse.j_star, "common": r.collapse.common,
        }
        cert["ip"] = {"m": w.n, "theta_prime": w.phi.formula.text,
                      "parameters": w.parameters, "instances": w.instances}
        rep.status = Status.HOLDS if w.verify() else Status.FAILS
    rep.certificate = cert


# -- entry point -------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="ramseylab", description=__doc__.splitlines()[0])
    p.add_argument("--jobs", type=int, default=1, help="worker processes (arrow exhaustive mode)")
    # repeated on each subcommand; SUPPRESS keeps a value given before the subcommand
    common = _Parser(add_help=False)
    common.add_argument("--jobs", type=int, default=argparse.SUPPRESS, help=argparse.SUPPRESS)
    p.add_argument("--version", action="store_true", help="print the version and kernel backend")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    a = sub.add_parser("arrow", parents=[common], help="decide C -> (B)^A_k")
    a.add_argument("--C", required=True)
    a.add_argument("--B", required=True)
    a.add_argument("--A", required=True)
    a.add_argument("-k", type=int, default=2)
    a.add_argument("--mode", choices=("exhaustive", "search", "cnf"), default="exhaustive")
    a.add_argument("--budget", type=int, default=2**24)
    a.add_argument("--node-limit", type=int, default=0)
    a.add_argument("--cnf-out", help="also write the DIMACS export here")
    a.add_argument("--solve-with", help="external DIMACS solver executable for cnf mode")
    a.set_defaults(func=cmd_arrow)

    c = sub.add_parser("class-check", parents=[common], help="bounded class property checks")
    c.add_argument("--class", dest="class_", required=True, help=f"{', '.join(CLASS_IDS)} or a file")
    c.add_argument("--bound", type=int, required=True)
    c.add_argument("--props", default=",".join(PROPS))
    c.set_defaults(func=cmd_class_check)

    f = sub.add_parser("fraisse", parents=[common], help="weakly saturated ordered graph")
    f.add_argument("--level", type=int, required=True)
    f.add_argument("--out")
    f.add_argument("--allow-large", action="store_true")
    f.set_defaults(func=cmd_fraisse)

    e = sub.add_parser("extract", parents=[common], help="extract an indiscernible")
    e.add_argument("--family", required=True)
    e.add_argument("--delta", required=True)
    e.add_argument("--shape", required=True)
    e.add_argument("--r", type=int)
    e.add_argument("--out")
    e.add_argument("--node-limit", type=int, default=100_000)
    e.set_defaults(func=cmd_extract)

    i = sub.add_parser("check-ind", parents=[common], help="check indiscernibility")
    i.add_argument("--family", required=True)
    i.add_argument("--delta", required=True)
    i.add_argument("--bound", type=int)
    i.add_argument("--sub", help="comma-separated index relations of the reduct")
    i.set_defaults(func=cmd_check_ind)

    b = sub.add_parser("based-on", parents=[common], help="check that one family is based on another")
    b.add_argument("--newer", required=True)
    b.add_argument("--older", required=True)
    b.add_argument("--sigma", required=True)
    b.add_argument("--bound", type=int)
    b.set_defaults(func=cmd_based_on)

    n = sub.add_parser("nip-demo", parents=[common], help="run the IP/NIP pipeline on a target")
    n.add_argument("--target", choices=("membership", "paley", "linear-order"), required=True)
    n.add_argument("--level", type=int, default=2, help="shattering level of the synthesized witness")
    n.add_argument("--shatter", type=int, help="level for the initial shattering search")
    n.add_argument("--q", type=int, default=29, help="Paley graph order")
    n.add_argument("--seed", type=int, default=0)
    n.set_defaults(func=cmd_nip_demo)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.version:
            print(f"ramseylab {__version__} ({kernels.BACKEND} kernels)")
            return 0
        if args.command is None:
            raise UsageError("ramseylab: a subcommand is required")
        if args.jobs < 1:
            raise UsageError("--jobs must be positive")
        rep = RunReport(args.command)
        t = time.perf_counter()
        args.func(args, rep)
        rep.timing["total"] = time.perf_counter() - t
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EX_USAGE
    except (ParseError, FormulaError, StructureError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EX_DATAERR
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EX_NOINPUT
    except (LevelCapExceeded, NotIndiscernible, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EX_USAGE if isinstance(exc, LevelCapExceeded) else EX_DATAERR
    except Exception as exc:  # noqa: BLE001
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EX_SOFTWARE
    sys.stdout.write(rep.render())
    return EXIT_CODES[rep.status] if rep.status is not None else 0


if __name__ == "__main__":
    sys.exit(main())
