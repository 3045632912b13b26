"""Command-line front end.

Exit codes: 0 when the property holds or the computation succeeded, 1 when
the property is violated (the report carries the witness), 2 on input or
usage errors.
"""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction
from math import gcd

from . import documents as docs
from .cycles import BalancingReport, check_balancing, local_dimension, star
from .documents import describe_cell, dumps, fmt, fmt_vector
from .errors import (
    DimensionGuardExceeded,
    Exhausted,
    NotBalanced,
    NotGeneric,
    PointNotOnSupport,
    TraceAborted,
    TropkitError,
)
from .maxprinciple import recheck_trace, slicing_trace, verify_max_principle
from .plfunc import check_psh, corner_locus
from .slicing import RationalHyperplane, sample_generic_hyperplane, stable_intersect


class UsageError(Exception):
    pass


def _rational(text: str) -> Fraction:
    text = text.strip()
    if not docs._RATIONAL.match(text):
        raise UsageError(f"{text!r} is not a rational of the form p/q")
    return Fraction(text)


def parse_point(text: str, n: int) -> tuple:
    parts = [p for p in text.split(",")]
    if len(parts) != n:
        raise UsageError(f"expected {n} comma-separated coordinates, got {text!r}")
    return tuple(_rational(p) for p in parts)


def parse_points(text: str, n: int) -> list[tuple]:
    """One or two points, separated by ';' or given as one flat comma list."""
    if ";" in text:
        return [parse_point(p, n) for p in text.split(";")]
    coords = text.split(",")
    if len(coords) % n or not 1 <= len(coords) // n <= 2:
        raise UsageError(f"expected one or two points of {n} coordinates, got {text!r}")
    return [tuple(_rational(c) for c in coords[i:i + n]) for i in range(0, len(coords), n)]


class Report:
    """Collects text lines and a JSON payload; emits one of them."""

    def __init__(self, command: str):
        self.lines: list[str] = []
        self.data: dict = {"command": command}

    def line(self, text: str = "") -> None:
        self.lines.append(text)

    def emit(self, as_json: bool, out=None) -> None:
        out = out or sys.stdout
        if as_json:
            out.write(dumps(self.data))
        else:
            out.write("\n".join(self.lines) + "\n")


def _plural(k: int, word: str) -> str:
    return f"{k} {word}" if k == 1 else f"{k} {word}s"


def _balance_lines(rep: Report, bal: BalancingReport, c) -> None:
    bad = len(bal.violations)
    rep.data["balanced"] = bool(bal)
    rep.data["checked"] = bal.checked
    rep.data["violations"] = [
        {"face": docs.cell_to_dict(c.cells[v.face]), "excess": [fmt(a) for a in v.excess]} for v in bal.violations
    ]
    if bal:
        rep.line(f"balanced: {_plural(bal.checked, 'codim-1 face')} checked")
    else:
        rep.line(f"not balanced: {bad} of {_plural(bal.checked, 'codim-1 face')} violate balancing")
        for v in bal.violations:
            rep.line(f"  face {describe_cell(c.cells[v.face])}: excess {fmt_vector(v.excess)}")


def _write_cycle(args, rep: Report, cycle, gens=None) -> None:
    rep.data["cycle"] = docs.cycle_to_dict(cycle, gens)
    cells = sorted(cycle.weighted_cells(), key=lambda cw: cw[0].key)
    rep.line(f"cycle: {_plural(len(cells), 'maximal cell')} of dimension {cycle.dim} in Q^{cycle.ambient_dim}")
    for cell, w in cells:
        rep.line(f"  {describe_cell(cell)}: weight {fmt(w)}")
    if args.out:
        docs.write_cycle(args.out, cycle, gens)
        rep.line(f"wrote {args.out}")


# -- commands ---------------------------------------------------------------


def cmd_validate(args, rep: Report) -> int:
    doc = docs.load_cycle(args.cycle)
    c = doc.cycle
    rep.data.update(
        valid=True,
        ambient_dim=c.ambient_dim,
        dim=c.dim,
        maximal_cells=len(c.maximal),
        cells=len(c.cells),
        closure_added=doc.closure_added,
        effective=c.is_effective,
    )
    rep.line(f"valid: {c.dim}-dimensional cycle in Q^{c.ambient_dim}")
    rep.line(f"  {_plural(len(c.maximal), 'maximal cell')}, {_plural(len(c.cells), 'cell')} after face closure")
    rep.line(f"  {_plural(doc.closure_added, 'face')} added by face closure")
    rep.line(f"  effective: {'yes' if c.is_effective else 'no'}")
    return 0


def cmd_balance(args, rep: Report) -> int:
    c = docs.load_cycle(args.cycle).cycle
    bal = check_balancing(c)
    _balance_lines(rep, bal, c)
    return 0 if bal else 1


def cmd_star(args, rep: Report) -> int:
    doc = docs.load_cycle(args.cycle)
    p = parse_point(_need(args, "point"), doc.cycle.ambient_dim)
    s = star(doc.cycle, p)
    _write_cycle(args, rep, s)
    return 0


def cmd_local_dim(args, rep: Report) -> int:
    c = docs.load_cycle(args.cycle).cycle
    p = parse_point(_need(args, "point"), c.ambient_dim)
    ld = local_dimension(c, p)
    rep.data.update(point=[fmt(a) for a in p], min_dim=ld.min_dim, max_dim=ld.max_dim, pure=ld.is_pure)
    rep.line(f"local dimension at {fmt_vector(p)}: min {ld.min_dim}, max {ld.max_dim}")
    rep.line(f"  pure: {'yes' if ld.is_pure else 'no'}")
    return 0


def cmd_corner_locus(args, rep: Report) -> int:
    doc = docs.load_cycle(args.cycle)
    f = docs.load_function(args.function, doc)
    cl = corner_locus(f)
    rep.data["constant"] = cl.is_constant
    rep.data["faces"] = [
        {"face": docs.cell_to_dict(cl.cell(t)), "weight": docs.form_to_dict(cl.weight_functions[t])}
        for t in sorted(cl.faces, key=lambda t: cl.cell(t).key)
    ]
    rep.line(f"corner locus: {_plural(len(cl.faces), 'face')} of dimension {cl.dim}")
    for t in sorted(cl.faces, key=lambda t: cl.cell(t).key):
        w = cl.weight_functions[t]
        shown = fmt(w.constant) if w.is_constant() else f"{fmt_vector(w.linear)} . x + {fmt(w.constant)}"
        rep.line(f"  face {describe_cell(cl.cell(t))}: weight {shown}")
    if not cl.is_constant:
        rep.line("weights are not constant: the corner locus is not a cycle")
        return 1 if args.out else 0
    if args.out:
        docs.write_cycle(args.out, cl.cycle)
        rep.line(f"wrote {args.out}")
    rep.data["cycle"] = docs.cycle_to_dict(cl.cycle)
    return 0


def cmd_psh_check(args, rep: Report) -> int:
    doc = docs.load_cycle(args.cycle)
    f = docs.load_function(args.function, doc)
    r = check_psh(f)
    c = f.cycle
    rep.data["psh"] = bool(r)
    rep.data["hessian_violations"] = [
        {"cell": docs.cell_to_dict(c.cells[v.cell]), "direction": [fmt(a) for a in v.direction], "value": fmt(v.value)}
        for v in r.hessian_violations
    ]
    rep.data["corner_violations"] = [
        {"face": docs.cell_to_dict(c.cells[v.face]), "point": [fmt(a) for a in v.point], "weight": fmt(v.value)}
        for v in r.corner_violations
    ]
    if r:
        rep.line("psh: facewise second-order form positive, corner weights nonnegative")
        return 0
    rep.line("not psh")
    for v in r.hessian_violations:
        rep.line(
            f"  cell {describe_cell(c.cells[v.cell])}: second-order form {fmt(v.value)} < 0 "
            f"along {fmt_vector(v.direction)}"
        )
    for v in r.corner_violations:
        face = c.cells[v.face]
        where = f"vertex {fmt_vector(face.vertices[0])}" if face.dim == 0 else f"face {describe_cell(face)}"
        rep.line(f"  {where}: corner weight {fmt(v.value)} < 0 at {fmt_vector(v.point)}")
    return 1


def cmd_slice(args, rep: Report) -> int:
    c = docs.load_cycle(args.cycle).cycle
    normal = parse_point(_need(args, "normal"), c.ambient_dim)
    if any(a.denominator != 1 for a in normal) or not any(normal):
        raise UsageError("the normal must be a nonzero integer vector")
    offset = _rational(args.offset or "0")
    g = 0
    for a in normal:
        g = gcd(g, int(a))
    h = RationalHyperplane(tuple(int(a) // g for a in normal), offset / g)
    try:
        s = stable_intersect(c, h)
    except NotGeneric as exc:
        cert = exc.certificate
        rep.data.update(generic=False, offenders=[docs.cell_to_dict(c.cells[i]) for i in cert.offenders])
        rep.line("hyperplane is not generic: it contains")
        for i in cert.offenders:
            rep.line(f"  cell {describe_cell(c.cells[i])}")
        return 1
    rep.data["generic"] = True
    _write_cycle(args, rep, s)
    return 0


def cmd_sample_hyperplane(args, rep: Report) -> int:
    c = docs.load_cycle(args.cycle).cycle
    pts = parse_points(_need(args, "through"), c.ambient_dim)
    try:
        h, cert = sample_generic_hyperplane(c, pts, args.seed)
    except Exhausted as exc:
        rep.data.update(found=False, reason=str(exc))
        rep.line(f"no generic hyperplane: {exc}")
        return 1
    rep.data.update(found=True, normal=list(h.normal), offset=fmt(h.offset), seed=args.seed)
    rep.line(f"hyperplane {fmt_vector(h.normal)} . x = {fmt(h.offset)} (seed {args.seed})")
    rep.line("  generic: no positive-dimensional cell lies in it")
    return 0


def _verdict_data(v) -> dict:
    out = {"status": v.status, "point": [fmt(a) for a in v.point]}
    if v.status == "LocallyConstant":
        out["certificate"] = [
            {
                "cell": docs.cell_to_dict(c.tangent_cone),
                "linear_vanishes": c.linear_vanishes,
                "hessian_vanishes": c.hessian_vanishes,
            }
            for c in v.certificate
        ]
    if v.witness is not None:
        out["witness"] = {"point": [fmt(a) for a in v.witness], "value": fmt(v.witness_value)}
    if v.local_max is not None and v.local_max.blocking_direction is not None:
        b = v.local_max.blocking_direction
        out["blocking_direction"] = {"direction": [fmt(a) for a in b.direction], "value": fmt(b.value), "order": b.order}
    if v.psh is not None and not v.psh:
        out["corner_violations"] = [
            {"point": [fmt(a) for a in cv.point], "weight": fmt(cv.value)} for cv in v.psh.corner_violations
        ]
        out["hessian_violations"] = [
            {"direction": [fmt(a) for a in hv.direction], "value": fmt(hv.value)} for hv in v.psh.hessian_violations
        ]
    return out


def _verdict_lines(rep: Report, v) -> None:
    rep.line(f"{v.status} at {fmt_vector(v.point)}")
    if v.status == "LocallyConstant":
        rep.line(f"  {_plural(len(v.certificate), 'cell')} of the star: slopes and Hessians vanish")
    elif v.status == "NotLocallyConstant":
        rep.line(f"  witness {fmt_vector(v.witness)} with value {fmt(v.witness_value)}")
    elif v.status == "NotLocalMax":
        b = v.local_max.blocking_direction
        kind = "slope" if b.order == 1 else "curvature"
        rep.line(f"  blocking direction {fmt_vector(b.direction)}: {kind} {fmt(b.value)} > 0")
    else:
        for cv in v.psh.corner_violations:
            rep.line(f"  corner weight {fmt(cv.value)} < 0 at {fmt_vector(cv.point)}")
        for hv in v.psh.hessian_violations:
            rep.line(f"  second-order form {fmt(hv.value)} < 0 along {fmt_vector(hv.direction)}")


def cmd_max_principle(args, rep: Report) -> int:
    doc = docs.load_cycle(args.cycle)
    f = docs.load_function(args.function, doc)
    p = parse_point(_need(args, "point"), doc.cycle.ambient_dim)
    v = verify_max_principle(f, p)
    rep.data.update(_verdict_data(v))
    _verdict_lines(rep, v)
    return 0 if v.status == "LocallyConstant" else 1


def cmd_trace(args, rep: Report) -> int:
    doc = docs.load_cycle(args.cycle)
    f = docs.load_function(args.function, doc)
    try:
        tr = slicing_trace(doc.cycle, f, args.seed, descend=args.descend)
    except TraceAborted as exc:
        rep.data.update(aborted=True, verdict=_verdict_data(exc.verdict))
        rep.line("trace aborted")
        _verdict_lines(rep, exc.verdict)
        return 1
    problems = recheck_trace(tr)
    rep.data.update(aborted=False, trace=docs.trace_to_dict(tr), recheck=problems)
    for node in tr.nodes():
        pad = "  " * (doc.cycle.dim - node.dim)
        if node.kind == "leaf":
            slopes = ", ".join(f"{fmt(e.weight)} x {fmt(e.slope)}" for e in node.edges)
            rep.line(f"{pad}d={node.dim} leaf: weight x slope [{slopes}]")
        elif node.child is None:
            rep.line(f"{pad}d={node.dim} constant at this scale (height {tr.search_height})")
        else:
            tag = "slice" if node.kind == "slice" else "descend"
            rep.line(
                f"{pad}d={node.dim} {tag} through {fmt_vector(node.omega_prime)} with "
                f"{fmt_vector(node.hyperplane.normal)} . x = {fmt(node.hyperplane.offset)}"
            )
    if problems:
        rep.line("re-check failed:")
        for p in problems:
            rep.line(f"  {p}")
        return 1
    rep.line("re-check: every node verified")
    return 0


def _need(args, name: str) -> str:
    value = getattr(args, name)
    if value is None:
        raise UsageError(f"--{name} is required for {args.command}")
    return value


COMMANDS = {
    "validate": (cmd_validate, ["cycle"]),
    "balance": (cmd_balance, ["cycle"]),
    "star": (cmd_star, ["cycle"]),
    "local-dim": (cmd_local_dim, ["cycle"]),
    "corner-locus": (cmd_corner_locus, ["cycle", "function"]),
    "psh-check": (cmd_psh_check, ["cycle", "function"]),
    "slice": (cmd_slice, ["cycle"]),
    "sample-hyperplane": (cmd_sample_hyperplane, ["cycle"]),
    "max-principle": (cmd_max_principle, ["cycle", "function"]),
    "trace": (cmd_trace, ["cycle", "function"]),
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable report")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", help="write the resulting cycle document here")
    parser = argparse.ArgumentParser(prog="tropkit", description="Exact tropical cycle toolkit.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, positional) in COMMANDS.items():
        p = sub.add_parser(name, parents=[common])
        for arg in positional:
            p.add_argument(arg)
        if name in ("star", "local-dim", "max-principle"):
            p.add_argument("--point")
        if name == "slice":
            p.add_argument("--normal")
            p.add_argument("--offset")
        if name == "sample-hyperplane":
            p.add_argument("--through")
        if name == "trace":
            p.add_argument("--descend", action="store_true", help="keep slicing down to dimension 1")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    handler = COMMANDS[args.command][0]
    rep = Report(args.command)
    try:
        code = handler(args, rep)
    except (UsageError, docs.DocumentError, PointNotOnSupport, DimensionGuardExceeded) as exc:
        print(f"tropkit {args.command}: {exc}", file=sys.stderr)
        return 2
    except NotBalanced:
        # report against the input cycle; the failing check may have run on a refinement
        rep = Report(args.command)
        rep.line("input cycle is not balanced")
        c = docs.load_cycle(args.cycle).cycle
        _balance_lines(rep, check_balancing(c), c)
        code = 1
    except (TropkitError, ValueError) as exc:
        print(f"tropkit {args.command}: {exc}", file=sys.stderr)
        return 2
    rep.emit(args.json)
    return code


if __name__ == "__main__":
    sys.exit(main())
