"""Reading and writing cycle and function documents.

Documents are JSON (any YAML 1.1 superset of it is accepted too).  Every
rational is a string ``"p/q"`` or ``"p"``; bare integers are tolerated,
floats are rejected.  Parse errors carry the file, line and field.
"""

from __future__ import annotations

import json
import re
import warnings
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import yaml

from .cycles import Box, TropicalCycle, make_cycle, validate_complex
from .errors import IntersectionAxiomViolated, NotPureDimensional, TropkitError
from .geometry.polyhedron import AffineForm, Polyhedron, from_vrep, is_zgamma
from .plfunc import (
    PiecewiseFunction,
    QuadraticForm,
    TropicalPolynomial,
    check_continuity,
    empty_cycle,
    refine,
)

FORMAT_VERSION = "1"
_RATIONAL = re.compile(r"^[+-]?\d+(/\d+)?$")


class DocumentError(TropkitError):
    """A malformed input document; the message names file, line and field."""

    def __init__(self, source: str, line: int | None, field: str, message: str):
        self.source = source
        self.line = line
        self.field = field
        where = f"{source}:{line}" if line is not None else source
        super().__init__(f"{where}: {field or '<document>'}: {message}")


class _Reader:
    """Walks a composed YAML node tree, keeping marks for diagnostics."""

    def __init__(self, source: str):
        self.source = source

    def fail(self, node, field: str, message: str):
        line = node.start_mark.line + 1 if node is not None else None
        raise DocumentError(self.source, line, field, message)

    def mapping(self, node, field: str) -> dict:
        if not isinstance(node, yaml.MappingNode):
            self.fail(node, field, "expected an object")
        out = {}
        for k, v in node.value:
            out[k.value] = v
        return out

    def sequence(self, node, field: str) -> list:
        if not isinstance(node, yaml.SequenceNode):
            self.fail(node, field, "expected a list")
        return node.value

    def required(self, m: dict, key: str, parent, field: str):
        if key not in m:
            self.fail(parent, f"{field}.{key}" if field else key, "missing field")
        return m[key]

    def string(self, node, field: str) -> str:
        if not isinstance(node, yaml.ScalarNode):
            self.fail(node, field, "expected a string")
        return node.value

    def integer(self, node, field: str) -> int:
        if not isinstance(node, yaml.ScalarNode) or not re.fullmatch(r"[+-]?\d+", node.value):
            self.fail(node, field, "expected an integer")
        return int(node.value)

    def rational(self, node, field: str) -> Fraction:
        if not isinstance(node, yaml.ScalarNode):
            self.fail(node, field, "expected a rational string")
        if node.tag.endswith(":float"):
            self.fail(node, field, f"floating-point value {node.value!r}; write rationals as \"p/q\"")
        text = node.value.strip()
        if not _RATIONAL.match(text):
            self.fail(node, field, f"{node.value!r} is not a rational of the form p/q")
        try:
            return Fraction(text)
        except ZeroDivisionError:
            self.fail(node, field, "zero denominator")

    def vector(self, node, field: str, n: int) -> tuple:
        items = self.sequence(node, field)
        if len(items) != n:
            self.fail(node, field, f"expected {n} coordinates, got {len(items)}")
        return tuple(self.rational(x, f"{field}[{i}]") for i, x in enumerate(items))

    def vectors(self, node, field: str, n: int) -> list[tuple]:
        return [self.vector(x, f"{field}[{i}]", n) for i, x in enumerate(self.sequence(node, field))]


def _compose(text: str, source: str):
    try:
        node = yaml.compose(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise DocumentError(source, mark.line + 1 if mark else None, "", f"syntax error: {exc}")
    if node is None:
        raise DocumentError(source, 1, "", "empty document")
    return node


def _check_version(r: _Reader, top: dict, root):
    v = r.string(r.required(top, "format_version", root, ""), "format_version")
    if v != FORMAT_VERSION:
        r.fail(top["format_version"], "format_version", f"unsupported version {v!r}")


@dataclass(frozen=True, eq=False)
class CycleDocument:
    cycle: TropicalCycle
    cells: tuple  # polyhedra in document order
    gamma_generators: tuple | None
    closure_added: int


def parse_cycle(text: str, source: str = "<cycle>") -> CycleDocument:
    r = _Reader(source)
    root = _compose(text, source)
    top = r.mapping(root, "")
    _check_version(r, top, root)
    n = r.integer(r.required(top, "ambient_dim", root, ""), "ambient_dim")
    if n < 1:
        r.fail(top["ambient_dim"], "ambient_dim", "must be positive")
    gens = None
    if "gamma_generators" in top:
        gnode = top["gamma_generators"]
        gens = tuple(
            r.rational(x, f"gamma_generators[{i}]") for i, x in enumerate(r.sequence(gnode, "gamma_generators"))
        )
    box = None
    if "box" in top:
        bm = r.mapping(top["box"], "box")
        lower = r.vector(r.required(bm, "lower", top["box"], "box"), "box.lower", n)
        upper = r.vector(r.required(bm, "upper", top["box"], "box"), "box.upper", n)
        if any(a >= b for a, b in zip(lower, upper)):
            r.fail(top["box"], "box", "lower corner must be strictly below upper corner")
        box = Box(lower, upper)
    dim = None
    if "dim" in top:
        dim = r.integer(top["dim"], "dim")
    cell_nodes = r.sequence(r.required(top, "cells", root, ""), "cells")
    cells, weights = [], []
    for i, cnode in enumerate(cell_nodes):
        field = f"cells[{i}]"
        cm = r.mapping(cnode, field)
        verts = r.vectors(r.required(cm, "vertices", cnode, field), f"{field}.vertices", n)
        rays = r.vectors(cm["rays"], f"{field}.rays", n) if "rays" in cm else []
        lin = r.vectors(cm["lineality"], f"{field}.lineality", n) if "lineality" in cm else []
        if not verts:
            r.fail(cnode, f"{field}.vertices", "a cell needs at least one vertex")
        w = r.rational(r.required(cm, "weight", cnode, field), f"{field}.weight")
        try:
            cell = from_vrep(n, verts, rays, lin)
        except TropkitError as exc:
            r.fail(cnode, field, str(exc))
        if gens is not None:
            res = is_zgamma(cell, gens)
            if not res.verdict:
                r.fail(cnode, field, f"cell is not rational over the value group: {res.witness}")
        cells.append(cell)
        weights.append(w)
    nonzero = [(c, w) for c, w in zip(cells, weights) if w != 0]
    if not nonzero:
        if dim is None:
            r.fail(root, "dim", "an empty cycle needs an explicit dim")
        cyc = empty_cycle(n, dim, box)
        return CycleDocument(cyc, tuple(cells), gens, 0)
    live = [i for i, w in enumerate(weights) if w != 0]
    try:
        validate_complex([cells[i] for i in live])
    except IntersectionAxiomViolated as exc:
        a, b = live[exc.i], live[exc.j]
        r.fail(cell_nodes[b], f"cells[{b}]", f"meets cells[{a}] in something that is not a common face")
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            cyc = make_cycle(list(zip(cells, weights)), box=box)
    except NotPureDimensional as exc:
        r.fail(root, "cells", str(exc))
    except ValueError as exc:
        r.fail(root, "cells", str(exc))
    if dim is not None and dim != cyc.dim:
        r.fail(top["dim"], "dim", f"declared {dim} but the cells have dimension {cyc.dim}")
    return CycleDocument(cyc, tuple(cells), gens, len(cyc.complex.added))


def load_cycle(path) -> CycleDocument:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise DocumentError(str(path), None, "", f"cannot read file: {exc.strerror}")
    return parse_cycle(text, str(path))


def parse_function(text: str, doc: CycleDocument, source: str = "<function>") -> PiecewiseFunction:
    """Parse a function document against an already parsed cycle document."""
    r = _Reader(source)
    root = _compose(text, source)
    top = r.mapping(root, "")
    _check_version(r, top, root)
    c = doc.cycle
    n = c.ambient_dim
    kind = r.string(r.required(top, "kind", root, ""), "kind")
    if kind == "tropical_polynomial":
        mode = r.string(r.required(top, "mode", root, ""), "mode")
        if mode not in ("max", "min"):
            r.fail(top["mode"], "mode", "must be \"max\" or \"min\"")
        terms = []
        tnodes = r.sequence(r.required(top, "terms", root, ""), "terms")
        if not tnodes:
            r.fail(top["terms"], "terms", "need at least one term")
        for i, tnode in enumerate(tnodes):
            tm = r.mapping(tnode, f"terms[{i}]")
            m = r.vector(r.required(tm, "m", tnode, f"terms[{i}]"), f"terms[{i}].m", n)
            k = r.rational(r.required(tm, "c", tnode, f"terms[{i}]"), f"terms[{i}].c")
            terms.append(AffineForm(m, k))
        _, f = refine(c, TropicalPolynomial(mode, tuple(terms)))
        return f
    if kind != "piecewise":
        r.fail(top["kind"], "kind", f"unknown kind {kind!r}")
    pieces = {}
    pnodes = r.sequence(r.required(top, "pieces", root, ""), "pieces")
    for i, pnode in enumerate(pnodes):
        field = f"pieces[{i}]"
        pm = r.mapping(pnode, field)
        idx = r.integer(r.required(pm, "cell", pnode, field), f"{field}.cell")
        if not 0 <= idx < len(doc.cells):
            r.fail(pm["cell"], f"{field}.cell", f"no cell with index {idx}")
        try:
            target = c.complex.index(doc.cells[idx])
        except KeyError:
            r.fail(pm["cell"], f"{field}.cell", "cell carries weight 0 and is not part of the cycle")
        if target not in c.weights:
            r.fail(pm["cell"], f"{field}.cell", "not a maximal cell of the cycle")
        lin = r.vector(r.required(pm, "linear", pnode, field), f"{field}.linear", n)
        const = r.rational(r.required(pm, "constant", pnode, field), f"{field}.constant")
        quad = None
        if "quadratic" in pm:
            rows = r.sequence(pm["quadratic"], f"{field}.quadratic")
            if len(rows) != n:
                r.fail(pm["quadratic"], f"{field}.quadratic", f"expected {n} rows")
            quad = tuple(r.vector(x, f"{field}.quadratic[{j}]", n) for j, x in enumerate(rows))
            if any(quad[a][b] != quad[b][a] for a in range(n) for b in range(n)):
                r.fail(pm["quadratic"], f"{field}.quadratic", "matrix is not symmetric")
        if target in pieces:
            r.fail(pm["cell"], f"{field}.cell", "cell already has a piece")
        pieces[target] = QuadraticForm(quad, lin, const)
    f = PiecewiseFunction(c, pieces)
    for s in c.maximal:
        if s not in pieces:
            r.fail(root, "pieces", f"no piece for maximal cell {_describe(c.cells[s])}")
    cont = check_continuity(f)
    if not cont:
        raise DocumentError(
            source, None, "pieces",
            f"pieces disagree on the face {_describe(c.cells[cont.face])} at {fmt_vector(cont.point)}",
        )
    return f


def load_function(path, doc: CycleDocument) -> PiecewiseFunction:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise DocumentError(str(path), None, "", f"cannot read file: {exc.strerror}")
    return parse_function(text, doc, str(path))


# -- output -----------------------------------------------------------------


def fmt(q) -> str:
    return str(Fraction(q))


def fmt_vector(v) -> str:
    return "(" + ", ".join(fmt(a) for a in v) + ")"


def _describe(cell: Polyhedron) -> str:
    parts = ["vertices " + ", ".join(fmt_vector(v) for v in cell.vertices)]
    if cell.rays:
        parts.append("rays " + ", ".join(fmt_vector(v) for v in cell.rays))
    if cell.lineality:
        parts.append("lineality " + ", ".join(fmt_vector(v) for v in cell.lineality))
    return "[" + "; ".join(parts) + "]"


describe_cell = _describe


def cell_to_dict(cell: Polyhedron) -> dict:
    return {
        "vertices": [[fmt(a) for a in v] for v in cell.vertices],
        "rays": [[fmt(a) for a in v] for v in cell.rays],
        "lineality": [[fmt(a) for a in v] for v in cell.lineality],
    }


def _weight_value(w: Fraction):
    return w.numerator if w.denominator == 1 else fmt(w)


def cycle_to_dict(c: TropicalCycle, gamma_generators=None) -> dict:
    """Canonical document for a cycle: maximal cells sorted by canonical key."""
    cells = []
    for cell, w in sorted(c.weighted_cells(), key=lambda cw: cw[0].key):
        d = cell_to_dict(cell)
        d["weight"] = _weight_value(w)
        cells.append(d)
    out = {"format_version": FORMAT_VERSION, "ambient_dim": c.ambient_dim, "dim": c.dim, "cells": cells}
    if gamma_generators is not None:
        out["gamma_generators"] = [fmt(g) for g in gamma_generators]
    if c.box is not None:
        out["box"] = {"lower": [fmt(a) for a in c.box.lower], "upper": [fmt(a) for a in c.box.upper]}
    return out


def dumps(obj) -> str:
    """Deterministic JSON text."""
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def write_cycle(path, c: TropicalCycle, gamma_generators=None) -> None:
    Path(path).write_text(dumps(cycle_to_dict(c, gamma_generators)))


def form_to_dict(w: AffineForm) -> dict:
    return {"linear": [fmt(a) for a in w.linear], "constant": fmt(w.constant)}


def function_to_dict(f: PiecewiseFunction) -> dict:
    pieces = []
    for s in sorted(f.cycle.maximal, key=lambda s: f.cycle.cells[s].key):
        q = f.pieces[s]
        d = {"cell": cell_to_dict(f.cycle.cells[s]), "linear": [fmt(a) for a in q.linear], "constant": fmt(q.constant)}
        if not q.is_affine:
            d["quadratic"] = [[fmt(a) for a in row] for row in q.quadratic]
        pieces.append(d)
    return {"pieces": pieces}


def _node_to_dict(node) -> dict:
    out = {
        "dim": node.dim,
        "kind": node.kind,
        "cycle": cycle_to_dict(node.cycle),
        "function": function_to_dict(node.function),
        "checks": dict(sorted(node.checks.items())),
    }
    if node.kind == "leaf":
        out["edges"] = [
            {
                "cell": cell_to_dict(node.cycle.cells[e.cell]),
                "direction": [fmt(a) for a in e.direction],
                "weight": fmt(e.weight),
                "slope": fmt(e.slope),
            }
            for e in node.edges
        ]
    if node.omega_prime is not None:
        out["omega_prime"] = [fmt(a) for a in node.omega_prime]
        out["value_at_omega_prime"] = fmt(node.value_at_omega_prime)
    if node.hyperplane is not None:
        out["hyperplane"] = {"normal": list(node.hyperplane.normal), "offset": fmt(node.hyperplane.offset)}
        out["certificate"] = {"generic": node.certificate.verdict, "offenders": list(node.certificate.offenders)}
    if node.child is not None:
        out["child"] = _node_to_dict(node.child)
    return out


def trace_to_dict(trace) -> dict:
    return {"seed": trace.seed, "search_height": trace.search_height, "root": _node_to_dict(trace.root)}
