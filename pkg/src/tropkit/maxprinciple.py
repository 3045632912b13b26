"""Local maxima, local constancy and the inductive slicing verifier."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Sequence

from .cycles import TropicalCycle, check_balancing, cycles_equal
from .errors import (
    Exhausted,
    NotBalanced,
    PointNotOnSupport,
    QuadraticNotSupported,
    TraceAborted,
)
from .geometry import linalg as la
from .geometry.polyhedron import AffineForm, Polyhedron
from .plfunc import PiecewiseFunction, PshReport, QuadraticForm, check_psh, restrict
from .slicing import (
    GenericityCertificate,
    RationalHyperplane,
    is_generic,
    sample_generic_hyperplane,
    stable_intersect,
)

SEARCH_HEIGHT = 64


# -- local maxima -----------------------------------------------------------


@dataclass(frozen=True)
class BlockingDirection:
    cell: int
    direction: tuple
    value: Fraction
    order: int  # 1: positive outgoing slope, 2: positive curvature on the critical cone


@dataclass(frozen=True)
class LocalMaxReport:
    point: tuple
    is_local_max: bool
    blocking_direction: BlockingDirection | None = None

    def __bool__(self) -> bool:
        return self.is_local_max


def _copositivity_witness(q: QuadraticForm, gens: list[tuple]) -> tuple | None:
    """A direction v in cone(gens) with v^T Q v > 0, or None.

    Enumerates the critical points of lambda^T M lambda on every face of the
    standard simplex; the maximum over the simplex is attained at one of them.
    """
    k = len(gens)
    if k == 0:
        return None
    m = [[q.second(a, b) for b in gens] for a in gens]
    for size in range(1, k + 1):
        for support in combinations(range(k), size):
            rows = [[m[i][j] for j in support] + [Fraction(-1)] for i in support]
            rows.append([Fraction(1)] * size + [Fraction(0)])
            rhs = [Fraction(0)] * size + [Fraction(1)]
            if la.rank(rows) < size + 1:
                continue
            sol = la.solve(rows, rhs)
            if sol is None:
                continue
            lam = sol[:size]
            if any(x < 0 for x in lam):
                continue
            v = la.zero(q.ambient_dim)
            for x, i in zip(lam, support):
                v = la.add(v, la.scale(x, gens[i]))
            if q.second(v) > 0:
                return la.vec(la.primitive_vector(v))
    return None


def _blocking_in_cell(f: PiecewiseFunction, s: int, omega: tuple) -> BlockingDirection | None:
    cell = f.cycle.cells[s]
    piece = f.pieces[s]
    tangent = cell.tangent_cone(omega)
    g = piece.gradient(omega)
    for r in tangent.generators():
        slope = la.dot(g, r)
        if slope > 0:
            return BlockingDirection(s, r, slope, 1)
    if piece.is_affine:
        return None
    critical = tangent.with_constraints(equations=[AffineForm(g)])
    v = _copositivity_witness(piece, critical.generators())
    if v is not None:
        return BlockingDirection(s, v, piece.second(v), 2)
    return None


def is_local_max(f: PiecewiseFunction, omega: Sequence) -> LocalMaxReport:
    """Decide whether f(x) <= f(omega) for all x of the support near ``omega``.

    First order: no generator of a tangent cone has positive slope.  Second
    order (quadratic pieces): the Hessian is nonpositive on the critical
    cone where the slope vanishes.  Both tests are exact.
    """
    omega = la.vec(omega)
    around = f.cycle.maximal_containing(omega)
    if not around:
        raise PointNotOnSupport(f"{tuple(map(str, omega))} is not on the support")
    for s in around:
        b = _blocking_in_cell(f, s, omega)
        if b is not None:
            return LocalMaxReport(omega, False, b)
    return LocalMaxReport(omega, True)


# -- verification of local constancy ----------------------------------------


@dataclass(frozen=True)
class CellCertificate:
    cell: int
    tangent_cone: Polyhedron
    linear_vanishes: bool
    hessian_vanishes: bool


@dataclass(frozen=True, eq=False)
class MaxPrincipleVerdict:
    status: str  # LocallyConstant | NotLocallyConstant | NotLocalMax | NotPsh
    point: tuple
    certificate: tuple = ()
    witness: tuple | None = None
    witness_value: Fraction | None = None
    local_max: LocalMaxReport | None = None
    psh: PshReport | None = None

    @property
    def locally_constant(self) -> bool:
        return self.status == "LocallyConstant"


def _differing_point(piece: QuadraticForm, cell: Polyhedron, tangent: Polyhedron, omega: tuple):
    base = piece(omega)
    gens = tangent.generators()
    dirs = gens + [la.add(a, b) for i, a in enumerate(gens) for b in gens[i + 1:]]
    eps = Fraction(1)
    for _ in range(64):
        for d in dirs:
            x = la.add(omega, la.scale(eps, d))
            if cell.contains(x) and piece(x) != base:
                return x, piece(x)
        eps /= 2
    raise AssertionError("piece is not constant on the cell, yet no witness was found")


def verify_max_principle(f: PiecewiseFunction, omega: Sequence) -> MaxPrincipleVerdict:
    """Check the tropical maximum principle at ``omega``.

    A ``NotLocallyConstant`` verdict for a psh function with a local maximum
    would be a counterexample and should never be produced.
    """
    omega = la.vec(omega)
    if not f.cycle.contains(omega):
        raise PointNotOnSupport(f"{tuple(map(str, omega))} is not on the support")
    psh = check_psh(f)
    if not psh:
        return MaxPrincipleVerdict("NotPsh", omega, psh=psh)
    lm = is_local_max(f, omega)
    if not lm:
        return MaxPrincipleVerdict("NotLocalMax", omega, local_max=lm, psh=psh)
    certs = []
    for s in f.cycle.maximal_containing(omega):
        cell = f.cycle.cells[s]
        piece = f.pieces[s]
        tangent = cell.tangent_cone(omega)
        basis = tangent.direction_basis()
        g = piece.gradient(omega)
        lin_ok = all(la.dot(g, b) == 0 for b in basis)
        hess_ok = all(a == 0 for row in piece.restricted_hessian(basis) for a in row)
        if not (lin_ok and hess_ok):
            x, val = _differing_point(piece, cell, tangent, omega)
            return MaxPrincipleVerdict(
                "NotLocallyConstant", omega, tuple(certs), x, val, local_max=lm, psh=psh
            )
        certs.append(CellCertificate(s, tangent, lin_ok, hess_ok))
    return MaxPrincipleVerdict("LocallyConstant", omega, tuple(certs), local_max=lm, psh=psh)


# -- slicing trace ----------------------------------------------------------


@dataclass(frozen=True)
class Edge:
    cell: int
    direction: tuple
    weight: Fraction
    slope: Fraction


@dataclass(eq=False)
class TraceNode:
    dim: int
    cycle: TropicalCycle
    function: PiecewiseFunction
    kind: str  # "leaf", "slice" or "constant"
    omega_prime: tuple | None = None
    value_at_omega_prime: Fraction | None = None
    hyperplane: RationalHyperplane | None = None
    certificate: GenericityCertificate | None = None
    edges: tuple = ()
    checks: dict = field(default_factory=dict)
    child: "TraceNode | None" = None


@dataclass(eq=False)
class SlicingTrace:
    root: TraceNode
    seed: int
    search_height: int = SEARCH_HEIGHT

    def nodes(self) -> list[TraceNode]:
        out, node = [], self.root
        while node is not None:
            out.append(node)
            node = node.child
        return out


def _edges(c: TropicalCycle, f: PiecewiseFunction) -> list[Edge]:
    edges = []
    for s in c.maximal:
        cell = c.cells[s]
        for d in cell.generators():
            edges.append(Edge(s, d, c.weights[s], la.dot(f.pieces[s].linear, d)))
    return edges


def _relint_candidates(c: TropicalCycle, height: int):
    """Deterministic rational points in the relative interiors of maximal cones."""
    for q in range(1, height + 1):
        for s in c.maximal:
            cell = c.cells[s]
            gens = list(cell.rays) + list(cell.lineality)
            if not gens:
                continue
            base = la.zero(c.ambient_dim)
            for g in gens:
                base = la.add(base, g)
            if q == 1:
                yield s, base
            for g in gens:
                yield s, la.add(base, la.scale(Fraction(1, q), g))


def _slice(c, f, omega_prime, seed):
    n = c.ambient_dim
    h, cert = sample_generic_hyperplane(c, [la.zero(n), omega_prime], seed)
    sliced = stable_intersect(c, h)
    return h, cert, sliced, restrict(f, sliced)


def _node(c: TropicalCycle, f: PiecewiseFunction, seed: int, descend: bool, height: int) -> TraceNode:
    d = c.dim
    checks = {"balanced": bool(check_balancing(c)), "psh": bool(check_psh(f))}
    if d <= 1:
        edges = _edges(c, f) if d == 1 else []
        total = sum((e.weight * e.slope for e in edges), Fraction(0))
        checks.update(
            slopes_nonpositive=all(e.slope <= 0 for e in edges),
            weighted_sum_nonnegative=total >= 0,
            all_slopes_zero=all(e.slope == 0 for e in edges),
        )
        return TraceNode(d, c, f, "leaf", edges=tuple(edges), checks=checks)

    found = None
    first_relint = None
    for s, x in _relint_candidates(c, height):
        if first_relint is None:
            first_relint = x
        if f.pieces[s](x) != 0:
            found = x
            break
    if found is None and not descend:
        return TraceNode(d, c, f, "constant", checks=checks)

    candidates = [found] if found is not None else []
    candidates += [x for _, x in _relint_candidates(c, 2) if x not in candidates]
    last_error = None
    for x in candidates:
        if found is not None and f.pieces[c.maximal_containing(x)[0]](x) == 0:
            continue
        try:
            h, cert, sliced, restricted = _slice(c, f, x, seed)
        except Exhausted as exc:
            last_error = exc
            continue
        child = _node(sliced, restricted, seed, descend, height)
        checks.update(dimension_drop=child.dim == d - 1, child_effective=sliced.is_effective)
        kind = "slice" if found is not None else "constant"
        value = f.pieces[c.maximal_containing(x)[0]](x)
        return TraceNode(d, c, f, kind, x, value, h, cert, checks=checks, child=child)
    raise last_error or Exhausted("no admissible point to slice through")


def slicing_trace(
    sigma: TropicalCycle,
    f: PiecewiseFunction,
    seed: int = 0,
    descend: bool = False,
    height: int = SEARCH_HEIGHT,
) -> SlicingTrace:
    """Replay the inductive slicing argument for the maximum principle on a fan.

    With ``descend=True`` the trace keeps slicing through interior points
    even when no point of differing value exists, so the whole dimension
    ladder down to 1 is exercised and re-checkable.
    """
    if f.cycle is not sigma and f.cycle != sigma:
        # a tropical polynomial lives on a refinement of the input cycle
        if not cycles_equal(f.cycle, sigma):
            raise ValueError("the function is defined on a different cycle")
        sigma = f.cycle
    if not sigma.is_fan:
        raise ValueError("slicing_trace expects a fan centred at the origin")
    if not f.is_affine:
        raise QuadraticNotSupported("slicing traces handle piecewise affine functions only")
    n = sigma.ambient_dim
    origin = la.zero(n)
    if any(f.pieces[s](origin) != 0 for s in sigma.maximal):
        raise ValueError("the function must vanish at the origin")
    bal = check_balancing(sigma)
    if not bal:
        raise NotBalanced(bal)
    verdict = verify_max_principle(f, origin)
    if verdict.status in ("NotPsh", "NotLocalMax"):
        raise TraceAborted(verdict)
    return SlicingTrace(_node(sigma, f, seed, descend, height), seed, height)


def recheck_trace(trace: SlicingTrace) -> list[str]:
    """Independently re-verify every node of a trace; returns a list of failures."""
    problems = []
    for depth, node in enumerate(trace.nodes()):
        c, f = node.cycle, node.function
        tag = f"node {depth} (d={node.dim})"
        if not check_balancing(c):
            problems.append(f"{tag}: cycle not balanced")
        if not check_psh(f):
            problems.append(f"{tag}: function not psh")
        if not is_local_max(f, la.zero(c.ambient_dim)):
            problems.append(f"{tag}: origin is not a local maximum")
        if node.kind == "leaf":
            if node.dim > 1:
                problems.append(f"{tag}: leaf above dimension 1")
            edges = _edges(c, f) if node.dim == 1 else []
            if [(e.cell, e.direction, e.slope) for e in edges] != [
                (e.cell, e.direction, e.slope) for e in node.edges
            ]:
                problems.append(f"{tag}: recorded slopes differ from recomputed ones")
            if any(e.slope != 0 for e in edges):
                problems.append(f"{tag}: nonzero outgoing slope")
            continue
        if node.child is None:
            if node.kind != "constant":
                problems.append(f"{tag}: slice node without child")
            continue
        cert = is_generic(c, node.hyperplane)
        if not cert or cert != node.certificate:
            problems.append(f"{tag}: genericity certificate does not re-check")
        if not node.hyperplane.contains(la.zero(c.ambient_dim)) or not node.hyperplane.contains(
            node.omega_prime
        ):
            problems.append(f"{tag}: hyperplane misses 0 or the chosen point")
        if node.child.dim != node.dim - 1:
            problems.append(f"{tag}: dimension did not drop by one")
        if stable_intersect(c, node.hyperplane) != node.child.cycle:
            problems.append(f"{tag}: child cycle differs from H . C")
        if c.is_effective and not node.child.cycle.is_effective:
            problems.append(f"{tag}: effectiveness lost")
    return problems
