"""Polyhedral complexes, weighted tropical cycles and the balancing condition."""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

from .errors import (
    IntersectionAxiomViolated,
    NotPureDimensional,
    PointNotOnSupport,
)
from .geometry import linalg as la
from .geometry.lattice import lattice_normal_vector
from .geometry.polyhedron import AffineForm, Polyhedron, face_lattice, faces, from_hrep


@dataclass(frozen=True)
class PolyhedralComplex:
    """A finite polyhedral complex.

    ``cells`` are sorted by (dimension, canonical key); ``face_relations[i]``
    lists the indices of the facets of cell ``i``.  ``added`` records the
    cells that were introduced by face closure.
    """

    ambient_dim: int
    cells: tuple
    face_relations: tuple
    added: tuple = ()

    @cached_property
    def _index(self) -> dict:
        return {c: i for i, c in enumerate(self.cells)}

    def index(self, p: Polyhedron) -> int:
        return self._index[p]

    def __contains__(self, p: Polyhedron) -> bool:
        return p in self._index

    @cached_property
    def cofacets(self) -> tuple:
        out = [[] for _ in self.cells]
        for i, fs in enumerate(self.face_relations):
            for j in fs:
                out[j].append(i)
        return tuple(tuple(x) for x in out)

    @cached_property
    def maximal(self) -> tuple:
        return tuple(i for i, up in enumerate(self.cofacets) if not up)

    def cells_containing(self, x: Sequence) -> list[int]:
        return [i for i, c in enumerate(self.cells) if c.contains(x)]

    def cells_of_dim(self, d: int) -> list[int]:
        return [i for i, c in enumerate(self.cells) if c.dim == d]

    def faces_of(self, i: int) -> set[int]:
        """Indices of all nonempty faces of cell ``i`` (including ``i``)."""
        seen = {i}
        stack = [i]
        while stack:
            for j in self.face_relations[stack.pop()]:
                if j not in seen:
                    seen.add(j)
                    stack.append(j)
        return seen


def _separated(a: Polyhedron, b: Polyhedron) -> bool:
    """Cheap sufficient test for disjointness: a facet of ``a`` strictly separates ``b``."""
    for f in a.inequalities:
        if (
            all(f(v) < 0 for v in b.vertices)
            and all(la.dot(f.linear, r) <= 0 for r in b.rays)
            and all(la.dot(f.linear, l) == 0 for l in b.lineality)
        ):
            return True
    return False


def validate_complex(cells: Iterable[Polyhedron], trusted: bool = False) -> PolyhedralComplex:
    """Face closure of ``cells``, after checking the pairwise intersection axiom.

    Raises :class:`IntersectionAxiomViolated` with input positions ``(i, j)``
    when two cells meet in something that is not a face of both.  ``trusted``
    skips that check for cells produced by operations that preserve it.
    """
    given = [c for c in cells]
    if not given:
        raise ValueError("a complex needs at least one cell")
    n = given[0].ambient_dim
    if any(c.ambient_dim != n for c in given):
        raise ValueError("cells live in different ambient spaces")
    for i in range(len(given) if not trusted else 0):
        for j in range(i + 1, len(given)):
            a, b = given[i], given[j]
            if a.is_empty or b.is_empty or a == b or _separated(a, b) or _separated(b, a):
                continue
            meet = a.intersection(b)
            if meet.is_empty:
                continue
            if not (meet.is_face_of(a) and meet.is_face_of(b)):
                raise IntersectionAxiomViolated(i, j)
    closure: set[Polyhedron] = set()
    for c in given:
        if not c.is_empty:
            closure.update(faces(c))
    ordered = tuple(sorted(closure, key=lambda c: (c.dim, c.key)))
    index = {c: i for i, c in enumerate(ordered)}
    relations = []
    for c in ordered:
        lattice = face_lattice(c)
        facets = lattice[1] if len(lattice) > 1 else []
        relations.append(tuple(sorted(index[f] for f in facets if not f.is_empty)))
    given_set = set(given)
    added = tuple(i for i, c in enumerate(ordered) if c not in given_set)
    return PolyhedralComplex(n, ordered, tuple(relations), added)


# -- tropical cycles --------------------------------------------------------


@dataclass(frozen=True)
class Box:
    """Closed rational box bounding a finite window of a locally finite complex."""

    lower: tuple
    upper: tuple

    def __post_init__(self):
        object.__setattr__(self, "lower", la.vec(self.lower))
        object.__setattr__(self, "upper", la.vec(self.upper))

    def polyhedron(self) -> Polyhedron:
        n = len(self.lower)
        ineqs = []
        for i in range(n):
            e = tuple(Fraction(int(i == j)) for j in range(n))
            ineqs.append(AffineForm(e, -self.lower[i]))
            ineqs.append(AffineForm(la.scale(-1, e), self.upper[i]))
        return from_hrep(n, ineqs)

    def on_boundary(self, cell: Polyhedron) -> bool:
        p = cell.relative_interior_point()
        return any(a == lo or a == hi for a, lo, hi in zip(p, self.lower, self.upper))


@dataclass(frozen=True, eq=False)
class TropicalCycle:
    """A weighted polyhedral complex; weights live on the maximal cells.

    Weights are nonzero integers for cycles read from documents; corner
    loci of functions with rational slopes may carry rational weights.
    """

    complex: PolyhedralComplex
    weights: dict
    dim: int
    box: Box | None = None

    @property
    def ambient_dim(self) -> int:
        return self.complex.ambient_dim

    @property
    def cells(self) -> tuple:
        return self.complex.cells

    @property
    def maximal(self) -> tuple:
        return self.complex.maximal

    @property
    def is_effective(self) -> bool:
        return all(w > 0 for w in self.weights.values())

    @property
    def is_pure(self) -> bool:
        return all(self.cells[i].dim == self.dim for i in self.maximal)

    @property
    def is_fan(self) -> bool:
        return all(self.cells[i].is_cone for i in self.maximal)

    def weighted_cells(self) -> list[tuple[Polyhedron, Fraction]]:
        return [(self.cells[i], self.weights[i]) for i in self.maximal]

    def codim_one_faces(self) -> list[int]:
        """Indices of (dim-1)-cells, skipping faces on the boundary of the window."""
        out = []
        for i in self.complex.cells_of_dim(self.dim - 1):
            if not any(self.cells[j].dim == self.dim for j in self.complex.cofacets[i]):
                continue
            if self.box is not None and self.box.on_boundary(self.cells[i]):
                continue
            out.append(i)
        return out

    def adjacent(self, tau: int) -> list[int]:
        return [j for j in self.complex.cofacets[tau] if self.cells[j].dim == self.dim]

    def contains(self, x: Sequence) -> bool:
        return any(self.cells[i].contains(x) for i in self.maximal)

    def maximal_containing(self, x: Sequence) -> list[int]:
        return [i for i in self.maximal if self.cells[i].contains(x)]

    def __eq__(self, other) -> bool:
        if not isinstance(other, TropicalCycle):
            return NotImplemented
        return (
            self.dim == other.dim
            and self.box == other.box
            and sorted(self.weighted_cells(), key=lambda cw: cw[0].key)
            == sorted(other.weighted_cells(), key=lambda cw: cw[0].key)
        )

    def __repr__(self) -> str:
        return (
            f"TropicalCycle(dim={self.dim}, n={self.ambient_dim}, "
            f"maximal={len(self.maximal)}, cells={len(self.cells)})"
        )


def make_cycle(
    weighted: Iterable[tuple[Polyhedron, object]],
    *,
    require_pure: bool = True,
    box: Box | None = None,
    ambient_dim: int | None = None,
    trusted: bool = False,
) -> TropicalCycle:
    """Build a cycle from (maximal cell, weight) pairs.

    Zero weights are pruned with a warning; every weighted cell must end up
    maximal in the face closure.
    """
    kept = []
    for cell, w in weighted:
        w = la.frac(w)
        if w == 0:
            warnings.warn(f"pruning weight-0 cell {cell}", stacklevel=2)
            continue
        if cell.is_empty:
            raise ValueError("an empty cell cannot carry a weight")
        kept.append((cell, w))
    if not kept:
        if ambient_dim is None:
            raise ValueError("empty cycle needs an explicit ambient dimension")
        return TropicalCycle(PolyhedralComplex(ambient_dim, (), (), ()), {}, -1, box)
    merged: dict[Polyhedron, Fraction] = {}
    for cell, w in kept:
        merged[cell] = merged.get(cell, Fraction(0)) + w
    merged = {c: w for c, w in merged.items() if w != 0}
    if not merged:
        return TropicalCycle(PolyhedralComplex(kept[0][0].ambient_dim, (), (), ()), {}, -1, box)
    cells = list(merged)
    cx = validate_complex(cells, trusted)
    weights = {}
    for cell, w in merged.items():
        i = cx.index(cell)
        if i not in cx.maximal:
            raise ValueError(f"weighted cell {cell} is a face of another weighted cell")
        weights[i] = w
    missing = [i for i in cx.maximal if i not in weights]
    if missing:
        raise ValueError(f"maximal cells {missing} carry no weight")
    d = max(cx.cells[i].dim for i in cx.maximal)
    cyc = TropicalCycle(cx, weights, d, box)
    if require_pure and not cyc.is_pure:
        dims = sorted({cx.cells[i].dim for i in cx.maximal})
        raise NotPureDimensional(f"maximal cells have dimensions {dims}")
    if box is not None:
        bp = box.polyhedron()
        for cell in cells:
            if not bp.contains_polyhedron(cell):
                raise ValueError(f"cell {cell} leaves the bounding box")
    return cyc


# -- balancing --------------------------------------------------------------


@dataclass(frozen=True)
class BalancingViolation:
    face: int
    excess: tuple


@dataclass(frozen=True)
class BalancingReport:
    verdict: bool
    violations: tuple
    checked: int

    def __bool__(self) -> bool:
        return self.verdict


def weighted_normal_sum(c: TropicalCycle, tau: int, normals=None) -> tuple:
    """Sum of m_sigma u_{sigma/tau} over maximal cells sigma around ``tau``.

    ``normals`` may map sigma to an alternative representative of u.
    """
    total = la.zero(c.ambient_dim)
    for s in c.adjacent(tau):
        u = normals[s] if normals is not None else lattice_normal_vector(c.cells[s], c.cells[tau])
        total = la.add(total, la.scale(c.weights[s], la.vec(u)))
    return total


def reduce_mod_direction(p: Polyhedron, v: Sequence) -> tuple:
    basis = p.direction_basis()
    if not basis:
        return la.vec(v)
    red, piv = la.rref(basis)
    return la.reduce_mod_span(v, red, piv)


def check_balancing(c: TropicalCycle, normals: dict | None = None) -> BalancingReport:
    """Test the balancing condition at every interior codimension-1 face.

    ``normals`` optionally maps ``(sigma, tau)`` to a lattice-normal
    representative, so the verdict can be checked for representative
    independence.
    """
    violations = []
    taus = c.codim_one_faces()
    for tau in taus:
        reps = None
        if normals is not None:
            reps = {s: normals[(s, tau)] for s in c.adjacent(tau)}
        excess = reduce_mod_direction(c.cells[tau], weighted_normal_sum(c, tau, reps))
        if not la.is_zero(excess):
            violations.append(BalancingViolation(tau, excess))
    return BalancingReport(not violations, tuple(violations), len(taus))


# -- local structure --------------------------------------------------------


def star(c: TropicalCycle, omega: Sequence) -> TropicalCycle:
    """The fan of outgoing directions of ``c`` at ``omega``, with inherited weights."""
    omega = la.vec(omega)
    around = c.maximal_containing(omega)
    if not around:
        raise PointNotOnSupport(f"{tuple(map(str, omega))} is not on the support")
    weighted = [(c.cells[i].tangent_cone(omega), c.weights[i]) for i in around]
    return make_cycle(weighted, require_pure=False, trusted=True)


@dataclass(frozen=True)
class LocalDimension:
    min_dim: int
    max_dim: int
    is_pure: bool


def local_dimension(c: TropicalCycle, omega: Sequence) -> LocalDimension:
    s = star(c, omega)
    dims = [s.cells[i].dim for i in s.maximal]
    return LocalDimension(min(dims), max(dims), min(dims) == max(dims))


# -- refinements and comparison --------------------------------------------


def split_cell(p: Polyhedron, h: AffineForm) -> list[Polyhedron]:
    """The full-dimensional pieces of ``p`` on either side of ``h = 0``."""
    pieces = []
    for side in (h, -h):
        q = p.with_constraints(inequalities=[side])
        if q.dim == p.dim:
            pieces.append(q)
    if len(pieces) == 2 and pieces[0] == pieces[1]:
        pieces = pieces[:1]
    return pieces


def subdivide(c: TropicalCycle, h: AffineForm) -> TropicalCycle:
    """Refine every maximal cell along the hyperplane ``h = 0``; support and weights are kept."""
    weighted = []
    for cell, w in c.weighted_cells():
        for piece in split_cell(cell, h):
            weighted.append((piece, w))
    return make_cycle(weighted, require_pure=False, box=c.box, trusted=True)


def _pieces_against(cell: Polyhedron, others: list[Polyhedron]) -> list[Polyhedron]:
    pieces = [cell]
    for o in others:
        for f in o.inequalities:
            pieces = [q for p in pieces for q in split_cell(p, f)]
    return pieces


def _weight_at(c: TropicalCycle, x: Sequence) -> Fraction:
    for i in c.maximal:
        if c.cells[i].contains(x):
            return c.weights[i]
    return Fraction(0)


def _one_sided_difference(a: TropicalCycle, b: TropicalCycle):
    for i in a.maximal:
        cell = a.cells[i]
        same_hull = [b.cells[j] for j in b.maximal if b.cells[j].equations == cell.equations
                     and b.cells[j].dim == cell.dim]
        for piece in _pieces_against(cell, same_hull):
            x = piece.relative_interior_point()
            wb = Fraction(0)
            for o in same_hull:
                if o.contains(x):
                    wb = _weight_at(b, x)
                    break
            if a.weights[i] != wb:
                return x
    return None


def cycle_difference(a: TropicalCycle, b: TropicalCycle):
    """A point where the weight densities of ``a`` and ``b`` differ, or None.

    Equality is as weighted cycles: the comparison is insensitive to how the
    supports are subdivided into cells.
    """
    if a.ambient_dim != b.ambient_dim:
        raise ValueError("cycles live in different ambient spaces")
    if not a.maximal and not b.maximal:
        return None
    x = _one_sided_difference(a, b)
    return x if x is not None else _one_sided_difference(b, a)


def cycles_equal(a: TropicalCycle, b: TropicalCycle) -> bool:
    return cycle_difference(a, b) is None
