"""Stable intersection with rational hyperplanes.

``H . C`` is realized as the corner locus of ``max(l - c, 0)`` on ``C``,
where ``H = {l = c}``; this is the degree-one tropical cycle supported on
the classical hyperplane, so no separate intersection engine is needed.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .cycles import TropicalCycle, check_balancing
from .errors import Exhausted, NotBalanced, NotGeneric
from .geometry import linalg as la
from .geometry.polyhedron import AffineForm
from .plfunc import TropicalPolynomial, corner_locus, empty_cycle, refine

INITIAL_HEIGHT = 8
REJECTIONS_PER_DOUBLING = 32
MAX_ITERATIONS = 4096


@dataclass(frozen=True)
class RationalHyperplane:
    """The hyperplane ``{x : normal . x = offset}`` with a primitive integer normal."""

    normal: tuple
    offset: Fraction = Fraction(0)

    def __post_init__(self):
        normal = tuple(int(a) for a in self.normal)
        if tuple(la.primitive_vector(normal)) != normal:
            raise ValueError(f"hyperplane normal {normal} is not primitive")
        object.__setattr__(self, "normal", normal)
        object.__setattr__(self, "offset", la.frac(self.offset))

    @classmethod
    def through(cls, normal: Sequence, point: Sequence) -> "RationalHyperplane":
        normal = la.primitive_vector(normal)
        return cls(normal, la.dot(normal, la.vec(point)))

    def form(self) -> AffineForm:
        """The affine form ``l - c`` vanishing on the hyperplane."""
        return AffineForm(self.normal, -self.offset)

    def contains(self, x: Sequence) -> bool:
        return la.dot(self.normal, la.vec(x)) == self.offset


@dataclass(frozen=True)
class GenericityCertificate:
    verdict: bool
    offenders: tuple

    def __bool__(self) -> bool:
        return self.verdict


def _cell_in_hyperplane(cell, h: RationalHyperplane) -> bool:
    return all(h.contains(v) for v in cell.vertices) and all(
        la.dot(h.normal, d) == 0 for d in list(cell.rays) + list(cell.lineality)
    )


def is_generic(c: TropicalCycle, h: RationalHyperplane) -> GenericityCertificate:
    """No cell of positive dimension may lie inside ``h``."""
    offenders = tuple(
        i for i, cell in enumerate(c.cells) if cell.dim >= 1 and _cell_in_hyperplane(cell, h)
    )
    return GenericityCertificate(not offenders, offenders)


def stable_intersect(c: TropicalCycle, h: RationalHyperplane, check_support: bool = True) -> TropicalCycle:
    """The (d-1)-dimensional cycle ``H . C`` for a balanced ``c`` and generic ``h``."""
    cert = is_generic(c, h)
    if not cert:
        raise NotGeneric(cert)
    if c.dim < 1:
        raise ValueError("stable intersection needs a cycle of dimension >= 1")
    bal = check_balancing(c)
    if not bal:
        raise NotBalanced(bal)
    n = c.ambient_dim
    g = TropicalPolynomial("max", (h.form(), AffineForm.const(n, 0)))
    _, f = refine(c, g)
    cl = corner_locus(f)
    out = cl.cycle if cl.faces else empty_cycle(n, c.dim - 1, c.box)
    if check_support:
        for cell, _ in out.weighted_cells():
            assert _cell_in_hyperplane(cell, h), "stable intersection left the hyperplane"
            assert c.contains(cell.relative_interior_point())
    return out


def _orthogonal_lattice(through: Sequence[Sequence], n: int) -> list[tuple[int, ...]]:
    pts = [la.vec(p) for p in through]
    diffs = [la.sub(p, pts[0]) for p in pts[1:]]
    return la.integer_kernel(diffs, n)


def sample_generic_hyperplane(
    c: TropicalCycle,
    through: Sequence[Sequence],
    seed: int,
    max_iterations: int = MAX_ITERATIONS,
) -> tuple[RationalHyperplane, GenericityCertificate]:
    """Seeded rejection sampling of a generic hyperplane through the given points.

    Normals are drawn from the lattice orthogonal to the differences of the
    points, with coefficient height starting at 8 and doubling every 32
    rejections.
    """
    if not 1 <= len(through) <= 2:
        raise ValueError("pass one or two points to pass through")
    n = c.ambient_dim
    if n < 2:
        raise ValueError("hyperplane sampling needs ambient dimension >= 2")
    pts = [la.vec(p) for p in through]
    if len(pts) == 2 and pts[0] == pts[1]:
        raise ValueError("the two points must be distinct")
    basis = _orthogonal_lattice(pts, n)
    if not basis:
        raise Exhausted("no hyperplane passes through the given points")
    if len(basis) == 1:
        # a unique admissible hyperplane: no point in sampling
        h = RationalHyperplane.through(basis[0], pts[0])
        cert = is_generic(c, h)
        if cert:
            return h, cert
        raise Exhausted("the only hyperplane through the points contains a cell", cert)
    rng = random.Random(seed)
    height = INITIAL_HEIGHT
    last = None
    for it in range(max_iterations):
        if it and it % REJECTIONS_PER_DOUBLING == 0:
            height *= 2
        coeffs = [rng.randint(-height, height) for _ in basis]
        normal = [sum(k * b[j] for k, b in zip(coeffs, basis)) for j in range(n)]
        if not any(normal):
            continue
        h = RationalHyperplane.through(normal, pts[0])
        cert = is_generic(c, h)
        if cert:
            return h, cert
        last = cert
    raise Exhausted(f"no generic hyperplane after {max_iterations} draws", last)
