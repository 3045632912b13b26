"""Rational polyhedra with synchronized H- and V-representations.

Conversion between the two views uses the double description method on the
homogenized cone, with exact rationals throughout.  Every :class:`Polyhedron`
is canonical: both representations are minimal and sorted, so two
polyhedra are equal as sets iff they compare equal.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from math import gcd
from typing import Iterable, Sequence

from ..errors import DimensionGuardExceeded, EmptyPolyhedron
from . import linalg as la

MAX_AMBIENT_DIM = 12
MAX_CONSTRAINTS = 64


def dimension_guard() -> int:
    """Active ambient-dimension guard; ``TROPKIT_MAX_DIM`` may only lower it."""
    raw = os.environ.get("TROPKIT_MAX_DIM")
    if raw:
        try:
            return max(0, min(MAX_AMBIENT_DIM, int(raw)))
        except ValueError:
            pass
    return MAX_AMBIENT_DIM


@dataclass(frozen=True, order=True)
class AffineForm:
    """The affine function ``x -> linear . x + constant``."""

    linear: tuple
    constant: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "linear", la.vec(self.linear))
        object.__setattr__(self, "constant", la.frac(self.constant))

    @property
    def ambient_dim(self) -> int:
        return len(self.linear)

    def __call__(self, x: Sequence) -> Fraction:
        return la.dot(self.linear, x) + self.constant

    def __add__(self, other: "AffineForm") -> "AffineForm":
        return AffineForm(la.add(self.linear, other.linear), self.constant + other.constant)

    def __sub__(self, other: "AffineForm") -> "AffineForm":
        return AffineForm(la.sub(self.linear, other.linear), self.constant - other.constant)

    def __neg__(self) -> "AffineForm":
        return AffineForm(la.scale(-1, self.linear), -self.constant)

    def scaled(self, c) -> "AffineForm":
        c = la.frac(c)
        return AffineForm(la.scale(c, self.linear), c * self.constant)

    def is_constant(self) -> bool:
        return la.is_zero(self.linear)

    def is_zero(self) -> bool:
        return self.is_constant() and self.constant == 0

    def row(self) -> tuple:
        return self.linear + (self.constant,)

    @classmethod
    def from_row(cls, row: Sequence) -> "AffineForm":
        return cls(tuple(row[:-1]), row[-1])

    @classmethod
    def const(cls, n: int, c) -> "AffineForm":
        return cls(la.zero(n), c)

    def is_zgamma_linear(self, gamma_generators: Sequence) -> bool:
        return all(a.denominator == 1 for a in self.linear) and in_group(self.constant, gamma_generators)


def group_generator(gamma_generators: Sequence) -> Fraction:
    """The nonnegative generator of the (cyclic) subgroup of Q generated by the input."""
    num = 0
    den = 1
    for g in gamma_generators:
        g = la.frac(g)
        if g == 0:
            continue
        # gcd(a/b, c/d) = gcd(a d, c b) / (b d), kept in lowest terms via Fraction.
        new_den = den * g.denominator
        num = gcd(num * g.denominator, abs(g.numerator) * den)
        den = new_den
    return Fraction(num, den)


def in_group(c, gamma_generators: Sequence) -> bool:
    c = la.frac(c)
    g = group_generator(gamma_generators)
    if g == 0:
        return c == 0
    return (c / g).denominator == 1


# -- double description -----------------------------------------------------


def _normalize(v: Sequence) -> tuple:
    return la.vec(la.primitive_vector(v))


def _double_description(ineqs: Sequence[Sequence], eqs: Sequence[Sequence], dim: int):
    """Generators of the cone {y : a.y >= 0 for a in ineqs, e.y = 0 for e in eqs}.

    Returns ``(rays, lineality)``: a minimal set of extreme rays of the cone
    modulo its lineality space, and a basis of that lineality space.
    """
    lineality: list[tuple] = [tuple(Fraction(int(i == j)) for j in range(dim)) for i in range(dim)]
    # each ray is paired with the set of processed inequality indices it is tight on
    rays: list[tuple[tuple, frozenset]] = []

    for e in eqs:
        vals = [la.dot(e, l) for l in lineality]
        k = next((i for i, v in enumerate(vals) if v != 0), None)
        if k is not None:
            l0, a0 = lineality[k], vals[k]
            lineality = [
                la.sub(l, la.scale(vals[i] / a0, l0)) for i, l in enumerate(lineality) if i != k
            ]
            rays = [(_normalize(la.sub(r, la.scale(la.dot(e, r) / a0, l0))), z) for r, z in rays]
            continue
        pos, neg, nul = [], [], []
        for r, z in rays:
            s = la.dot(e, r)
            (pos if s > 0 else neg if s < 0 else nul).append((r, z))
        rays = nul + _combine(pos, neg, e, rays)

    for idx, a in enumerate(ineqs):
        vals = [la.dot(a, l) for l in lineality]
        k = next((i for i, v in enumerate(vals) if v != 0), None)
        if k is not None:
            l0, a0 = lineality[k], vals[k]
            if a0 < 0:
                l0, a0 = la.scale(-1, l0), -a0
                vals = [-v if i == k else v for i, v in enumerate(vals)]
            lineality = [
                la.sub(l, la.scale(vals[i] / a0, l0)) for i, l in enumerate(lineality) if i != k
            ]
            projected = [
                (_normalize(la.sub(r, la.scale(la.dot(a, r) / a0, l0))), z | {idx}) for r, z in rays
            ]
            rays = projected + [(_normalize(l0), frozenset(range(idx)))]
            continue
        pos, neg, nul = [], [], []
        for r, z in rays:
            s = la.dot(a, r)
            (pos if s > 0 else neg if s < 0 else nul).append((r, z))
        new = _combine(pos, neg, a, rays)
        rays = pos + [(r, z | {idx}) for r, z in nul] + [(r, z | {idx}) for r, z in new]

    seen = set()
    out = []
    for r, _ in rays:
        if r not in seen:
            seen.add(r)
            out.append(r)
    return out, lineality


def _combine(pos, neg, a, all_rays):
    """New rays from adjacent (positive, negative) pairs, by the combinatorial test."""
    new = []
    zsets = [z for _, z in all_rays]
    for rp, zp in pos:
        sp = la.dot(a, rp)
        for rn, zn in neg:
            z = zp & zn
            # adjacent iff no third ray is tight on every constraint tight at both
            hits = sum(1 for zo in zsets if z <= zo)
            if hits > 2:
                continue
            sn = la.dot(a, rn)
            r = la.sub(la.scale(sp, rn), la.scale(sn, rp))
            new.append((_normalize(r), z))
    return new


# -- the polyhedron type ----------------------------------------------------


@dataclass(frozen=True)
class Polyhedron:
    """A canonical rational polyhedron in Q^n.

    ``equations`` cut out the affine hull, ``inequalities`` are the facets
    (each ``f(x) >= 0``).  ``vertices`` are representatives of the minimal
    faces, reduced modulo ``lineality``.
    """

    ambient_dim: int
    equations: tuple
    inequalities: tuple
    vertices: tuple
    rays: tuple
    lineality: tuple
    dim: int

    # representations ---------------------------------------------------

    @property
    def hrep(self) -> tuple:
        """All constraints as ``f >= 0`` (equations contribute both signs)."""
        out = list(self.inequalities)
        for e in self.equations:
            out.append(e)
            out.append(-e)
        return tuple(out)

    @property
    def is_empty(self) -> bool:
        return self.dim < 0

    @property
    def key(self) -> tuple:
        return (self.ambient_dim, self.dim, self.vertices, self.rays, self.lineality)

    def __lt__(self, other: "Polyhedron") -> bool:
        return self.key < other.key

    def __hash__(self) -> int:
        return self._hash

    # instances are immutable, so derived data is memoized per instance

    @cached_property
    def _hash(self) -> int:
        return hash((self.ambient_dim, self.equations, self.inequalities, self.vertices, self.rays, self.lineality))

    def __repr__(self) -> str:
        if self.is_empty:
            return f"Polyhedron(empty in Q^{self.ambient_dim})"
        fmt = lambda vs: [tuple(str(a) for a in v) for v in vs]
        parts = [f"dim={self.dim}", f"vertices={fmt(self.vertices)}"]
        if self.rays:
            parts.append(f"rays={fmt(self.rays)}")
        if self.lineality:
            parts.append(f"lineality={fmt(self.lineality)}")
        return "Polyhedron(" + ", ".join(parts) + ")"

    # predicates --------------------------------------------------------

    def contains(self, x: Sequence) -> bool:
        if self.is_empty:
            return False
        x = la.vec(x)
        return all(e(x) == 0 for e in self.equations) and all(f(x) >= 0 for f in self.inequalities)

    def contains_in_relative_interior(self, x: Sequence) -> bool:
        if self.is_empty:
            return False
        x = la.vec(x)
        return all(e(x) == 0 for e in self.equations) and all(f(x) > 0 for f in self.inequalities)

    def contains_polyhedron(self, other: "Polyhedron") -> bool:
        if other.is_empty:
            return True
        if self.is_empty:
            return False
        for v in other.vertices:
            if not self.contains(v):
                return False
        for r in other.rays:
            if not self._recedes(r):
                return False
        for l in other.lineality:
            if not (self._recedes(l) and self._recedes(la.scale(-1, l))):
                return False
        return True

    def _recedes(self, d: Sequence) -> bool:
        return all(la.dot(e.linear, d) == 0 for e in self.equations) and all(
            la.dot(f.linear, d) >= 0 for f in self.inequalities
        )

    @property
    def is_cone(self) -> bool:
        """True if this polyhedron equals its own recession cone (apex at 0)."""
        return not self.is_empty and self.vertices == (la.zero(self.ambient_dim),)

    @property
    def is_bounded(self) -> bool:
        return not self.rays and not self.lineality

    # derived geometry --------------------------------------------------

    def direction_basis(self) -> list[tuple]:
        """Rational basis of lin(P), the linear space parallel to the affine hull."""
        return list(self._direction_basis)

    @cached_property
    def _direction_basis(self) -> tuple:
        if self.is_empty:
            return ()
        return tuple(la.nullspace([e.linear for e in self.equations], self.ambient_dim))

    def spanning_points(self) -> list[tuple]:
        """Vertices, vertex+ray and vertex+lineality points (affinely spanning P)."""
        pts = list(self.vertices)
        if self.vertices:
            v0 = self.vertices[0]
            pts += [la.add(v0, r) for r in self.rays]
            pts += [la.add(v0, l) for l in self.lineality]
        return pts

    def generators(self) -> list[tuple]:
        """Recession generators with lineality taken in both signs."""
        return list(self.rays) + list(self.lineality) + [la.scale(-1, l) for l in self.lineality]

    def relative_interior_point(self) -> tuple:
        """Average of the vertices plus every ray and lineality generator."""
        if self.is_empty:
            raise EmptyPolyhedron("empty polyhedron has no interior point")
        return self._relint

    @cached_property
    def _relint(self) -> tuple:
        k = len(self.vertices)
        p = la.zero(self.ambient_dim)
        for v in self.vertices:
            p = la.add(p, v)
        p = la.scale(Fraction(1, k), p)
        for r in self.rays + self.lineality:
            p = la.add(p, r)
        return p

    def intersection(self, other: "Polyhedron") -> "Polyhedron":
        if self.is_empty or other.is_empty:
            return empty_polyhedron(self.ambient_dim)
        return from_hrep(
            self.ambient_dim,
            self.inequalities + other.inequalities,
            self.equations + other.equations,
        )

    def with_constraints(self, inequalities: Iterable[AffineForm] = (), equations: Iterable[AffineForm] = ()) -> "Polyhedron":
        if self.is_empty:
            return self
        return from_hrep(
            self.ambient_dim,
            self.inequalities + tuple(inequalities),
            self.equations + tuple(equations),
        )

    def tight_inequalities(self, x: Sequence) -> list[AffineForm]:
        return [f for f in self.inequalities if f(x) == 0]

    def tangent_cone(self, x: Sequence) -> "Polyhedron":
        """The cone of directions v with x + eps v in P for small eps > 0."""
        n = self.ambient_dim
        ineqs = [AffineForm(f.linear) for f in self.tight_inequalities(x)]
        eqs = [AffineForm(e.linear) for e in self.equations]
        return from_hrep(n, ineqs, eqs)

    def facets(self) -> list["Polyhedron"]:
        return [self.with_constraints(equations=[f]) for f in self.inequalities]

    def is_face_of(self, other: "Polyhedron") -> bool:
        """True iff this polyhedron is a face of ``other`` (the empty set always is)."""
        if self.is_empty:
            return True
        if not other.contains_polyhedron(self):
            return False
        pts = self.spanning_points()
        dirs = list(self.rays) + list(self.lineality)
        tight = [
            f
            for f in other.inequalities
            if all(f(p) == 0 for p in pts) and all(la.dot(f.linear, d) == 0 for d in dirs)
        ]
        return other.with_constraints(equations=tight) == self


def _canonical_equations(n: int, eqs: Sequence[Sequence]):
    red, pivots = la.rref(eqs) if eqs else ([], [])
    return red, pivots


def _assemble(n: int, eq_rows, ineq_rows, vertices, rays, lineality) -> Polyhedron:
    red_eq, piv_eq = la.rref(eq_rows) if eq_rows else ([], [])
    equations = tuple(sorted(AffineForm.from_row(_normalize(r)) for r in red_eq))
    ineqs = set()
    for r in ineq_rows:
        r = la.reduce_mod_span(r, red_eq, piv_eq)
        if la.is_zero(r[:-1]):
            continue
        ineqs.add(AffineForm.from_row(_normalize(r)))
    red_lin, piv_lin = la.rref(lineality) if lineality else ([], [])
    lin = tuple(sorted(_normalize(r) for r in red_lin))
    rs = set()
    for r in rays:
        r = la.reduce_mod_span(r, red_lin, piv_lin)
        if not la.is_zero(r):
            rs.add(_normalize(r))
    vs = {la.reduce_mod_span(v, red_lin, piv_lin) for v in vertices}
    return Polyhedron(
        ambient_dim=n,
        equations=equations,
        inequalities=tuple(sorted(ineqs)),
        vertices=tuple(sorted(vs)),
        rays=tuple(sorted(rs)),
        lineality=lin,
        dim=n - len(equations),
    )


def _check_guard(n: int, m: int = 0) -> None:
    guard = dimension_guard()
    if n > guard:
        raise DimensionGuardExceeded(f"ambient dimension {n} exceeds guard {guard}")
    if m > MAX_CONSTRAINTS:
        raise DimensionGuardExceeded(f"{m} constraints exceed the limit of {MAX_CONSTRAINTS}")


def empty_polyhedron(n: int) -> Polyhedron:
    return Polyhedron(
        ambient_dim=n,
        equations=(),
        inequalities=(AffineForm.const(n, -1),),
        vertices=(),
        rays=(),
        lineality=(),
        dim=-1,
    )


def _h_to_v(n: int, ineq_rows, eq_rows):
    # homogenized coordinates (x0, x): the form m.x + c becomes (c, m)
    hom_ineqs = [(Fraction(1),) + la.zero(n)] + [(r[-1],) + tuple(r[:-1]) for r in ineq_rows]
    hom_eqs = [(r[-1],) + tuple(r[:-1]) for r in eq_rows]
    rays, lineality = _double_description(hom_ineqs, hom_eqs, n + 1)
    vertices = [tuple(a / r[0] for a in r[1:]) for r in rays if r[0] > 0]
    if not vertices:
        return None
    recession = [tuple(r[1:]) for r in rays if r[0] == 0]
    return vertices, recession, [tuple(l[1:]) for l in lineality]


def _v_to_h(n: int, vertices, rays, lineality):
    gens = [(Fraction(1),) + tuple(v) for v in vertices] + [(Fraction(0),) + tuple(r) for r in rays]
    lin = [(Fraction(0),) + tuple(l) for l in lineality]
    dual_rays, dual_lin = _double_description(gens, lin, n + 1)
    # dual vector (a0, a) encodes a.x + a0
    ineq_rows = [tuple(r[1:]) + (r[0],) for r in dual_rays]
    eq_rows = [tuple(l[1:]) + (l[0],) for l in dual_lin]
    return ineq_rows, eq_rows


@lru_cache(maxsize=65536)
def _from_hrep_cached(n: int, ineq_rows: tuple, eq_rows: tuple) -> Polyhedron:
    v = _h_to_v(n, ineq_rows, eq_rows)
    if v is None:
        return empty_polyhedron(n)
    vertices, rays, lineality = v
    ineqs, eqs = _v_to_h(n, vertices, rays, lineality)
    return _assemble(n, eqs, ineqs, vertices, rays, lineality)


@lru_cache(maxsize=65536)
def _from_vrep_cached(n: int, vertices: tuple, rays: tuple, lineality: tuple) -> Polyhedron:
    if not vertices:
        return empty_polyhedron(n)
    ineqs, eqs = _v_to_h(n, vertices, rays, lineality)
    v = _h_to_v(n, ineqs, eqs)
    assert v is not None
    return _assemble(n, eqs, ineqs, *v)


def _rows(forms: Iterable, n: int) -> tuple:
    out = []
    for f in forms:
        if not isinstance(f, AffineForm):
            f = AffineForm.from_row(f)
        if f.ambient_dim != n:
            raise ValueError(f"constraint of dimension {f.ambient_dim} in Q^{n}")
        out.append(f.row())
    return tuple(sorted(set(out)))


def from_hrep(n: int, inequalities: Iterable = (), equations: Iterable = ()) -> Polyhedron:
    """Canonical polyhedron {x : f(x) >= 0, e(x) = 0}."""
    ineq_rows = _rows(inequalities, n)
    eq_rows = _rows(equations, n)
    _check_guard(n, len(ineq_rows) + 2 * len(eq_rows))
    return _from_hrep_cached(n, ineq_rows, eq_rows)


def from_vrep(n: int, vertices: Iterable = (), rays: Iterable = (), lineality: Iterable = ()) -> Polyhedron:
    """Canonical polyhedron conv(vertices) + cone(rays) + span(lineality)."""
    vs = tuple(sorted({la.vec(v) for v in vertices}))
    rs = tuple(sorted({la.vec(r) for r in rays if not la.is_zero(la.vec(r))}))
    ls = tuple(sorted({la.vec(l) for l in lineality if not la.is_zero(la.vec(l))}))
    for v in vs + rs + ls:
        if len(v) != n:
            raise ValueError(f"generator of dimension {len(v)} in Q^{n}")
    _check_guard(n)
    return _from_vrep_cached(n, vs, rs, ls)


def canonicalize(
    ambient_dim: int,
    *,
    inequalities: Iterable | None = None,
    equations: Iterable | None = None,
    vertices: Iterable | None = None,
    rays: Iterable | None = None,
    lineality: Iterable | None = None,
) -> Polyhedron:
    """Build a canonical polyhedron from exactly one of the two representations."""
    has_h = inequalities is not None or equations is not None
    has_v = vertices is not None or rays is not None or lineality is not None
    if has_h and has_v:
        raise ValueError("give either an H-representation or a V-representation, not both")
    if has_v:
        return from_vrep(ambient_dim, vertices or (), rays or (), lineality or ())
    return from_hrep(ambient_dim, inequalities or (), equations or ())


def whole_space(n: int) -> Polyhedron:
    return from_hrep(n)


def point(x: Sequence) -> Polyhedron:
    x = la.vec(x)
    return from_vrep(len(x), [x])


def cone(rays: Sequence[Sequence], lineality: Sequence[Sequence] = (), n: int | None = None) -> Polyhedron:
    if n is None:
        n = len((list(rays) + list(lineality))[0])
    return from_vrep(n, [la.zero(n)], rays, lineality)


# -- faces ------------------------------------------------------------------


def face_lattice(p: Polyhedron) -> list[list[Polyhedron]]:
    """All faces of ``p`` grouped by codimension (index 0 holds ``p`` itself).

    The empty face sits in the last group, at codimension ``dim + 1``.
    """
    return [list(g) for g in _face_lattice(p)]


@lru_cache(maxsize=4096)
def _face_lattice(p: Polyhedron) -> tuple:
    if p.is_empty:
        return ((p,),)
    groups: list[list[Polyhedron]] = [[p]]
    seen = {p}
    frontier = [p]
    while frontier:
        nxt: list[Polyhedron] = []
        for f in frontier:
            for g in f.facets():
                if g not in seen:
                    seen.add(g)
                    nxt.append(g)
        if not nxt:
            break
        nxt.sort()
        groups.append(nxt)
        frontier = nxt
    while len(groups) < p.dim + 1:
        groups.append([])
    groups.append([empty_polyhedron(p.ambient_dim)])
    return tuple(tuple(g) for g in groups)


def faces(p: Polyhedron, include_empty: bool = False) -> list[Polyhedron]:
    out = [f for group in face_lattice(p) for f in group]
    return out if include_empty else [f for f in out if not f.is_empty]


# -- (Z, Gamma)-rationality -------------------------------------------------


@dataclass(frozen=True)
class ZGammaResult:
    verdict: bool
    witness: AffineForm | None = None
    certificate: tuple = ()

    def __bool__(self) -> bool:
        return self.verdict


def _integral_multiple(f: AffineForm, g: Fraction) -> AffineForm | None:
    """Smallest positive multiple of ``f`` with integer linear part and constant in gZ."""
    base = AffineForm.from_row(la.clear_denominators(f.row()))
    # base has integer entries; scale by k so that k * const is in gZ
    if g == 0:
        return base if base.constant == 0 else None
    k = (base.constant / g).denominator
    return base.scaled(k)


def is_zgamma(p: Polyhedron, gamma_generators: Sequence, primitive: bool = False) -> ZGammaResult:
    """Decide whether ``p`` is cut out by affine forms with integer slopes and
    constants in the group generated by ``gamma_generators``.

    With ``primitive=True`` the linear part of each defining form is first
    scaled to a primitive integer vector and only that normalization is
    accepted (the stricter, lattice-primitive notion).
    """
    g = group_generator(gamma_generators)
    if p.is_empty:
        if g == 0:
            return ZGammaResult(False, AffineForm.const(p.ambient_dim, -1))
        return ZGammaResult(True, certificate=(AffineForm.const(p.ambient_dim, -g),))
    forms = list(p.equations) + list(p.inequalities)
    cert = []
    for f in forms:
        if primitive:
            prim = la.primitive_vector(f.linear)
            s = prim[next(i for i, a in enumerate(prim) if a != 0)] / f.linear[
                next(i for i, a in enumerate(f.linear) if a != 0)
            ]
            h = f.scaled(s)
            if not in_group(h.constant, gamma_generators):
                return ZGammaResult(False, h)
        else:
            h = _integral_multiple(f, g)
            if h is None:
                return ZGammaResult(False, f)
        cert.append(h)
    return ZGammaResult(True, certificate=tuple(cert))
