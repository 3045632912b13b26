"""Piecewise affine and quadratic functions on tropical cycles.

A piece is ``x -> 1/2 x^T Q x + m . x + c``; ``Q = 0`` is the affine case.
The corner locus of ``f`` on a balanced cycle carries on each interior
codimension-1 face ``tau`` the weight function

    w_tau(x) = sum_sigma m_sigma <grad f_sigma(x), v_sigma> - D_t (f|_tau)(x),

where ``v_sigma`` represents the lattice normal u_{sigma/tau} and
``t = sum_sigma m_sigma v_sigma`` lies in lin(tau) by balancing.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .cycles import Box, TropicalCycle, check_balancing, make_cycle
from .errors import (
    ContinuityViolated,
    MissingPiece,
    NonConstantWeights,
    NotBalanced,
    PointNotOnSupport,
    SupportNotContained,
)
from .geometry import linalg as la
from .geometry.lattice import lattice_basis, lattice_normal_vector
from .geometry.polyhedron import AffineForm, Polyhedron


def _zero_matrix(n: int) -> tuple:
    return tuple(la.zero(n) for _ in range(n))


@dataclass(frozen=True)
class QuadraticForm:
    """The function ``x -> 1/2 x^T Q x + linear . x + constant``."""

    quadratic: tuple
    linear: tuple
    constant: Fraction = Fraction(0)

    def __post_init__(self):
        n = len(self.linear)
        q = self.quadratic if self.quadratic is not None else _zero_matrix(n)
        q = tuple(la.vec(r) for r in q)
        if len(q) != n or any(len(r) != n for r in q):
            raise ValueError("quadratic part must be an n x n matrix")
        if any(q[i][j] != q[j][i] for i in range(n) for j in range(i)):
            raise ValueError("quadratic part must be symmetric")
        object.__setattr__(self, "quadratic", q)
        object.__setattr__(self, "linear", la.vec(self.linear))
        object.__setattr__(self, "constant", la.frac(self.constant))

    @classmethod
    def affine(cls, form: AffineForm) -> "QuadraticForm":
        return cls(None, form.linear, form.constant)

    @property
    def ambient_dim(self) -> int:
        return len(self.linear)

    @property
    def is_affine(self) -> bool:
        return all(a == 0 for r in self.quadratic for a in r)

    def as_affine(self) -> AffineForm:
        if not self.is_affine:
            raise ValueError("piece is not affine")
        return AffineForm(self.linear, self.constant)

    def __call__(self, x: Sequence) -> Fraction:
        x = la.vec(x)
        qx = la.matvec(self.quadratic, x)
        return la.dot(x, qx) / 2 + la.dot(self.linear, x) + self.constant

    def gradient(self, x: Sequence) -> tuple:
        return la.add(la.matvec(self.quadratic, la.vec(x)), self.linear)

    def directional(self, v: Sequence) -> AffineForm:
        """The affine function ``x -> <grad f(x), v>``."""
        v = la.vec(v)
        return AffineForm(la.matvec(self.quadratic, v), la.dot(self.linear, v))

    def second(self, v: Sequence, w: Sequence | None = None) -> Fraction:
        v = la.vec(v)
        w = v if w is None else la.vec(w)
        return la.dot(v, la.matvec(self.quadratic, w))

    def restricted_hessian(self, basis: Sequence[Sequence]) -> list[list[Fraction]]:
        return [[self.second(b, c) for c in basis] for b in basis]

    def __add__(self, other) -> "QuadraticForm":
        if isinstance(other, AffineForm):
            other = QuadraticForm.affine(other)
        q = tuple(la.add(a, b) for a, b in zip(self.quadratic, other.quadratic))
        return QuadraticForm(q, la.add(self.linear, other.linear), self.constant + other.constant)

    def __neg__(self) -> "QuadraticForm":
        q = tuple(la.scale(-1, r) for r in self.quadratic)
        return QuadraticForm(q, la.scale(-1, self.linear), -self.constant)

    def __sub__(self, other) -> "QuadraticForm":
        if isinstance(other, AffineForm):
            other = QuadraticForm.affine(other)
        return self + (-other)


@dataclass(frozen=True)
class TropicalPolynomial:
    mode: str
    terms: tuple

    def __post_init__(self):
        if self.mode not in ("max", "min"):
            raise ValueError(f"mode must be 'max' or 'min', got {self.mode!r}")
        if not self.terms:
            raise ValueError("a tropical polynomial needs at least one term")
        object.__setattr__(self, "terms", tuple(self.terms))

    def __call__(self, x: Sequence) -> Fraction:
        vals = [t(x) for t in self.terms]
        return max(vals) if self.mode == "max" else min(vals)


@dataclass(frozen=True, eq=False)
class PiecewiseFunction:
    cycle: TropicalCycle
    pieces: dict

    def piece(self, i: int) -> QuadraticForm:
        try:
            return self.pieces[i]
        except KeyError:
            raise MissingPiece(i) from None

    @property
    def is_affine(self) -> bool:
        return all(p.is_affine for p in self.pieces.values())

    def __add__(self, other) -> "PiecewiseFunction":
        if isinstance(other, (AffineForm, QuadraticForm)):
            return PiecewiseFunction(self.cycle, {i: p + other for i, p in self.pieces.items()})
        if other.cycle is not self.cycle:
            raise ValueError("functions live on different cycles; refine to a common one first")
        return PiecewiseFunction(
            self.cycle, {i: self.pieces[i] + other.pieces[i] for i in self.pieces}
        )


def affine_function(c: TropicalCycle, form: AffineForm) -> PiecewiseFunction:
    q = QuadraticForm.affine(form)
    return PiecewiseFunction(c, {i: q for i in c.maximal})


# -- refinement -------------------------------------------------------------


def refine(c: TropicalCycle, g: TropicalPolynomial) -> tuple[TropicalCycle, PiecewiseFunction]:
    """Subdivide ``c`` into domains of linearity of ``g``.

    When several terms are active on a whole cell the lexicographically
    smallest ``(linear, constant)`` owns it.
    """
    terms = sorted(set(g.terms))
    sign = 1 if g.mode == "max" else -1
    owner: dict[Polyhedron, AffineForm] = {}
    weighted = []
    for cell, w in c.weighted_cells():
        for t in terms:
            ineqs = [(t - s).scaled(sign) for s in terms if s != t]
            region = cell.with_constraints(inequalities=ineqs) if ineqs else cell
            if region.dim != cell.dim or region in owner:
                continue
            owner[region] = t
            weighted.append((region, w))
    refined = make_cycle(weighted, require_pure=c.is_pure, box=c.box, trusted=True)
    pieces = {i: QuadraticForm.affine(owner[refined.cells[i]]) for i in refined.maximal}
    return refined, PiecewiseFunction(refined, pieces)


# -- continuity and evaluation ----------------------------------------------


@dataclass(frozen=True)
class ContinuityResult:
    verdict: bool
    face: int | None = None
    point: tuple | None = None

    def __bool__(self) -> bool:
        return self.verdict


def _vanishes_on(q: QuadraticForm, cell: Polyhedron) -> bool:
    p = cell.relative_interior_point()
    basis = cell.direction_basis()
    if q(p) != 0:
        return False
    g = q.gradient(p)
    if any(la.dot(g, b) != 0 for b in basis):
        return False
    return all(a == 0 for row in q.restricted_hessian(basis) for a in row)


def _nonzero_point(q: QuadraticForm, cell: Polyhedron) -> tuple:
    """A point of ``cell`` where ``q`` is nonzero; ``q`` must not vanish on aff(cell)."""
    candidates = list(cell.vertices) + cell.spanning_points() + [cell.relative_interior_point()]
    for x in candidates:
        if q(x) != 0:
            return x
    p0 = cell.relative_interior_point()
    basis = cell.direction_basis()
    dirs = list(basis) + [la.add(a, b) for i, a in enumerate(basis) for b in basis[i + 1:]]
    eps = Fraction(1)
    for _ in range(64):
        for d in dirs:
            for s in (1, -1):
                x = la.add(p0, la.scale(s * eps, d))
                if cell.contains(x) and q(x) != 0:
                    return x
        eps /= 2
    raise AssertionError("no witness point found for a non-vanishing difference")


def _cells_around(c: TropicalCycle) -> dict[int, list[int]]:
    around: dict[int, list[int]] = {}
    for s in c.maximal:
        for t in c.complex.faces_of(s):
            around.setdefault(t, []).append(s)
    return around


def check_continuity(f: PiecewiseFunction) -> ContinuityResult:
    c = f.cycle
    for s in c.maximal:
        f.piece(s)
    around = _cells_around(c)
    for t in sorted(around):
        sigmas = around[t]
        if len(sigmas) < 2:
            continue
        base = f.pieces[sigmas[0]]
        for s in sigmas[1:]:
            diff = f.pieces[s] - base
            if not _vanishes_on(diff, c.cells[t]):
                return ContinuityResult(False, t, _nonzero_point(diff, c.cells[t]))
    return ContinuityResult(True)


def evaluate(f: PiecewiseFunction, x: Sequence) -> Fraction:
    x = la.vec(x)
    for i in f.cycle.maximal:
        if f.cycle.cells[i].contains(x):
            return f.piece(i)(x)
    raise PointNotOnSupport(f"{tuple(map(str, x))} is not on the support")


# -- corner locus -----------------------------------------------------------


def restrict_form(form: AffineForm, cell: Polyhedron) -> AffineForm:
    """Canonical representative of ``form`` restricted to the affine hull of ``cell``."""
    if not cell.equations:
        return form
    red, piv = la.rref([e.row() for e in cell.equations])
    return AffineForm.from_row(la.reduce_mod_span(form.row(), red, piv))


@dataclass(frozen=True, eq=False)
class CornerLocus:
    """The corner locus of a function: faces of the source complex with weight functions."""

    source: PiecewiseFunction
    faces: tuple
    weight_functions: dict

    @property
    def ambient_dim(self) -> int:
        return self.source.cycle.ambient_dim

    @property
    def dim(self) -> int:
        return self.source.cycle.dim - 1

    @property
    def is_constant(self) -> bool:
        return all(w.is_constant() for w in self.weight_functions.values())

    def cell(self, tau: int) -> Polyhedron:
        return self.source.cycle.cells[tau]

    @property
    def cycle(self) -> TropicalCycle:
        if not self.is_constant:
            raise NonConstantWeights("corner locus has non-constant weight functions")
        weighted = [(self.cell(t), self.weight_functions[t].constant) for t in self.faces]
        if not weighted:
            return empty_cycle(self.ambient_dim, self.dim, self.source.cycle.box)
        return make_cycle(weighted, box=self.source.cycle.box, trusted=True)


def empty_cycle(n: int, d: int, box: Box | None = None) -> TropicalCycle:
    cyc = make_cycle([], ambient_dim=n, box=box)
    return TropicalCycle(cyc.complex, {}, d, box)


def corner_weight(f: PiecewiseFunction, tau: int, normals: dict | None = None) -> AffineForm:
    """Weight function of the corner locus on the face ``tau``.

    ``normals`` may map each adjacent maximal cell to its own representative
    of the lattice normal vector; the result does not depend on that choice.
    At an unbalanced face the tangential correction is undefined and the
    plain weighted slope sum is returned.
    """
    c = f.cycle
    sigmas = c.adjacent(tau)
    t = la.zero(c.ambient_dim)
    w = AffineForm.const(c.ambient_dim, 0)
    for s in sigmas:
        if normals is not None:
            v = la.vec(normals[s])
        else:
            v = la.vec(lattice_normal_vector(c.cells[s], c.cells[tau]))
        m = c.weights[s]
        w = w + f.pieces[s].directional(v).scaled(m)
        t = la.add(t, la.scale(m, v))
    if la.in_span(t, c.cells[tau].direction_basis()):
        w = w - f.pieces[sigmas[0]].directional(t)
    return restrict_form(w, c.cells[tau])


def corner_locus(
    f: PiecewiseFunction, normals: dict | None = None, require_balanced: bool = True
) -> CornerLocus:
    """The corner locus ``f . C``; requires continuity and balancing.

    ``normals`` optionally maps ``(sigma, tau)`` to lattice-normal
    representatives (used to check representative independence).
    ``require_balanced=False`` is a diagnostic mode for unbalanced inputs;
    the result is then not a cycle in general.
    """
    cont = check_continuity(f)
    if not cont:
        raise ContinuityViolated(cont.face, cont.point)
    bal = check_balancing(f.cycle)
    if require_balanced and not bal:
        raise NotBalanced(bal)
    weights = {}
    for tau in f.cycle.codim_one_faces():
        reps = None
        if normals is not None:
            reps = {s: normals[(s, tau)] for s in f.cycle.adjacent(tau)}
        w = corner_weight(f, tau, reps)
        if not w.is_zero():
            weights[tau] = w
    return CornerLocus(f, tuple(sorted(weights)), weights)


# -- plurisubharmonicity ----------------------------------------------------


def psd_witness(m: Sequence[Sequence]) -> tuple | None:
    """A vector z with z^T M z < 0, or None when the symmetric M is PSD.

    Symmetric Gaussian elimination with exact pivots: a negative pivot or a
    zero pivot with a nonzero row produces the witness.
    """
    k = len(m)
    if k == 0:
        return None
    m = [la.vec(r) for r in m]
    a = m[0][0]
    if a < 0:
        return (Fraction(1),) + la.zero(k - 1)
    if a == 0:
        j = next((j for j in range(1, k) if m[0][j] != 0), None)
        if j is not None:
            # z = s e_0 + e_j gives z^T M z = m_jj + 2 s m_0j; choose it to be -1
            s = (-1 - m[j][j]) / (2 * m[0][j])
            z = [Fraction(0)] * k
            z[0], z[j] = s, Fraction(1)
            return tuple(z)
        sub = psd_witness([r[1:] for r in m[1:]])
        return None if sub is None else (Fraction(0),) + sub
    schur = [
        [m[i][j] - m[i][0] * m[0][j] / a for j in range(1, k)] for i in range(1, k)
    ]
    sub = psd_witness(schur)
    if sub is None:
        return None
    z0 = -la.dot(m[0][1:], sub) / a
    return (z0,) + tuple(sub)


def is_psd(m: Sequence[Sequence]) -> bool:
    return psd_witness(m) is None


@dataclass(frozen=True)
class HessianViolation:
    cell: int
    direction: tuple
    value: Fraction


@dataclass(frozen=True)
class CornerViolation:
    face: int
    point: tuple
    value: Fraction


@dataclass(frozen=True, eq=False)
class PshReport:
    verdict: bool
    hessian_violations: tuple
    corner_violations: tuple
    corner_locus: CornerLocus | None = None

    def __bool__(self) -> bool:
        return self.verdict


def hessian_violation(f: PiecewiseFunction, s: int) -> HessianViolation | None:
    piece = f.pieces[s]
    if piece.is_affine:
        return None
    basis = lattice_basis(f.cycle.cells[s]).basis
    z = psd_witness(piece.restricted_hessian(basis))
    if z is None:
        return None
    d = la.zero(f.cycle.ambient_dim)
    for zi, b in zip(z, basis):
        d = la.add(d, la.scale(zi, la.vec(b)))
    d = la.vec(la.primitive_vector(d))
    return HessianViolation(s, d, piece.second(d))


def negative_point(w: AffineForm, cell: Polyhedron) -> tuple | None:
    """A point of ``cell`` where the affine ``w`` is negative, or None if w >= 0 on it."""
    for v in cell.vertices:
        if w(v) < 0:
            return v
    v0 = cell.vertices[0]
    base = w(v0)
    for r in cell.generators():
        slope = la.dot(w.linear, r)
        if slope < 0:
            k = (base + 1) / (-slope)
            k = max(Fraction(1), Fraction(-(-k.numerator // k.denominator)))
            return la.add(v0, la.scale(k, r))
    return None


def check_psh(f: PiecewiseFunction) -> PshReport:
    """Facewise Hessian positivity plus nonnegativity of all corner weights."""
    cl = corner_locus(f)
    hess = []
    for s in f.cycle.maximal:
        v = hessian_violation(f, s)
        if v is not None:
            hess.append(v)
    corners = []
    for tau in cl.faces:
        w = cl.weight_functions[tau]
        x = negative_point(w, cl.cell(tau))
        if x is not None:
            corners.append(CornerViolation(tau, x, w(x)))
    return PshReport(not hess and not corners, tuple(hess), tuple(corners), cl)


# -- restriction ------------------------------------------------------------


def restrict(f: PiecewiseFunction, d: TropicalCycle) -> PiecewiseFunction:
    """Restrict ``f`` to a cycle whose maximal cells each lie in a maximal cell of f's cycle."""
    src = f.cycle
    pieces = {}
    for i in d.maximal:
        cell = d.cells[i]
        host = next((s for s in src.maximal if src.cells[s].contains_polyhedron(cell)), None)
        if host is None:
            raise SupportNotContained(f"cell {cell} is not inside any cell of the source cycle")
        pieces[i] = f.piece(host)
    return PiecewiseFunction(d, pieces)
