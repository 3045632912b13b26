"""Random balanced cycles and functions for property tests.

Everything is driven by an explicit ``random.Random`` so each instance is
reproducible from its seed.
"""

from __future__ import annotations

import random
import warnings
from fractions import Fraction
from functools import lru_cache

from tropkit.cycles import TropicalCycle, check_balancing, make_cycle
from tropkit.geometry import linalg as la
from tropkit.geometry.polyhedron import AffineForm, cone, from_vrep, whole_space
from tropkit.plfunc import (
    PiecewiseFunction,
    QuadraticForm,
    TropicalPolynomial,
    corner_locus,
    refine,
    restrict,
)
from tropkit.slicing import is_generic, RationalHyperplane, stable_intersect


def unimodular(rng: random.Random, n: int, steps: int = 3) -> list[list[int]]:
    """Random integer matrix with determinant +-1 built from elementary moves."""
    a = [[int(i == j) for j in range(n)] for i in range(n)]
    for _ in range(steps):
        i, j = rng.sample(range(n), 2) if n > 1 else (0, 0)
        if i == j:
            continue
        k = rng.choice([-1, 1])
        a[i] = [x + k * y for x, y in zip(a[i], a[j])]
    if rng.random() < 0.5:
        rng.shuffle(a)
    return a


def apply(a, v) -> tuple:
    return tuple(sum(Fraction(r[j]) * v[j] for j in range(len(v))) for r in a)


def transform(c: TropicalCycle, a, shift=None) -> TropicalCycle:
    """Image of ``c`` under x -> a x + shift; balancing is preserved for unimodular a."""
    n = c.ambient_dim
    shift = la.vec(shift) if shift is not None else la.zero(n)
    cells = []
    for cell, w in c.weighted_cells():
        verts = [la.add(apply(a, v), shift) for v in cell.vertices]
        cells.append(
            (from_vrep(n, verts, [apply(a, r) for r in cell.rays], [apply(a, l) for l in cell.lineality]), w)
        )
    return make_cycle(cells)


def random_form(rng: random.Random, n: int, slope: int = 2, const: int = 3, den: int = 1) -> AffineForm:
    return AffineForm(
        tuple(rng.randint(-slope, slope) for _ in range(n)),
        Fraction(rng.randint(-const * den, const * den), den),
    )


def random_polynomial(rng: random.Random, n: int, terms: int = 3, mode: str = "max", **kw) -> TropicalPolynomial:
    forms = {random_form(rng, n, **kw) for _ in range(terms)}
    return TropicalPolynomial(mode, tuple(sorted(forms)))


# -- cycles -----------------------------------------------------------------


def line_fan(rng: random.Random, n: int, rays: int | None = None) -> TropicalCycle:
    """One-dimensional balanced fan: random rays closed up by their negated sum."""
    while True:
        k = rays or rng.randint(2, 4)
        vs = []
        for _ in range(k - 1):
            v = tuple(rng.randint(-2, 2) for _ in range(n))
            if any(v):
                vs.append(la.primitive_vector(v))
        total = la.zero(n)
        for v in vs:
            total = la.add(total, v)
        if not vs or la.is_zero(total):
            continue
        last = la.primitive_vector(la.scale(-1, total))
        mult = Fraction(abs(next(a for a in total if a))) / abs(next(a for a in last if a))
        merged: dict = {}
        for v in vs:
            merged[tuple(v)] = merged.get(tuple(v), 0) + 1
        merged[tuple(last)] = merged.get(tuple(last), 0) + mult
        cells = [(cone([v], [], n), w) for v, w in merged.items()]
        # skip draws with opposite rays, so two-ray fans never come out of here
        if any(tuple(la.scale(-1, v)) in merged for v in merged):
            continue
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            c = make_cycle(cells)
        assert check_balancing(c)
        return c


@lru_cache(maxsize=None)
def hyperplane_fan(n: int) -> TropicalCycle:
    """Corner locus of max(x_1, ..., x_n, 0): the standard tropical hyperplane."""
    forms = [AffineForm(tuple(int(i == j) for j in range(n))) for i in range(n)]
    forms.append(AffineForm.const(n, 0))
    _, f = refine(make_cycle([(whole_space(n), 1)]), TropicalPolynomial("max", tuple(forms)))
    return corner_locus(f).cycle


def linear_space(rng: random.Random, n: int, d: int) -> TropicalCycle:
    """A rational linear subspace with a random positive weight."""
    while True:
        gens = [tuple(rng.randint(-2, 2) for _ in range(n)) for _ in range(d)]
        if la.rank(gens) == d:
            return make_cycle([(from_vrep(n, [la.zero(n)], [], gens), rng.randint(1, 3))])


def hypersurface(rng: random.Random, n: int, terms: int = 3) -> TropicalCycle:
    """Tropical hypersurface of a random polynomial (possibly empty, then retried)."""
    base = make_cycle([(whole_space(n), 1)])
    while True:
        g = random_polynomial(rng, n, terms)
        _, f = refine(base, g)
        cl = corner_locus(f)
        if cl.faces:
            return cl.cycle


def random_fan(rng: random.Random, n: int, d: int | None = None) -> TropicalCycle:
    """A balanced effective fan centred at 0 with n <= 4 and d <= 3."""
    d = d if d is not None else rng.randint(1, min(3, n))
    kind = rng.random()
    if d == 1 and kind < 0.6:
        return line_fan(rng, n)
    if d == n - 1 and kind < 0.7:
        return transform(hyperplane_fan(n), unimodular(rng, n))
    if d == n:
        return make_cycle([(whole_space(n), rng.randint(1, 2))])
    if d == n - 2 and n >= 3 and kind < 0.8:
        # a generic linear slice of the hyperplane fan in one dimension higher
        big = hyperplane_fan(n)
        for _ in range(20):
            normal = tuple(rng.randint(-3, 3) for _ in range(n))
            if not any(normal):
                continue
            h = RationalHyperplane(tuple(int(a) for a in la.primitive_vector(normal)))
            if is_generic(big, h):
                return stable_intersect(big, h)
    return linear_space(rng, n, d)


def random_cycle(rng: random.Random, n: int | None = None, fan_only: bool = False) -> TropicalCycle:
    """A balanced (mostly effective) cycle, fan or not, with n <= 4, d <= 3."""
    n = n or rng.randint(2, 3)
    r = rng.random()
    if fan_only or r < 0.45:
        c = random_fan(rng, n)
    elif r < 0.85 and n <= 3:
        c = hypersurface(rng, n, rng.randint(2, 3))
    else:
        shift = [Fraction(rng.randint(-4, 4), rng.randint(1, 2)) for _ in range(n)]
        c = transform(random_fan(rng, n), unimodular(rng, n), shift)
    return c


# -- functions --------------------------------------------------------------


def refine_all(c: TropicalCycle, polys) -> tuple[TropicalCycle, list[PiecewiseFunction]]:
    """Common refinement of ``c`` by several polynomials, with each as a function on it."""
    cur = c
    fs = []
    for g in polys:
        cur, f = refine(cur, g)
        fs = [restrict(h, cur) for h in fs] + [f]
    return cur, fs


def combine(fs, coeffs) -> PiecewiseFunction:
    c = fs[0].cycle
    pieces = {}
    for s in c.maximal:
        q = QuadraticForm.affine(AffineForm.const(c.ambient_dim, 0))
        for f, k in zip(fs, coeffs):
            p = f.pieces[s]
            q = q + QuadraticForm(
                None if p.is_affine else tuple(tuple(k * a for a in row) for row in p.quadratic),
                la.scale(k, p.linear),
                k * p.constant,
            )
        pieces[s] = q
    return PiecewiseFunction(c, pieces)


def random_pl_function(rng: random.Random, c: TropicalCycle, terms: int = 3) -> PiecewiseFunction:
    """max - max of random tropical polynomials, plus a random affine form."""
    n = c.ambient_dim
    polys = [random_polynomial(rng, n, rng.randint(1, terms))]
    if rng.random() < 0.5:
        polys.append(random_polynomial(rng, n, rng.randint(1, terms)))
    coeffs = [rng.choice([1, 1, 2])] + [rng.choice([-1, 1])] * (len(polys) - 1)
    _, fs = refine_all(c, polys)
    f = combine(fs, coeffs)
    return f + QuadraticForm.affine(random_form(rng, n, slope=1, const=1))
