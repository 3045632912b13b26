"""Integer lattices attached to polyhedra and lattice normal vectors."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from ..errors import NotACodimOneFace
from . import linalg as la
from .polyhedron import Polyhedron

primitive_vector = la.primitive_vector


@dataclass(frozen=True)
class LatticeBasis:
    """A Z-basis (in Hermite normal form) of lin(P) ∩ Z^n."""

    basis: tuple

    @property
    def rank(self) -> int:
        return len(self.basis)

    def reduce(self, v) -> tuple:
        """Canonical representative of an integer vector modulo this lattice."""
        return la.reduce_mod_lattice(tuple(int(a) for a in v), self.basis)

    def contains(self, v) -> bool:
        v = la.vec(v)
        if any(a.denominator != 1 for a in v):
            return False
        # the lattice is saturated: integrality plus membership in the span suffice
        return la.in_span(v, self.basis)


@lru_cache(maxsize=65536)
def lattice_basis(p: Polyhedron) -> LatticeBasis:
    return LatticeBasis(tuple(la.saturated_basis(p.direction_basis(), p.ambient_dim)))


def _ext_gcd_combination(values: list[int]) -> tuple[int, list[int]]:
    """g = gcd(values) >= 0 and integer coefficients c with sum c_i v_i = g."""
    g, coeffs = 0, [0] * len(values)
    for i, v in enumerate(values):
        # extended Euclid on (g, v)
        old_r, r = g, v
        old_s, s = 1, 0
        old_t, t = 0, 1
        while r != 0:
            q = old_r // r
            old_r, r = r, old_r - q * r
            old_s, s = s, old_s - q * s
            old_t, t = t, old_t - q * t
        if old_r < 0:
            old_r, old_s, old_t = -old_r, -old_s, -old_t
        coeffs = [c * old_s for c in coeffs]
        coeffs[i] = old_t
        g = old_r
    return g, coeffs


@lru_cache(maxsize=65536)
def facet_form(sigma: Polyhedron, tau: Polyhedron):
    """The facet inequality of ``sigma`` that cuts out ``tau``."""
    if tau.is_empty or sigma.is_empty or tau.dim != sigma.dim - 1:
        raise NotACodimOneFace(f"{tau} is not a codimension-1 face of {sigma}")
    for f in sigma.inequalities:
        if sigma.with_constraints(equations=[f]) == tau:
            return f
    raise NotACodimOneFace(f"{tau} is not a face of {sigma}")


@lru_cache(maxsize=65536)
def lattice_normal_vector(sigma: Polyhedron, tau: Polyhedron) -> tuple[int, ...]:
    """Canonical integer vector u_{sigma/tau}.

    ``u`` lies in lin(sigma) ∩ Z^n, generates the quotient
    (lin(sigma) ∩ Z^n) / (lin(tau) ∩ Z^n), points from ``tau`` into
    ``sigma``, and is reduced modulo the Hermite basis of lin(tau) ∩ Z^n.
    """
    f = facet_form(sigma, tau)
    s_basis = lattice_basis(sigma).basis
    # canonical facet forms are integer rows, so these values are integers
    ivals = [int(la.dot(f.linear, b)) for b in s_basis]
    g, coeffs = _ext_gcd_combination(ivals)
    u = [0] * sigma.ambient_dim
    for c, b in zip(coeffs, s_basis):
        if c:
            u = [a + c * x for a, x in zip(u, b)]
    assert g > 0 and la.dot(f.linear, u) == g
    t_basis = lattice_basis(tau).basis
    return la.reduce_mod_lattice(tuple(u), t_basis)


def normal_scale(sigma: Polyhedron, tau: Polyhedron, u) -> Fraction:
    """Value of the facet form of tau on u; equals the lattice index for u_{sigma/tau}."""
    return la.dot(facet_form(sigma, tau).linear, u)
