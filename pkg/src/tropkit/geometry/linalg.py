"""Exact linear algebra over Q and Z.

Vectors are tuples of :class:`fractions.Fraction` (or ``int`` for lattice
work); matrices are sequences of row vectors.  Nothing here ever touches a
float.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd, lcm
from typing import Iterable, Sequence

from ..errors import ZeroVector

Vector = tuple  # tuple[Fraction, ...]


def frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        raise TypeError("floating point values are not accepted")
    return Fraction(x)


def vec(xs: Iterable) -> tuple:
    return tuple(frac(x) for x in xs)


def zero(n: int) -> tuple:
    return (Fraction(0),) * n


def dot(u: Sequence, v: Sequence):
    return sum((a * b for a, b in zip(u, v)), Fraction(0))


def add(u: Sequence, v: Sequence) -> tuple:
    return tuple(a + b for a, b in zip(u, v))


def sub(u: Sequence, v: Sequence) -> tuple:
    return tuple(a - b for a, b in zip(u, v))


def scale(c, v: Sequence) -> tuple:
    return tuple(c * a for a in v)


def is_zero(v: Sequence) -> bool:
    return all(a == 0 for a in v)


def matvec(m: Sequence[Sequence], v: Sequence) -> tuple:
    return tuple(dot(row, v) for row in m)


def transpose(m: Sequence[Sequence], ncols: int | None = None) -> list[tuple]:
    if not m:
        return [() for _ in range(ncols or 0)]
    return [tuple(col) for col in zip(*m)]


def rref(rows: Sequence[Sequence]) -> tuple[list[tuple], list[int]]:
    """Reduced row echelon form; returns the nonzero rows and pivot columns."""
    m = [list(map(frac, r)) for r in rows]
    if not m:
        return [], []
    ncols = len(m[0])
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        p = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if p is None:
            continue
        m[r], m[p] = m[p], m[r]
        inv = 1 / m[r][c]
        m[r] = [a * inv for a in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return [tuple(row) for row in m[:r]], pivots


def rank(rows: Sequence[Sequence]) -> int:
    return len(rref(rows)[1])


def nullspace(rows: Sequence[Sequence], n: int) -> list[tuple]:
    """Basis of {x in Q^n : row . x = 0 for every row}."""
    red, pivots = rref(rows) if rows else ([], [])
    free = [c for c in range(n) if c not in pivots]
    basis = []
    for f in free:
        x = [Fraction(0)] * n
        x[f] = Fraction(1)
        for row, p in zip(red, pivots):
            x[p] = -row[f]
        basis.append(tuple(x))
    return basis


def reduce_mod_span(v: Sequence, red: Sequence[Sequence], pivots: Sequence[int]) -> tuple:
    """Canonical representative of ``v`` modulo the row space of an RREF matrix."""
    out = list(map(frac, v))
    for row, p in zip(red, pivots):
        if out[p] != 0:
            f = out[p]
            out = [a - f * b for a, b in zip(out, row)]
    return tuple(out)


def in_span(v: Sequence, rows: Sequence[Sequence]) -> bool:
    if not rows:
        return is_zero(v)
    red, pivots = rref(rows)
    return is_zero(reduce_mod_span(v, red, pivots))


def solve(a: Sequence[Sequence], b: Sequence) -> tuple | None:
    """One solution x of a x = b, or None if inconsistent."""
    if not a:
        return None if any(frac(x) != 0 for x in b) else ()
    n = len(a[0])
    aug = [tuple(row) + (bi,) for row, bi in zip(a, b)]
    red, pivots = rref(aug)
    if n in pivots:
        return None
    x = [Fraction(0)] * n
    for row, p in zip(red, pivots):
        x[p] = row[n]
    return tuple(x)


# -- integer lattice helpers ------------------------------------------------


def clear_denominators(v: Sequence) -> tuple[int, ...]:
    """Scale a rational vector by the lcm of its denominators."""
    fv = [frac(a) for a in v]
    m = 1
    for a in fv:
        m = lcm(m, a.denominator)
    return tuple(int(a * m) for a in fv)


def primitive_vector(v: Sequence) -> tuple[int, ...]:
    """The unique primitive integer vector that is a positive multiple of ``v``."""
    iv = clear_denominators(v)
    g = 0
    for a in iv:
        g = gcd(g, a)
    if g == 0:
        raise ZeroVector("primitive_vector of the zero vector")
    return tuple(a // g for a in iv)


def _echelon(rows: list[list[int]], pivot_cols: int) -> tuple[list[list[int]], list[int]]:
    """Integer row echelon form via unimodular row operations.

    Only the first ``pivot_cols`` columns are used for pivoting, so trailing
    columns can carry a transformation matrix.  Pivots are made positive and
    entries above a pivot are reduced into ``[0, pivot)``.
    """
    m = [list(r) for r in rows]
    pivots: list[int] = []
    r = 0
    for c in range(pivot_cols):
        while True:
            nz = [i for i in range(r, len(m)) if m[i][c] != 0]
            if not nz:
                break
            p = min(nz, key=lambda i: abs(m[i][c]))
            m[r], m[p] = m[p], m[r]
            done = True
            for i in range(r + 1, len(m)):
                if m[i][c] != 0:
                    q = m[i][c] // m[r][c]
                    m[i] = [a - q * b for a, b in zip(m[i], m[r])]
                    if m[i][c] != 0:
                        done = False
            if done:
                break
        if r < len(m) and m[r][c] != 0:
            if m[r][c] < 0:
                m[r] = [-a for a in m[r]]
            for i in range(r):
                q = m[i][c] // m[r][c]
                if q:
                    m[i] = [a - q * b for a, b in zip(m[i], m[r])]
            pivots.append(c)
            r += 1
            if r == len(m):
                break
    return m, pivots


def hnf(rows: Sequence[Sequence[int]]) -> list[tuple[int, ...]]:
    """Row-style Hermite normal form of an integer matrix (zero rows dropped)."""
    if not rows:
        return []
    n = len(rows[0])
    m, pivots = _echelon([list(map(int, r)) for r in rows], n)
    return [tuple(row) for row in m[: len(pivots)]]


def hnf_pivots(h: Sequence[Sequence[int]]) -> list[int]:
    return [next(i for i, a in enumerate(row) if a != 0) for row in h]


def reduce_mod_lattice(v: Sequence[int], h: Sequence[Sequence[int]]) -> tuple[int, ...]:
    """Canonical representative of ``v`` modulo the lattice with HNF basis ``h``.

    Coordinates at pivot columns end up in ``[0, pivot)``.  For ``v`` in the
    rational span of ``h`` and ``h`` saturated, the result is zero exactly
    when ``v`` lies in the lattice.
    """
    out = list(v)
    for row in h:
        p = next(i for i, a in enumerate(row) if a != 0)
        q = out[p] // row[p]
        if q:
            out = [a - q * b for a, b in zip(out, row)]
    return tuple(out)


def integer_kernel(rows: Sequence[Sequence], n: int) -> list[tuple[int, ...]]:
    """Z-basis (in HNF) of {x in Z^n : row . x = 0}."""
    int_rows = [clear_denominators(r) for r in rows if not is_zero(r)]
    if not int_rows:
        return [tuple(int(i == j) for j in range(n)) for i in range(n)]
    m = len(int_rows)
    aug = []
    for i in range(n):
        aug.append([r[i] for r in int_rows] + [int(i == j) for j in range(n)])
    red, pivots = _echelon(aug, m)
    kernel = [tuple(row[m:]) for row in red[len(pivots):]]
    return hnf(kernel)


def saturated_basis(spanning: Sequence[Sequence], n: int) -> list[tuple[int, ...]]:
    """HNF Z-basis of W ∩ Z^n where W is the Q-span of ``spanning``."""
    spanning = [s for s in spanning if not is_zero(s)]
    if not spanning:
        return []
    orth = nullspace(spanning, n)
    return integer_kernel(orth, n)
