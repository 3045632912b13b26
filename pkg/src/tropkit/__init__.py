"""Exact tropical geometry toolkit: cycles, corner loci, psh checks and slicing."""

from .cycles import (
    Box,
    TropicalCycle,
    check_balancing,
    cycles_equal,
    local_dimension,
    make_cycle,
    star,
    validate_complex,
)
from .errors import TropkitError
from .geometry.lattice import lattice_normal_vector, primitive_vector
from .geometry.polyhedron import (
    AffineForm,
    Polyhedron,
    canonicalize,
    cone,
    face_lattice,
    from_hrep,
    from_vrep,
    is_zgamma,
    whole_space,
)
from .maxprinciple import is_local_max, recheck_trace, slicing_trace, verify_max_principle
from .plfunc import (
    PiecewiseFunction,
    QuadraticForm,
    TropicalPolynomial,
    affine_function,
    check_continuity,
    check_psh,
    corner_locus,
    evaluate,
    refine,
    restrict,
)
from .slicing import RationalHyperplane, is_generic, sample_generic_hyperplane, stable_intersect

__version__ = "0.1.0"

__all__ = [
    "AffineForm",
    "Box",
    "PiecewiseFunction",
    "Polyhedron",
    "QuadraticForm",
    "RationalHyperplane",
    "TropicalCycle",
    "TropicalPolynomial",
    "TropkitError",
    "affine_function",
    "canonicalize",
    "check_balancing",
    "check_continuity",
    "check_psh",
    "cone",
    "corner_locus",
    "cycles_equal",
    "evaluate",
    "face_lattice",
    "from_hrep",
    "from_vrep",
    "is_generic",
    "is_local_max",
    "is_zgamma",
    "lattice_normal_vector",
    "local_dimension",
    "make_cycle",
    "primitive_vector",
    "recheck_trace",
    "refine",
    "restrict",
    "sample_generic_hyperplane",
    "slicing_trace",
    "stable_intersect",
    "star",
    "validate_complex",
    "verify_max_principle",
    "whole_space",
]
