"""Exact domain-wall and spiral ground states of the deformed flat-band Hubbard chain."""

from .model import (DerivedConstants, Lattice, ModelParams, ParameterError, Site, build_lattice,
                    derive_constants)
from .normfunc import b_forward, b_limit, b_value, normalization, ratio_bounds
from .observables import GroundState, DecayFit, fit_decay

__all__ = [
    "DerivedConstants", "Lattice", "ModelParams", "ParameterError", "Site", "build_lattice",
    "derive_constants", "b_forward", "b_limit", "b_value", "normalization", "ratio_bounds",
    "GroundState", "DecayFit", "fit_decay",
]
__version__ = "0.1.0"
