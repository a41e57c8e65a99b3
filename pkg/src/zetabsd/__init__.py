"""Numerical verification that zeta*(X,1) = chi(X,1) up to sign and powers of two
is equivalent to the Birch and Swinnerton-Dyer formula for arithmetic surfaces."""
from .fields import NumberFieldInvariants, lookup_field
from .fibers import FiberData, component_group, fls_check
from .lattice import IntegralStructure, PairedLattice, StructuredComplex, chi_structured, det_structured
from .numeric import equal_up_to_two_power, working_precision
from .records import bundled_records, dump_records, load_records
from .special_values import (SurfaceRecord, Verdict, chi_S, chi_X1, identity_fuzz, verify_equivalence,
                             zeta_star_S, zeta_star_X)

__version__ = "0.1.0"
