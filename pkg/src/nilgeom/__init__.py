"""Symbolic-numeric toolkit for weighted filtrations of polynomial vector
fields: osculating nilpotent Lie algebras, tangent and Helffer-Nourrigat
cones, orbit-method representations, weighted principal symbols, and spectral
hypoellipticity verdicts."""

from .polyfield import Polynomial, VectorField, lie_bracket, evaluate, parse_field
from .grading import (GradedBasis, GradedStructure, generate_filtration,
                      build_graded_basis, dilate, natural_eval,
                      check_hormander, check_weak_commutativity)
from .nilpotent import (NilpotentAlgebra, AlgebraElement, Covector, bracket,
                        bch, ad_exp, coadjoint, dual_dilate)
from .osculating import OsculatingAlgebra, osculating_algebra, membership
from .grassmann import Subspace, kernel, distance, limit, annihilator
from .hncone import (TangentCone, HNSample, sample_tangent_cones,
                     example_cone_catalog, hn_at_point, hn_directional,
                     nonsingular_filter)
from .orbit import (Polarization, Representation, bilinear_form,
                    vergne_polarization, induced_rep, rep_of_covector,
                    rep_dilate)
from .diffop import CPoly, DiffOp, compose, adjoint
from .symbol import Generator, WeightedOperator, max_part, principal_symbol, parse_operator
from .spectra import hermite_matrix, eigenvalues, injectivity_test, rockland_scan

__version__ = "0.1.0"
