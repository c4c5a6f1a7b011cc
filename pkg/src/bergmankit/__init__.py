"""Weighted Bergman spaces on the unit ball of C^n: geometry, quadrature,
polynomial operators, lattices and atoms, norm estimation, experiments."""

from . import geometry, lattice, measure, normlab, operators, poly, scenarios
from .lattice import (
    AtomSpec,
    CoefficientSequence,
    FactorizationCertificate,
    Lattice,
    analyze,
    generate_lattice,
    synthesize,
    verify_lattice,
    weak_factorize,
)
from .measure import HolderFrame, QuadratureRule, SpaceParams, build_rule, holder_frame
from .normlab import NormEstimate, OptConfig, hankel_form_norm, oplus_norm_upper, opnorm, poly_norm, ratio_sweep
from .operators import TruncatedOperator, bergman_project, hankel_form_matrix, kernel_symbol, small_hankel_matrix
from .poly import Polynomial, format_polynomial, parse_polynomial
from .scenarios import ExperimentReport, ScenarioConfig, emit, load_config, plot_data, run

__version__ = "0.1.0"
