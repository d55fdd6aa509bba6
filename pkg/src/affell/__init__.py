"""Commuting elliptic difference-reflection operators attached to affine
root systems, with a numerical verification harness."""

from .harness import CheckReport, ScenarioConfig, emit_report, run_suite, run_theta_closure
from .operators import (
    BASIC,
    EvalContext,
    bar_y_operator,
    h_coefficient,
    bc_type_difference_op,
    make_context,
    minuscule_closed_form,
    quasi_minuscule_closed_form,
    r_matrix,
    a_type_difference_op,
    translation_operator,
    unitarity_scalar,
    y_operator,
)
from .root_system import AffineRoot, AffineRootDatum, build_root_datum, coupling_dict
from .theta import (
    PoleError,
    SeriesConfig,
    ThetaBasisElement,
    TruncationError,
    jacobi_theta,
    symmetrise_basis,
    theta_basis,
)
from .weyl import ExtendedWeylElement, ReducedWord, bfs_length_table, reduced_word

__version__ = "0.1.0"

__all__ = [
    "AffineRoot",
    "AffineRootDatum",
    "BASIC",
    "CheckReport",
    "EvalContext",
    "ExtendedWeylElement",
    "PoleError",
    "ReducedWord",
    "ScenarioConfig",
    "SeriesConfig",
    "ThetaBasisElement",
    "TruncationError",
    "bar_y_operator",
    "bfs_length_table",
    "build_root_datum",
    "coupling_dict",
    "emit_report",
    "h_coefficient",
    "jacobi_theta",
    "bc_type_difference_op",
    "make_context",
    "minuscule_closed_form",
    "quasi_minuscule_closed_form",
    "r_matrix",
    "reduced_word",
    "a_type_difference_op",
    "run_suite",
    "run_theta_closure",
    "symmetrise_basis",
    "theta_basis",
    "translation_operator",
    "unitarity_scalar",
    "y_operator",
]
