"""Residual checks, identity chains and stability bounds for the mixed
cubic-quartic functional equation on the real line."""

from .bounds import (
    Constant,
    Custom,
    PowerSum,
    ProductSum,
    SeriesEvaluation,
    closed_form_bound,
    combined_bound,
    control_from_json,
    convergence_precheck,
    cubic_series_bound,
    phi_eval,
    quartic_series_bound,
    select_direction,
)
from .diffop import (
    CUBIC_TERMS,
    OPERATOR_ABS_SUM,
    OPERATOR_TERMS,
    QUARTIC_TERMS,
    ResidualReport,
    cubic_residual_at,
    quartic_residual_at,
    residual_at,
    sup_residual,
    symbolic_residual,
)
from .errors import *  # noqa: F401,F403
from .funcmodel import (
    Perturbed,
    Polynomial,
    SampleGrid,
    Tabulated,
    decompose_parity,
    dyadic_grid,
    evaluate,
    make_perturbed,
    make_polynomial,
    make_tabulated,
    model_from_json,
    model_to_json,
    parity_parts,
    sup_norm_on_grid,
    tabulate,
)
from .hyers import (
    ComponentResult,
    ConvergenceCriteria,
    StabilizationReport,
    cubic_approximant,
    extract_component,
    quartic_approximant,
    recover_coefficients,
    stabilize,
)
from .identities import (
    FunctionalIdentity,
    IdentityCheckReport,
    check_chain,
    check_numeric,
    check_symbolic,
    lookup,
    registry,
)
from .polynomial import BivariatePolynomial

__version__ = "0.1.0"
