"""Truncated multivariate Taylor polynomial arithmetic."""

from .context import (
    MAX_ORDER,
    TRUNCATION_DIRECTIONAL,
    TRUNCATION_TOTAL,
    MultiIndex,
    PolyContext,
    graded_lex_indices,
    monomial_count,
    multi_index_factorial,
    multi_index_order,
    poly_context,
)
from .polynomial import (
    PRUNE_THRESHOLD,
    TruncatedPolynomial,
    add,
    as_coefficients,
    compose,
    constant,
    evaluate,
    is_polynomial_state,
    mul,
    variables,
)
from .intrinsics import INTRINSICS, intrinsic
