"""Exact Oresme polynomial toolkit."""

from .algebra import (
    LaurentPoly,
    Mat2,
    Rational,
    RationalFunction,
    ZeroPoint,
    mat_mul,
    mat_pow,
    poly_derivative,
    poly_eval_exact,
    poly_eval_float,
    rf_equals,
)
from .sequences import (
    fibonacci,
    oresme,
    oresme_by_matrix,
    oresme_derivative_poly,
    oresme_eval,
    oresme_neg_index,
    oresme_poly,
    oresme_poly_closed,
    prefix_sums,
)

__version__ = "0.1.0"
