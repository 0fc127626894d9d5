from .nodes import CoeffExpr, Const, to_text
from .parser import parse
from .calculus import can_kink, compile_expr, derive, derive_n, evaluate, evaluate_on, kink_hit
from .operators import (
    MiddleTerm,
    apply_operator_2nd,
    apply_operator_4th,
    operator_expr_2nd,
    operator_expr_4th,
    sgnpow_expr,
)


def as_expr(value) -> CoeffExpr:
    """Accept a CoeffExpr, a number or grammar text."""
    if isinstance(value, CoeffExpr):
        return value
    if isinstance(value, (int, float)):
        return CoeffExpr(Const(float(value)))
    return parse(str(value))
