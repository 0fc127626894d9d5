"""
Half-linear differential operators applied to expression-defined functions.

    second order:  l[u] = [p phi(u')]' + q phi(u)
    fourth order:  l[u] = [a phi(u'')]'' - [b phi(u')]^(k) + c phi(u)

with k = 1 (first-derivative middle term, default) or k = 2 (as printed).
"""

import enum

from hlpicone.coeffexpr.calculus import derive, derive_n, evaluate
from hlpicone.coeffexpr.nodes import CoeffExpr, SgnPow
from hlpicone.sgnpow import AlphaLike, as_alpha


class MiddleTerm(str, enum.Enum):
    FIRST_DERIVATIVE = "first_derivative"
    AS_PRINTED_SECOND_DERIVATIVE = "as_printed_second_derivative"

    @property
    def order(self) -> int:
        return 1 if self is MiddleTerm.FIRST_DERIVATIVE else 2


def sgnpow_expr(expr: CoeffExpr, alpha: AlphaLike) -> CoeffExpr:
    return CoeffExpr(SgnPow(expr.root, as_alpha(alpha)))


def operator_expr_2nd(p: CoeffExpr, q: CoeffExpr, alpha: AlphaLike, u: CoeffExpr) -> CoeffExpr:
    flux = p * sgnpow_expr(derive(u), alpha)
    return derive(flux) + q * sgnpow_expr(u, alpha)


def operator_expr_4th(
    a: CoeffExpr,
    b: CoeffExpr,
    c: CoeffExpr,
    alpha: AlphaLike,
    u: CoeffExpr,
    middle_term: MiddleTerm = MiddleTerm.FIRST_DERIVATIVE,
) -> CoeffExpr:
    du = derive(u)
    d2u = derive(du)
    main = derive_n(a * sgnpow_expr(d2u, alpha), 2)
    middle = derive_n(b * sgnpow_expr(du, alpha), MiddleTerm(middle_term).order)
    return main - middle + c * sgnpow_expr(u, alpha)


def apply_operator_2nd(
    p: CoeffExpr, q: CoeffExpr, alpha: AlphaLike, u: CoeffExpr, x: float
) -> float:
    return evaluate(operator_expr_2nd(p, q, alpha, u), x)


def apply_operator_4th(
    a: CoeffExpr,
    b: CoeffExpr,
    c: CoeffExpr,
    alpha: AlphaLike,
    u: CoeffExpr,
    x: float,
    middle_term: MiddleTerm = MiddleTerm.FIRST_DERIVATIVE,
) -> float:
    return evaluate(operator_expr_4th(a, b, c, alpha, u, middle_term), x)
