"""
Half-linear equations closed as first-order quasi-derivative systems.

Second order, state (u, p phi(u'))::

    y1' = phi_inv(y2 / p)
    y2' = -q phi(y1)

Fourth order, state (u, u', a phi(u''), [a phi(u'')]' - b phi(u'))::

    y1' = y2
    y2' = phi_inv(y3 / a)
    y3' = y4 + b phi(y2)
    y4' = -c phi(y1)

With the as-printed middle term [b phi(u')]'' the last component is
[a phi(u'')]' - [b phi(u')]' and y3' picks up the derivative of b phi(u').
"""

import math
from dataclasses import dataclass, field
from typing import ClassVar, Dict, Sequence, Tuple

import numpy as np

from hlpicone.coeffexpr import (
    CoeffExpr,
    MiddleTerm,
    as_expr,
    compile_expr,
    derive,
    evaluate_on,
    operator_expr_2nd,
    operator_expr_4th,
)
from hlpicone.errors import DomainError, SingularCoefficientError
from hlpicone.sgnpow import abs_power, as_alpha, signed_power, spow

# points of the construction-time check that the leading coefficient never vanishes
CHECK_POINTS = 1001


def check_interval(interval: Sequence[float]) -> Tuple[float, float]:
    if len(interval) != 2:
        raise DomainError(f"interval must have two endpoints, got {interval!r}")
    x0, x1 = float(interval[0]), float(interval[1])
    if not (math.isfinite(x0) and math.isfinite(x1)) or x0 >= x1:
        raise DomainError(f"interval must satisfy x0 < x1, got [{x0!r}, {x1!r}]")
    return x0, x1


def _check_leading(name: str, expr: CoeffExpr, interval: Tuple[float, float]) -> None:
    fn = compile_expr(expr)
    for x in np.linspace(interval[0], interval[1], CHECK_POINTS):
        value = fn(float(x))
        if value == 0:
            raise SingularCoefficientError(name, float(x))
        if not math.isfinite(value):
            raise DomainError(f"coefficient {name} is not finite at x={float(x)!r}")


def _abspow(v: float, c: float) -> float:
    return float(abs_power(v, c))


@dataclass(frozen=True)
class SecondOrderProblem:
    """[p phi(u')]' + q phi(u) = 0 on ``interval``."""

    p: CoeffExpr
    q: CoeffExpr
    alpha: float
    interval: Tuple[float, float]

    order: ClassVar[int] = 2
    state_dim: ClassVar[int] = 2
    field_names: ClassVar[Tuple[str, ...]] = ("u", "du", "p_phi_du")

    def __post_init__(self):
        object.__setattr__(self, "p", as_expr(self.p))
        object.__setattr__(self, "q", as_expr(self.q))
        object.__setattr__(self, "alpha", as_alpha(self.alpha))
        object.__setattr__(self, "interval", check_interval(self.interval))
        _check_leading("p", self.p, self.interval)

    def rhs(self, x: float, y: np.ndarray) -> np.ndarray:
        return rhs2(self, x, y)

    def scale_factors(self, c: float) -> np.ndarray:
        """Per-component factors mapping a solution u to c u."""
        return np.array([c, spow(c, self.alpha)])

    def fields_from_states(self, xs: np.ndarray, ys: np.ndarray) -> Dict[str, np.ndarray]:
        p = evaluate_on(self.p, xs)
        if np.any(p == 0):
            x = float(xs[np.argmax(p == 0)])
            raise SingularCoefficientError("p", x)
        return {
            "u": ys[:, 0],
            "du": signed_power(ys[:, 1] / p, 1.0 / self.alpha),
            "p_phi_du": ys[:, 1],
        }

    def operator_expr(self, u: CoeffExpr) -> CoeffExpr:
        return operator_expr_2nd(self.p, self.q, self.alpha, u)


@dataclass(frozen=True)
class FourthOrderProblem:
    """[a phi(u'')]'' - [b phi(u')]^(k) + c phi(u) = 0, k set by ``middle_term``."""

    a: CoeffExpr
    b: CoeffExpr
    c: CoeffExpr
    alpha: float
    interval: Tuple[float, float]
    middle_term: MiddleTerm = MiddleTerm.FIRST_DERIVATIVE
    db: CoeffExpr = field(init=False, repr=False, compare=False)

    order: ClassVar[int] = 4
    state_dim: ClassVar[int] = 4
    field_names: ClassVar[Tuple[str, ...]] = (
        "u",
        "du",
        "d2u",
        "a_phi_d2u",
        "a_phi_d2u_d",
        "b_phi_du",
    )

    def __post_init__(self):
        for name in ("a", "b", "c"):
            object.__setattr__(self, name, as_expr(getattr(self, name)))
        object.__setattr__(self, "alpha", as_alpha(self.alpha))
        object.__setattr__(self, "interval", check_interval(self.interval))
        object.__setattr__(self, "middle_term", MiddleTerm(self.middle_term))
        object.__setattr__(self, "db", derive(self.b))
        _check_leading("a", self.a, self.interval)

    def rhs(self, x: float, y: np.ndarray) -> np.ndarray:
        return rhs4(self, x, y)

    def scale_factors(self, c: float) -> np.ndarray:
        pc = spow(c, self.alpha)
        return np.array([c, c, pc, pc])

    def fields_from_states(self, xs: np.ndarray, ys: np.ndarray) -> Dict[str, np.ndarray]:
        alpha = self.alpha
        a = evaluate_on(self.a, xs)
        if np.any(a == 0):
            x = float(xs[np.argmax(a == 0)])
            raise SingularCoefficientError("a", x)
        b = evaluate_on(self.b, xs)
        du = ys[:, 1]
        d2u = signed_power(ys[:, 2] / a, 1.0 / alpha)
        phi_du = signed_power(du, alpha)
        if self.middle_term is MiddleTerm.FIRST_DERIVATIVE:
            a_flux_d = ys[:, 3] + b * phi_du
        else:
            db = evaluate_on(self.db, xs)
            a_flux_d = ys[:, 3] + db * phi_du + b * alpha * abs_power(du, alpha - 1.0) * d2u
        return {
            "u": ys[:, 0],
            "du": du,
            "d2u": d2u,
            "a_phi_d2u": ys[:, 2],
            "a_phi_d2u_d": a_flux_d,
            "b_phi_du": b * phi_du,
        }

    def operator_expr(self, u: CoeffExpr) -> CoeffExpr:
        return operator_expr_4th(self.a, self.b, self.c, self.alpha, u, self.middle_term)


def rhs2(problem: SecondOrderProblem, x: float, s: Sequence[float]) -> np.ndarray:
    y1, y2 = s
    p = compile_expr(problem.p)(x)
    if p == 0:
        raise SingularCoefficientError("p", x)
    q = compile_expr(problem.q)(x)
    alpha = problem.alpha
    return np.array([spow(y2 / p, 1.0 / alpha), -q * spow(y1, alpha)])


def rhs4(problem: FourthOrderProblem, x: float, s: Sequence[float]) -> np.ndarray:
    y1, y2, y3, y4 = s
    a = compile_expr(problem.a)(x)
    if a == 0:
        raise SingularCoefficientError("a", x)
    alpha = problem.alpha
    b = compile_expr(problem.b)(x)
    c = compile_expr(problem.c)(x)
    d2u = spow(y3 / a, 1.0 / alpha)
    if problem.middle_term is MiddleTerm.FIRST_DERIVATIVE:
        dy3 = y4 + b * spow(y2, alpha)
    else:
        db = compile_expr(problem.db)(x)
        dy3 = y4 + db * spow(y2, alpha) + b * alpha * _abspow(y2, alpha - 1.0) * d2u
    return np.array([y2, d2u, dy3, -c * spow(y1, alpha)])

