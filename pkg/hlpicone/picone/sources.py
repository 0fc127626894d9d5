"""
Where the fields of an identity come from.

A trajectory solves its equation, so its operator term is exactly zero.
An expression is differentiated symbolically and its operator term is l[u]
applied to it.
"""

from typing import Dict, List, Union

import numpy as np

from hlpicone.coeffexpr import CoeffExpr, can_kink, derive, evaluate_on, kink_hit, sgnpow_expr
from hlpicone.hlode import FourthOrderProblem, SecondOrderProblem, Trajectory

Problem = Union[SecondOrderProblem, FourthOrderProblem]


def coefficients_on(problem: Problem, xs: np.ndarray) -> Dict[str, np.ndarray]:
    if problem.order == 2:
        return {"p": evaluate_on(problem.p, xs), "q": evaluate_on(problem.q, xs)}
    return {
        "a": evaluate_on(problem.a, xs),
        "b": evaluate_on(problem.b, xs),
        "c": evaluate_on(problem.c, xs),
    }


class TrajectorySource:
    is_solution = True

    def __init__(self, trajectory: Trajectory):
        self.trajectory = trajectory
        self.problem = trajectory.problem

    def __repr__(self) -> str:
        return f"TrajectorySource({self.trajectory!r})"

    def fields_on(self, xs: np.ndarray) -> Dict[str, np.ndarray]:
        fields = dict(self.trajectory.fields_on(xs))
        fields["op"] = np.zeros_like(xs)
        return fields

    def kink_mask(self, xs: np.ndarray) -> np.ndarray:
        return np.zeros(len(xs), dtype=bool)


class ExpressionSource:
    is_solution = False

    def __init__(self, problem: Problem, u: CoeffExpr):
        self.problem = problem
        self.u = u
        alpha = problem.alpha
        du = derive(u)
        exprs = {"u": u, "du": du}
        if problem.order == 2:
            exprs["p_phi_du"] = problem.p * sgnpow_expr(du, alpha)
        else:
            d2u = derive(du)
            a_flux = problem.a * sgnpow_expr(d2u, alpha)
            exprs["d2u"] = d2u
            exprs["a_phi_d2u"] = a_flux
            exprs["a_phi_d2u_d"] = derive(a_flux)
            exprs["b_phi_du"] = problem.b * sgnpow_expr(du, alpha)
        exprs["op"] = problem.operator_expr(u)
        self.exprs = exprs

    def __repr__(self) -> str:
        return f"ExpressionSource(u={self.u})"

    def fields_on(self, xs: np.ndarray) -> Dict[str, np.ndarray]:
        return {name: evaluate_on(expr, xs) for name, expr in self.exprs.items()}

    def kink_mask(self, xs: np.ndarray) -> np.ndarray:
        exprs: List[CoeffExpr] = [e for e in self.exprs.values() if can_kink(e)]
        if not exprs:
            return np.zeros(len(xs), dtype=bool)
        return np.array([any(kink_hit(e, float(x)) for e in exprs) for x in xs], dtype=bool)
