"""
Bracket F and right-hand side R of every identity kind, on arrays.

Field dictionaries come from :mod:`hlpicone.picone.sources`: for a second-order
function ``u, du, p_phi_du, op``; for a fourth-order one additionally ``d2u,
a_phi_d2u, a_phi_d2u_d, b_phi_du``. ``op`` is the operator applied to the
function (zero for solutions).
"""

import math
from dataclasses import dataclass, field
from typing import Dict, List, Mapping

import numpy as np

from hlpicone.picone.kinds import IdentityKind
from hlpicone.sgnpow import abs_power, signed_power

Fields = Mapping[str, np.ndarray]


@dataclass
class Evaluation:
    F: np.ndarray
    R: np.ndarray
    # functions that must stay away from zero, by name
    denominators: Dict[str, np.ndarray]
    extras: Dict[str, np.ndarray] = field(default_factory=dict)


def square(alpha: float, X, Y, lead=None):
    """Q(X, Y) without input checks (excluded grid points carry inf and nan).

    With ``lead`` the first term is |lead|^(alpha+1), the printed form of the
    half-linear bracket.
    """
    first = X if lead is None else lead
    return (
        abs_power(first, alpha + 1)
        + alpha * abs_power(Y, alpha + 1)
        - (alpha + 1) * X * signed_power(Y, alpha)
    )


def binomial_weights(n: int) -> List[int]:
    """w_k = (-1)^(n-k-1) C(n-1, k) for k = 0..n-1; they sum to 0 for n >= 2."""
    return [(-1) ** (n - k - 1) * math.comb(n - 1, k) for k in range(n)]


def _p13(alpha, fu, fv, cu, cv, variants) -> Evaluation:
    u, du, v, dv = fu["u"], fu["du"], fv["u"], fv["du"]
    p, q, P, Q = cu["p"], cu["q"], cv["p"], cv["q"]
    F = u * p * du - u * u * P * dv / v
    R = (p - P) * du**2 + (Q - q) * u**2 + P * (du - u * dv / v) ** 2
    return Evaluation(F, R, {"v": v})


def _p16(alpha, fu, fv, cu, cv, variants) -> Evaluation:
    u, du, v, dv = fu["u"], fu["du"], fv["u"], fv["du"]
    p, q, P, Q = cu["p"], cu["q"], cv["p"], cv["q"]
    phi_u, phi_v = signed_power(u, alpha), signed_power(v, alpha)
    W = u * phi_u / phi_v

    F = u * fu["p_phi_du"] - W * fv["p_phi_du"]
    Y = u * dv / v
    if variants["bracket_power"] == "corrected":
        square_term = square(alpha, du, Y)
    else:
        square_term = square(alpha, du, Y, lead=u)
    R = (
        (p - P) * abs_power(du, alpha + 1)
        + (Q - q) * abs_power(u, alpha + 1)
        + P * square_term
        + u * fu["op"]
        - W * fv["op"]
    )
    return Evaluation(F, R, {"v": v})


def inner_derivative(alpha: float, u, du, v, dv) -> np.ndarray:
    """Closed form of (u phi(u) / phi(v))'."""
    phi_v = signed_power(v, alpha)
    return (
        (alpha + 1) * signed_power(u, alpha) * du * phi_v
        - alpha * abs_power(u, alpha + 1) * abs_power(v, alpha - 1) * dv
    ) / phi_v**2


def _p23(alpha, fu, fv, cu, cv, variants) -> Evaluation:
    u, du, d2u = fu["u"], fu["du"], fu["d2u"]
    v, dv, d2v = fv["u"], fv["du"], fv["d2u"]
    a, b, c = cu["a"], cu["b"], cu["c"]
    A, B, C = cv["a"], cv["b"], cv["c"]
    phi_v = signed_power(v, alpha)
    W = u * signed_power(u, alpha) / phi_v
    dW = inner_derivative(alpha, u, du, v, dv)

    F = (
        (u * fu["a_phi_d2u_d"] - fu["a_phi_d2u"] * du)
        + (fv["a_phi_d2u"] * dW - W * fv["a_phi_d2u_d"])
        - (u * fu["b_phi_du"] - W * fv["b_phi_du"])
    )

    if variants["inner_phi"] == "ratio":
        inner = signed_power(d2v / v, alpha)
    else:
        inner = signed_power(d2v, alpha) / phi_v
    R = (
        u * fu["op"]
        - W * fv["op"]
        + A * alpha * (alpha + 1) * abs_power(u, alpha - 1) * inner * ((du * v - u * dv) / v) ** 2
        - A * square(alpha, d2u, u * d2v / v)
        - B * square(alpha, du, u * dv / v)
        + (A - a) * abs_power(d2u, alpha + 1)
        + (B - b) * abs_power(du, alpha + 1)
        + (C - c) * abs_power(u, alpha + 1)
    )
    return Evaluation(F, R, {"v": v}, {"W": W, "dW": dW})


def _p24(alpha, fu, fv, cu, cv, variants) -> Evaluation:
    u, du, d2u = fu["u"], fu["du"], fu["d2u"]
    v, dv, d2v = fv["u"], fv["du"], fv["d2u"]
    a, b, c = cu["a"], cu["b"], cu["c"]
    A, B, C = cv["a"], cv["b"], cv["c"]
    phi_u, phi_v = signed_power(u, alpha), signed_power(v, alpha)
    phi_du, phi_dv = signed_power(du, alpha), signed_power(dv, alpha)
    W = u * phi_u / phi_v

    first = W * fv["a_phi_d2u_d"] - u * fu["a_phi_d2u_d"]
    if variants["p24_second_bracket"] == "plain":
        second = (du / phi_dv) * (phi_dv * fu["a_phi_d2u"] - phi_du * fv["a_phi_d2u"])
    else:
        second = (du / phi_dv) * (phi_dv * fu["a_phi_d2u_d"] - phi_du * fv["a_phi_d2u_d"])
    third = u * fu["b_phi_du"] - W * fv["b_phi_du"]
    F = first + second + third

    lead = d2u if variants["bracket_power"] == "corrected" else du
    cond = dv if variants["condition_power"] == "corrected" else v
    weight = B * abs_power(cond, alpha + 1) - dv * fv["a_phi_d2u_d"]
    R = (
        (a - A) * abs_power(lead, alpha + 1)
        + (b - B) * abs_power(du, alpha + 1)
        + (c - C) * abs_power(u, alpha + 1)
        + A * square(alpha, d2u, du * d2v / dv)
        + weight * square(alpha, du / dv, u / v)
        + W * fv["op"]
        - u * fu["op"]
    )
    return Evaluation(F, R, {"v": v, "dv": dv})


def distinguished_index(n: int, variants: Mapping[str, str]) -> int:
    """0-based index of the solution multiplying the bracket of the N-equation identity."""
    return n - 2 if variants["distinguished_index"] == "n_minus_1" else n - 1


def p26_evaluation(alpha, fields: List[Fields], coefficients: List[Fields], variants) -> Evaluation:
    n = len(fields)
    m = distinguished_index(n, variants)
    w = binomial_weights(n)
    um, dum = fields[m]["u"], fields[m]["du"]
    weight = abs_power(um, alpha + 1)

    total = np.zeros_like(um)
    p_sum = np.zeros_like(um)
    q_sum = np.zeros_like(um)
    squares = []
    for k in range(n):
        uk, duk = fields[k]["u"], fields[k]["du"]
        pk, qk = coefficients[k]["p"], coefficients[k]["q"]
        total = total + w[k] * fields[k]["p_phi_du"] / signed_power(uk, alpha)
        p_sum = p_sum + w[k] * pk
        q_sum = q_sum + w[k] * qk
        # for k == m the argument pair is (u_m', u_m') and Q vanishes up to rounding
        squares.append(w[k] * pk * square(alpha, dum, um * duk / uk))

    F = weight * total
    R = p_sum * abs_power(dum, alpha + 1) - q_sum * abs_power(um, alpha + 1) - sum(squares)
    denominators = {f"u{k + 1}": fields[k]["u"] for k in range(n)}
    return Evaluation(F, R, denominators, {"squares": np.vstack(squares)})


PAIR_FORMS = {
    IdentityKind.P13: _p13,
    IdentityKind.P16: _p16,
    IdentityKind.P23: _p23,
    IdentityKind.P24: _p24,
}


def evaluate_identity(
    kind: IdentityKind,
    alpha: float,
    fields: List[Fields],
    coefficients: List[Fields],
    variants: Mapping[str, str],
) -> Evaluation:
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        if kind is IdentityKind.P26:
            return p26_evaluation(alpha, fields, coefficients, variants)
        form = PAIR_FORMS[kind]
        return form(alpha, fields[0], fields[1], coefficients[0], coefficients[1], variants)
