"""
Signed-power algebra.

    phi(s)     = |s|^(alpha-1) s
    phi_inv(s) = |s|^(1/alpha-1) s
    Q(X, Y)    = |X|^(alpha+1) + alpha |Y|^(alpha+1) - (alpha+1) X phi(Y)

Q is the bracket that appears in every Picone-type identity; it is
nonnegative and vanishes exactly on X = Y (Young's inequality).

All functions accept python floats or numpy arrays and return the same kind.
"""

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from hlpicone.errors import DomainError

ArrayLike = Union[float, np.ndarray]

# |s| below this is treated as an exact zero
TINY = 1e-300


@dataclass(frozen=True)
class SignedPowerParam:
    alpha: float

    def __post_init__(self):
        alpha = float(self.alpha)
        if not np.isfinite(alpha) or alpha <= 0:
            raise DomainError(f"alpha must be a finite positive number, got {self.alpha!r}")
        object.__setattr__(self, "alpha", alpha)

    def __float__(self) -> float:
        return self.alpha


AlphaLike = Union[float, SignedPowerParam]


def as_alpha(alpha: AlphaLike) -> float:
    if isinstance(alpha, SignedPowerParam):
        return alpha.alpha
    return SignedPowerParam(alpha).alpha


def _check_finite(s: ArrayLike, name: str) -> None:
    if not np.all(np.isfinite(s)):
        raise DomainError(f"{name}: non-finite argument {s!r}")


def signed_power(s: ArrayLike, c: float) -> ArrayLike:
    """|s|^c * sgn(s) with the continuous extension 0 at s = 0 (any real c)."""
    a = np.abs(s)
    scalar = np.ndim(s) == 0
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        out = np.where(a < TINY, 0.0, np.sign(s) * np.power(np.where(a < TINY, 1.0, a), c))
    return float(out) if scalar else out


def spow(v: float, c: float) -> float:
    """Scalar signed_power for inner loops (integrator right-hand sides)."""
    a = abs(v)
    if a < TINY:
        return 0.0
    try:
        return math.copysign(a ** c, v)
    except OverflowError:
        return math.copysign(math.inf, v)


def abs_power(s: ArrayLike, c: float) -> ArrayLike:
    """|s|^c with value 0 at s = 0 for c != 0; |s|^0 is 1 everywhere."""
    a = np.abs(s)
    scalar = np.ndim(s) == 0
    at_zero = 1.0 if c == 0 else 0.0
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        out = np.where(a < TINY, at_zero, np.power(np.where(a < TINY, 1.0, a), c))
    return float(out) if scalar else out


def phi(alpha: AlphaLike, s: ArrayLike) -> ArrayLike:
    _check_finite(s, "phi")
    return signed_power(s, as_alpha(alpha))


def phi_inv(alpha: AlphaLike, s: ArrayLike) -> ArrayLike:
    _check_finite(s, "phi_inv")
    return signed_power(s, 1.0 / as_alpha(alpha))


def q_form(alpha: AlphaLike, X: ArrayLike, Y: ArrayLike) -> ArrayLike:
    _check_finite(X, "q_form")
    _check_finite(Y, "q_form")
    a = as_alpha(alpha)
    return (
        abs_power(X, a + 1.0)
        + a * abs_power(Y, a + 1.0)
        - (a + 1.0) * np.multiply(X, signed_power(Y, a))
    )

