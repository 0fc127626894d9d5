"""
Dormand-Prince 5(4) integrator with error control and FSAL stage reuse.

The local error estimate is the max-norm of the embedded difference scaled by
``atol + rtol * max(|y|, |y_new|)``; a step is accepted when it is <= 1.
"""

import logging
import math
from typing import Optional, Sequence

import numpy as np

from hlpicone.errors import DomainError, StepSizeUnderflowError
from hlpicone.hlode.trajectory import StepStats, Trajectory

logger = logging.getLogger(__name__)

DEFAULT_RTOL = 1e-10
DEFAULT_ATOL = 1e-12
# default step cap is span / DEFAULT_STEPS_PER_SPAN
DEFAULT_STEPS_PER_SPAN = 2000
# minimum step, relative to the span
MIN_STEP_FACTOR = 1e-12

SAFETY = 0.9
MIN_FACTOR = 0.2
MAX_FACTOR = 5.0

C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
# 5th-order weights are the last row of A (FSAL)
B = A[6]
# difference between the 5th- and 4th-order weights
E = (71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40)


def _error_norm(err: np.ndarray, y: np.ndarray, y_new: np.ndarray, rtol: float, atol: float) -> float:
    scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
    value = float(np.max(np.abs(err) / scale))
    return value if math.isfinite(value) else math.inf


def _initial_step(f0: np.ndarray, y0: np.ndarray, rtol: float, atol: float) -> float:
    scale = atol + rtol * np.abs(y0)
    d0 = float(np.max(np.abs(y0) / scale))
    d1 = float(np.max(np.abs(f0) / scale))
    if d0 < 1e-5 or d1 < 1e-5 or not math.isfinite(d1):
        return 1e-6
    return 0.01 * d0 / d1


def dopri_step(rhs, x: float, y: np.ndarray, f: np.ndarray, h: float):
    """One Dormand-Prince step; returns (y_new, f_new, error vector)."""
    k = [f]
    for i in range(1, 7):
        yi = y + h * sum(a * kj for a, kj in zip(A[i], k) if a != 0.0)
        k.append(rhs(x + C[i] * h, yi))
        if i == 6:
            y_new = yi
    err = h * sum(e * kj for e, kj in zip(E, k) if e != 0.0)
    return y_new, k[6], err


def integrate(
    problem,
    initial: Sequence[float],
    span: Optional[Sequence[float]] = None,
    rtol: float = DEFAULT_RTOL,
    atol: float = DEFAULT_ATOL,
    max_step: Optional[float] = None,
) -> Trajectory:
    """Integrate ``problem`` forward from ``initial`` given at ``span[0]``.

    Args:
      problem:
        A SecondOrderProblem or FourthOrderProblem.
      initial:
        Quasi-derivative state at the left end of ``span``.
      span:
        [xa, xb] inside the problem interval; defaults to the whole interval.
      max_step:
        Step cap; defaults to (xb - xa) / 2000 so that dense output stays at
        integrator accuracy on the identity grids.

    Raises:
      StepSizeUnderflowError: when the step falls below 1e-12 * (xb - xa).
      SingularCoefficientError: when the leading coefficient vanishes.
    """
    x0, x1 = problem.interval
    xa, xb = (x0, x1) if span is None else (float(span[0]), float(span[1]))
    length = x1 - x0
    if not (x0 - 1e-12 * length <= xa < xb <= x1 + 1e-12 * length):
        raise DomainError(f"span [{xa!r}, {xb!r}] is not a forward subinterval of [{x0!r}, {x1!r}]")
    y = np.asarray(initial, dtype=float).copy()
    if y.shape != (problem.state_dim,):
        raise DomainError(f"initial state must have {problem.state_dim} components, got {y.shape}")
    if not np.all(np.isfinite(y)):
        raise DomainError(f"initial state is not finite: {y!r}")

    width = xb - xa
    h_cap = width / DEFAULT_STEPS_PER_SPAN if max_step is None else float(max_step)
    h_min = MIN_STEP_FACTOR * width

    rhs = problem.rhs
    x = xa
    f = rhs(x, y)
    h = min(_initial_step(f, y, rtol, atol), h_cap, width)
    h = max(h, h_min)

    xs, ys, dys = [x], [y], [f]
    accepted = rejected = 0
    min_step, max_step_taken = math.inf, 0.0

    while x < xb:
        last = False
        if x + h >= xb or xb - (x + h) < h_min:
            h = xb - x
            last = True

        y_new, f_new, err_vec = dopri_step(rhs, x, y, f, h)
        err = _error_norm(err_vec, y, y_new, rtol, atol)
        if not np.all(np.isfinite(y_new)):
            err = math.inf

        if err <= 1.0:
            x = xb if last else x + h
            y, f = y_new, f_new
            xs.append(x)
            ys.append(y)
            dys.append(f)
            accepted += 1
            min_step = min(min_step, h)
            max_step_taken = max(max_step_taken, h)
            factor = MAX_FACTOR if err == 0 else min(MAX_FACTOR, max(MIN_FACTOR, SAFETY * err ** -0.2))
            h = min(h * factor, h_cap)
        else:
            rejected += 1
            factor = MIN_FACTOR if not math.isfinite(err) else max(MIN_FACTOR, SAFETY * err ** -0.2)
            h *= factor
            if h < h_min:
                logger.warning(f"step size collapsed at x={x!r} (h={h:.3e})")
                raise StepSizeUnderflowError(x, h)

    stats = StepStats(accepted, rejected, min_step, max_step_taken)
    logger.debug(
        f"integrated [{xa!r}, {xb!r}]: {accepted} accepted, {rejected} rejected, "
        f"min step {min_step:.3e}"
    )
    return Trajectory(problem, np.array(xs), np.vstack(ys), np.vstack(dys), stats)
