"""
Smallest eigenvalues by shooting; manufactures solutions with boundary zeros.

Dirichlet, second order::

    [p phi(u')]' + (q0 + lam) phi(u) = 0,      u(x0) = u(x1) = 0

Clamped, fourth order::

    [a phi(u'')]'' - [b phi(u')]' + (c0 - lam) phi(u) = 0,
    u = u' = 0 at x0 and x1

The eigenvalue is absorbed into the potential, so the returned trajectory
solves an ordinary half-linear problem whose coefficient is reported.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import cumulative_trapezoid
from scipy.optimize import brentq, minimize_scalar

from hlpicone.coeffexpr import CoeffExpr, MiddleTerm, as_expr, evaluate_on
from hlpicone.errors import NotFoundError, PreconditionError
from hlpicone.hlode import (
    DEFAULT_ATOL,
    DEFAULT_RTOL,
    DEFAULT_STEPS_PER_SPAN,
    FourthOrderProblem,
    SecondOrderProblem,
    Trajectory,
    check_interval,
    integrate,
)
from hlpicone.sgnpow import as_alpha
from hlpicone.sturmlab.zeros import sign_changes

logger = logging.getLogger(__name__)

SCAN_POINTS = 1001
# boundary residuals are relative to max|u|
BOUNDARY_TOL_2ND = 1e-8
BOUNDARY_TOL_4TH = 1e-6
NEWTON_TOL = 1e-9
# a stalled line search below this is the integrator's noise floor
NEWTON_FLOOR = 1e-7
NEWTON_STALLS = 3
# flux residuals are relative to the largest flux value
EQUATION_TOL = 1e-6
EQUATION_POINTS = 10001
SECANT_STEPS = 6


def generalized_pi(alpha: float) -> float:
    """Half-period of the generalized sine: first zero of (phi(u'))' + alpha phi(u) = 0, u(0)=0, u'(0)=1."""
    return 2 * math.pi / ((alpha + 1) * math.sin(math.pi / (alpha + 1)))


@dataclass
class EigenResult:
    eigenvalue: float
    trajectory: Trajectory
    # q0 + lam (Dirichlet) or c0 - lam (clamped)
    coefficient: CoeffExpr
    boundary_residuals: Dict[str, float]
    iterations: int
    theta: Optional[float] = None
    equation_residual: float = math.nan
    scan: Dict[str, float] = field(default_factory=dict)

    @property
    def max_boundary_residual(self) -> float:
        return max(self.boundary_residuals.values())

    def to_dict(self) -> Dict:
        return {
            "eigenvalue": self.eigenvalue,
            "coefficient": str(self.coefficient),
            "boundary_residuals": dict(self.boundary_residuals),
            "iterations": self.iterations,
            "theta": self.theta,
            "equation_residual": self.equation_residual,
            "initial": self.trajectory.initial.tolist(),
            "scan": dict(self.scan),
            "step_stats": self.trajectory.stats,
        }


def _positive_min(name: str, expr: CoeffExpr, interval: Tuple[float, float]) -> float:
    values = evaluate_on(expr, np.linspace(interval[0], interval[1], SCAN_POINTS))
    if not np.all(np.isfinite(values)) or np.any(values <= 0):
        raise PreconditionError(f"coefficient {name} must be positive on [{interval[0]!r}, {interval[1]!r}]")
    return float(np.min(values))


def _extreme(expr: CoeffExpr, interval: Tuple[float, float], fn: Callable) -> float:
    return float(fn(evaluate_on(expr, np.linspace(interval[0], interval[1], SCAN_POINTS))))


def _relative_ends(traj: Trajectory, names: Sequence[str]) -> Dict[str, float]:
    umax = float(np.max(np.abs(traj.ys[:, 0])))
    first, last = traj.fields_at(traj.x0), traj.fields_at(traj.x1)
    out = {}
    for name in names:
        out[f"{name}(x0)"] = abs(first[name]) / umax
        out[f"{name}(x1)"] = abs(last[name]) / umax
    return out


def equation_residual(traj: Trajectory, points: int = EQUATION_POINTS) -> float:
    """Mismatch between the flux components of ``traj`` and the integrals of
    their equations, relative to the largest value of each flux.

    The fluxes are p phi(u') (second order) and a phi(u''),
    [a phi(u'')]' - b phi(u') (fourth order); their equations are the
    operator l[u] = 0 written in quasi-derivative form.
    """
    xs = np.linspace(traj.x0, traj.x1, points)
    states = traj.states_on(xs)
    rhs = traj.problem.rhs
    slopes = np.array([rhs(float(x), y) for x, y in zip(xs, states)])
    integrals = cumulative_trapezoid(slopes, xs, axis=0, initial=0.0)
    fluxes = (1,) if traj.order == 2 else (2, 3)
    worst = 0.0
    for j in fluxes:
        scale = float(np.max(np.abs(states[:, j])))
        if scale == 0:
            continue
        drift = states[:, j] - states[0, j] - integrals[:, j]
        worst = max(worst, float(np.max(np.abs(drift))) / scale)
    return worst


def _equation_check(traj: Trajectory) -> float:
    residual = equation_residual(traj)
    if residual > EQUATION_TOL:
        logger.warning(f"equation residual {residual:.3e} of the eigenfunction above {EQUATION_TOL:.0e}")
    return residual


def eigen_shoot_2nd(
    p,
    q0,
    alpha: float,
    interval: Sequence[float],
    rtol: float = DEFAULT_RTOL,
    atol: float = DEFAULT_ATOL,
    steps_per_span: int = DEFAULT_STEPS_PER_SPAN,
    ratio: float = 1.25,
    max_rungs: int = 160,
) -> EigenResult:
    """Smallest Dirichlet eigenvalue of [p phi(u')]' + (q0 + lam) phi(u) = 0.

    Shoots from u(x0) = 0, p phi(u') = 1. The scan starts at lam = -max q0,
    where the solution cannot vanish again, and climbs a geometric ladder
    until u acquires a zero in (x0, x1]; the bracket is narrowed until u has
    exactly one sign change and the root of u(x1) is refined with brentq.

    Raises:
      PreconditionError: if p is not positive.
      NotFoundError: if no rung of the ladder produces a zero, or the refined
        eigenfunction misses u(x1) = 0 by more than 1e-8 max|u|.
    """
    p, q0 = as_expr(p), as_expr(q0)
    alpha = as_alpha(alpha)
    x0, x1 = check_interval(interval)
    width = x1 - x0
    p_min = _positive_min("p", p, (x0, x1))

    def shoot(lam: float, max_step: float) -> Trajectory:
        problem = SecondOrderProblem(p, q0 + lam, alpha, (x0, x1))
        return integrate(problem, (0.0, 1.0), rtol=rtol, atol=atol, max_step=max_step)

    def end_value(lam: float) -> float:
        traj = shoot(lam, width)
        return float(traj.ys[-1, 0] / np.max(np.abs(traj.ys[:, 0])))

    lam_lo = -_extreme(q0, (x0, x1), np.max)
    step = 0.05 * alpha * p_min * (generalized_pi(alpha) / width) ** (alpha + 1)
    lo, hi, hi_traj = lam_lo, None, None
    for rung in range(max_rungs):
        lam = lam_lo + step * ratio**rung
        traj = shoot(lam, width)
        if sign_changes(traj.ys[:, 0]) > 0:
            hi, hi_traj = lam, traj
            break
        lo = lam
    if hi is None:
        raise NotFoundError(
            "no zero of u in (x0, x1] over the eigenvalue scan",
            {"lambda_min": lam_lo, "lambda_max": lam, "rungs": max_rungs},
        )
    logger.debug(f"Dirichlet eigenvalue bracketed in [{lo!r}, {hi!r}] after {rung + 1} rungs")

    # exactly one sign change: u(x1) < 0 at hi, > 0 at lo, and no other root between
    narrowing = 0
    while sign_changes(hi_traj.ys[:, 0]) > 1:
        mid = 0.5 * (lo + hi)
        traj = shoot(mid, width)
        if sign_changes(traj.ys[:, 0]) == 0:
            lo = mid
        else:
            hi, hi_traj = mid, traj
        narrowing += 1

    try:
        lam, info = brentq(end_value, lo, hi, xtol=1e-13 * max(1.0, abs(hi)), maxiter=200, full_output=True)
    except (RuntimeError, ValueError) as e:
        raise NotFoundError(f"eigenvalue refinement failed: {e}", {"lambda_lo": lo, "lambda_hi": hi}) from e

    fine = width / steps_per_span
    traj = shoot(lam, fine)
    residuals = _relative_ends(traj, ("u",))
    if residuals["u(x1)"] > BOUNDARY_TOL_2ND:
        # the bracket was refined on the coarse mesh; finish with secant steps on the fine one
        logger.debug(f"Dirichlet residual {residuals['u(x1)']:.3e} on the fine mesh, polishing")
        lam, traj = _secant_polish(shoot, lam, fine, lo, hi)
        residuals = _relative_ends(traj, ("u",))
    if residuals["u(x1)"] > BOUNDARY_TOL_2ND:
        raise NotFoundError(
            f"Dirichlet boundary residual {residuals['u(x1)']:.3e} above {BOUNDARY_TOL_2ND:.0e}",
            {"lambda": float(lam), "residuals": residuals},
        )
    logger.info(f"Dirichlet eigenvalue {lam!r} ({info.iterations} brentq iterations)")
    return EigenResult(
        eigenvalue=float(lam),
        trajectory=traj,
        coefficient=q0 + lam,
        boundary_residuals=residuals,
        iterations=info.iterations,
        equation_residual=_equation_check(traj),
        scan={"lambda_min": lam_lo, "bracket_lo": lo, "bracket_hi": hi, "rungs": rung + 1, "narrowing": narrowing},
    )


def _secant_polish(shoot, lam: float, max_step: float, lo: float, hi: float) -> Tuple[float, Trajectory]:
    def end(traj: Trajectory) -> float:
        return float(traj.ys[-1, 0] / np.max(np.abs(traj.ys[:, 0])))

    prev_lam = lam + 1e-9 * max(1.0, abs(lam))
    prev = end(shoot(prev_lam, max_step))
    traj = shoot(lam, max_step)
    for _ in range(SECANT_STEPS):
        current = end(traj)
        if abs(current) <= 0.1 * BOUNDARY_TOL_2ND or current == prev:
            break
        lam, prev_lam, prev = lam - current * (lam - prev_lam) / (current - prev), lam, current
        lam = min(max(lam, lo), hi)
        traj = shoot(lam, max_step)
    return lam, traj


class _ClampedShooter:
    """Endpoint map (lam, theta) -> (u(x1), L u'(x1)) / max|u| from u = u' = 0,
    (a phi(u''), [a phi(u'')]' - b phi(u')) = (cos theta, sin theta)."""

    def __init__(self, a, b, c0, alpha, interval, middle_term, rtol, atol):
        self.a, self.b, self.c0 = a, b, c0
        self.alpha = alpha
        self.interval = interval
        self.width = interval[1] - interval[0]
        self.middle_term = middle_term
        self.rtol, self.atol = rtol, atol
        self.calls = 0

    def problem(self, lam: float) -> FourthOrderProblem:
        return FourthOrderProblem(
            self.a, self.b, self.c0 - lam, self.alpha, self.interval, middle_term=self.middle_term
        )

    def trajectory(self, lam: float, theta: float, max_step: Optional[float] = None) -> Trajectory:
        self.calls += 1
        initial = (0.0, 0.0, math.cos(theta), math.sin(theta))
        return integrate(
            self.problem(lam),
            initial,
            rtol=self.rtol,
            atol=self.atol,
            max_step=self.width if max_step is None else max_step,
        )

    def __call__(self, lam: float, theta: float) -> np.ndarray:
        traj = self.trajectory(lam, theta)
        end = traj.ys[-1]
        return np.array([end[0], self.width * end[1]]) / np.max(np.abs(traj.ys[:, 0]))

    def winding(self, lam: float, samples: int) -> Tuple[int, float]:
        """Sign of the net angle swept by the endpoint map over theta in [0, pi],
        and the sampled theta with the smallest endpoint."""
        thetas = list(np.linspace(0.0, math.pi, samples + 1)[:-1])
        points = [self(lam, t) for t in thetas]
        thetas.append(math.pi)
        points.append(-points[0])

        total, i, refinements = 0.0, 0, 0
        while i < len(points) - 1:
            step = _turn(points[i], points[i + 1])
            if abs(step) > math.pi / 2 and refinements < 4 * samples:
                mid = 0.5 * (thetas[i] + thetas[i + 1])
                thetas.insert(i + 1, mid)
                points.insert(i + 1, self(lam, mid))
                refinements += 1
                continue
            total += step
            i += 1
        norms = [float(np.linalg.norm(pt)) for pt in points[:-1]]
        best = thetas[int(np.argmin(norms))]
        return (1 if total > 0 else -1), best


def _turn(p: np.ndarray, q: np.ndarray) -> float:
    return math.atan2(p[0] * q[1] - p[1] * q[0], p[0] * q[0] + p[1] * q[1])


def eigen_shoot_4th_clamped(
    a,
    b,
    alpha: float,
    interval: Sequence[float],
    c0=0.0,
    middle_term: MiddleTerm = MiddleTerm.FIRST_DERIVATIVE,
    rtol: float = DEFAULT_RTOL,
    atol: float = DEFAULT_ATOL,
    steps_per_span: int = DEFAULT_STEPS_PER_SPAN,
    angles: int = 8,
    ratio: float = 1.5,
    max_rungs: int = 120,
    max_iter: int = 100,
) -> EigenResult:
    """Smallest clamped eigenvalue of [a phi(u'')]'' - [b phi(u')]' + (c0 - lam) phi(u) = 0.

    By homogeneity the initial state is (0, 0, cos theta, sin theta). For fixed
    lam the endpoint map theta -> (u(x1), u'(x1)) sweeps a net angle of an
    odd multiple of pi whose sign flips when lam crosses an eigenvalue. The
    scan starts at min c0 (below the first eigenvalue when b >= 0), brackets
    the first flip, bisects it and polishes (lam, theta) with damped Newton
    on a central-difference Jacobian. When Newton stalls the pair is
    refined by nested bracketing instead (theta zeroes one endpoint
    component, lam the other).

    Raises:
      PreconditionError: if a is not positive.
      NotFoundError: if the scan finds no flip or Newton does not converge
        within ``max_iter`` iterations (details carry the last iterate).
    """
    a, b, c0 = as_expr(a), as_expr(b), as_expr(c0)
    alpha = as_alpha(alpha)
    x0, x1 = check_interval(interval)
    width = x1 - x0
    a_min = _positive_min("a", a, (x0, x1))
    shooter = _ClampedShooter(a, b, c0, alpha, (x0, x1), MiddleTerm(middle_term), rtol, atol)

    lam_lo = _extreme(c0, (x0, x1), np.min)
    step = 0.05 * a_min * (math.pi / width) ** (2 * alpha + 2)
    base, _ = shooter.winding(lam_lo, angles)
    lo, hi = lam_lo, None
    for rung in range(max_rungs):
        lam = lam_lo + step * ratio**rung
        orientation, _ = shooter.winding(lam, angles)
        if orientation != base:
            hi = lam
            break
        lo = lam
    if hi is None:
        raise NotFoundError(
            "no orientation flip of the endpoint map over the eigenvalue scan",
            {"lambda_min": lam_lo, "lambda_max": lam, "rungs": max_rungs},
        )
    logger.debug(f"clamped eigenvalue bracketed in [{lo!r}, {hi!r}] after {rung + 1} rungs")

    while hi - lo > 1e-4 * max(1.0, abs(hi)):
        mid = 0.5 * (lo + hi)
        orientation, _ = shooter.winding(mid, angles)
        if orientation == base:
            lo = mid
        else:
            hi = mid

    lam = 0.5 * (lo + hi)
    _, theta = shooter.winding(lam, angles)
    span = math.pi / angles
    polish = minimize_scalar(
        lambda t: float(np.sum(shooter(lam, t) ** 2)),
        bounds=(theta - span, theta + span),
        method="bounded",
        options={"xatol": 1e-6},
    )
    theta0 = float(polish.x)
    newton_error = None
    try:
        z, iterations, norm = _newton(shooter, np.array([lam, theta0]), max_iter, rtol)
    except NotFoundError as e:
        newton_error, norm = e, math.inf
    if norm > NEWTON_FLOOR:
        reason = newton_error if newton_error is not None else f"Newton stopped at |r|={norm:.3e}"
        logger.warning(f"{reason}; refining the clamped eigenvalue by nested bracketing")
        try:
            z, iterations = _nested_bracketing(shooter, lo, hi, theta0, span)
        except NotFoundError as e:
            if newton_error is not None:
                raise newton_error from e
            logger.warning(f"nested bracketing failed: {e}")

    lam, theta = float(z[0]), float(z[1] % math.pi)
    traj = shooter.trajectory(lam, theta, max_step=width / steps_per_span)
    residuals = _relative_ends(traj, ("u", "du"))
    worst = max(residuals.values())
    if worst > BOUNDARY_TOL_4TH:
        raise NotFoundError(
            f"clamped boundary residual {worst:.3e} above {BOUNDARY_TOL_4TH:.0e}",
            {"lambda": lam, "theta": theta, "residuals": residuals},
        )
    logger.info(
        f"clamped eigenvalue {lam!r} (theta={theta!r}, {iterations} iterations, "
        f"{shooter.calls} shots)"
    )
    return EigenResult(
        eigenvalue=lam,
        trajectory=traj,
        coefficient=c0 - lam,
        boundary_residuals=residuals,
        iterations=iterations,
        theta=theta,
        equation_residual=_equation_check(traj),
        scan={"lambda_min": lam_lo, "bracket_lo": lo, "bracket_hi": hi, "rungs": rung + 1},
    )


def _newton(shooter: _ClampedShooter, z: np.ndarray, max_iter: int, rtol: float) -> Tuple[np.ndarray, int, float]:
    """Damped Newton on the endpoint map.

    The Jacobian is a central difference with steps of sqrt(rtol), above the
    integrator's noise. Steps are least-squares solutions, so a rank-deficient
    Jacobian still proposes a step and the line search judges it.

    Returns the iterate, the iteration count and the residual norm there.
    """
    h = math.sqrt(max(rtol, float(np.finfo(float).eps)))
    r = shooter(*z)
    norm = float(np.linalg.norm(r))
    stalls = 0
    for iteration in range(1, max_iter + 1):
        if norm <= NEWTON_TOL:
            return z, iteration - 1, norm
        h_lam = h * max(1.0, abs(z[0]))
        jac = np.column_stack(
            [
                (shooter(z[0] + h_lam, z[1]) - shooter(z[0] - h_lam, z[1])) / (2 * h_lam),
                (shooter(z[0], z[1] + h) - shooter(z[0], z[1] - h)) / (2 * h),
            ]
        )
        if not np.all(np.isfinite(jac)):
            raise NotFoundError(
                "non-finite Jacobian in clamped shooting",
                {"lambda": float(z[0]), "theta": float(z[1]), "residual": norm},
            )
        dz = np.linalg.lstsq(jac, -r, rcond=None)[0]
        t = 1.0
        while True:
            z_new = z + t * dz
            r_new = shooter(*z_new)
            norm_new = float(np.linalg.norm(r_new))
            if norm_new < norm or t < 1e-3:
                break
            t *= 0.5
        if norm_new >= norm:
            if norm <= NEWTON_FLOOR:
                return z, iteration - 1, norm
            stalls += 1
            if stalls >= NEWTON_STALLS:
                raise NotFoundError(
                    f"clamped shooting stalled after {iteration} Newton iterations",
                    {"lambda": float(z[0]), "theta": float(z[1]), "residual": norm},
                )
        else:
            stalls = 0
        logger.debug(f"Newton {iteration}: lambda={z_new[0]!r} |r|={norm_new:.3e} t={t}")
        if np.all(np.abs(z_new - z) <= 1e-13 * np.maximum(1.0, np.abs(z))):
            return z_new, iteration, norm_new
        z, r, norm = z_new, r_new, norm_new
    raise NotFoundError(
        f"clamped shooting did not converge in {max_iter} Newton iterations",
        {"lambda": float(z[0]), "theta": float(z[1]), "residual": norm},
    )


class _ThetaTracker:
    """Root in theta of one endpoint component, followed from one lam to the next."""

    def __init__(self, shooter: _ClampedShooter, component: int, theta0: float, span: float, samples: int):
        self.shooter = shooter
        self.component = component
        self.theta0 = theta0
        self.span = span
        self.samples = samples
        self.last: Optional[float] = None

    def _brackets(self, lam: float, center: float, half_width: float, samples: int):
        thetas = np.linspace(center - half_width, center + half_width, samples + 1)
        values = [float(self.shooter(lam, t)[self.component]) for t in thetas]
        found = [
            (thetas[i], thetas[i + 1], values[i])
            for i in range(samples)
            if values[i] == 0 or values[i] * values[i + 1] < 0
        ]
        return sorted(found, key=lambda b: abs(b[0] + b[1] - 2 * center))

    def root(self, lam: float) -> Tuple[float, np.ndarray]:
        found = []
        if self.last is not None:
            found = self._brackets(lam, self.last, 2 * self.span / self.samples, 4)
        if not found:
            found = self._brackets(lam, self.theta0, self.span, self.samples)
        if not found:
            raise NotFoundError(
                f"endpoint component {self.component} keeps its sign near theta={self.theta0!r}",
                {"lambda": lam, "theta": self.theta0},
            )
        left, right, value = found[0]
        if value == 0:
            theta = float(left)
        else:
            theta = brentq(
                lambda t: float(self.shooter(lam, t)[self.component]), left, right, xtol=1e-12, maxiter=200
            )
        self.last = theta
        return theta, self.shooter(lam, theta)


def _nested_bracketing(
    shooter: _ClampedShooter, lo: float, hi: float, theta0: float, span: float, samples: int = 16
) -> Tuple[np.ndarray, int]:
    """Derivative-free (lam, theta): theta zeroes one endpoint component,
    lam zeroes the other at that theta. Both roots are bracketed, so the
    search tolerates an endpoint map that is only continuous."""
    failure = None
    for component in (0, 1):
        tracker = _ThetaTracker(shooter, component, theta0, span, samples)
        other = 1 - component

        def residual(lam: float) -> float:
            return float(tracker.root(lam)[1][other])

        try:
            g_lo, g_hi = residual(lo), residual(hi)
            if g_lo * g_hi > 0:
                raise NotFoundError(
                    f"endpoint component {other} keeps its sign over [{lo!r}, {hi!r}]",
                    {"lambda_lo": lo, "lambda_hi": hi},
                )
            lam, info = brentq(residual, lo, hi, xtol=1e-13 * max(1.0, abs(hi)), maxiter=200, full_output=True)
            theta, _ = tracker.root(lam)
        except NotFoundError as e:
            failure = e
            logger.debug(f"nested bracketing on component {component}: {e}")
            continue
        return np.array([lam, theta]), info.iterations
    raise failure
