"""
Comparison-theorem harnesses.

A :class:`TheoremCase` holds a manufactured solution u (clamped for the
fourth-order theorems, Dirichlet for the three-equation comparison) and the
equations whose solutions are sampled. :func:`verify_conclusion` checks, for
each sampled solution v, that v has a zero on [x0, x1] or is a constant
multiple of u, among the samples that meet the theorem's side condition.
"""

import dataclasses
import enum
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

import numpy as np

from hlpicone.coeffexpr import CoeffExpr, as_expr, evaluate_on
from hlpicone.errors import PreconditionError, VariantError
from hlpicone.hlode import (
    DEFAULT_ATOL,
    DEFAULT_RTOL,
    DEFAULT_STEPS_PER_SPAN,
    FourthOrderProblem,
    SecondOrderProblem,
    Trajectory,
    integrate,
)
from hlpicone.picone.kinds import FLAG_VALUES
from hlpicone.sgnpow import abs_power
from hlpicone.sturmlab.shooting import EigenResult, eigen_shoot_2nd, eigen_shoot_4th_clamped
from hlpicone.sturmlab.zeros import find_zeros

logger = logging.getLogger(__name__)

Problem = Union[SecondOrderProblem, FourthOrderProblem]

BOUNDARY_TOL = 1e-6
# constant-multiple test: sub-grid |u| >= U_FLOOR max|u|, verdict when spread <= SPREAD_TOL
U_FLOOR = 1e-3
SPREAD_TOL = 1e-4
BISECTION_STEPS = 60


class Theorem(str, enum.Enum):
    T1 = "T1"
    T2 = "T2"
    C3 = "C3"

    @classmethod
    def parse(cls, text: str) -> "Theorem":
        """Accept "1", "2", "c3" or the tags themselves."""
        tag = str(text).strip().upper()
        tag = {"1": "T1", "2": "T2"}.get(tag, tag)
        try:
            return cls(tag)
        except ValueError:
            raise VariantError(f"unknown theorem {text!r}; known: 1, 2, c3") from None

    @property
    def order(self) -> int:
        return 2 if self is Theorem.C3 else 4


class Verdict(str, enum.Enum):
    ZERO_FOUND = "zero_found"
    CONSTANT_MULTIPLE = "constant_multiple"
    SKIPPED = "condition_not_met"
    COUNTEREXAMPLE = "counterexample"


@dataclass
class Inequality:
    """lhs <= rhs on the interval (lhs < rhs when strict)."""

    name: str
    lhs: CoeffExpr
    rhs: CoeffExpr
    strict: bool = False

    def margin_on(self, xs: np.ndarray) -> np.ndarray:
        return evaluate_on(self.rhs, xs) - evaluate_on(self.lhs, xs)

    def holds_on(self, xs: np.ndarray) -> np.ndarray:
        lhs, rhs = evaluate_on(self.lhs, xs), evaluate_on(self.rhs, xs)
        if self.strict:
            return rhs - lhs > 0
        slack = 1e-12 * (1.0 + np.abs(lhs) + np.abs(rhs))
        return rhs - lhs >= -slack

    def holds_at(self, x: float) -> bool:
        return bool(self.holds_on(np.array([x]))[0])


@dataclass
class HypothesisResult:
    name: str
    holds: bool
    min_margin: float
    first_violation: Optional[float] = None

    def to_dict(self) -> Dict[str, Any]:
        return dataclasses.asdict(self)


@dataclass
class HypothesisReport:
    results: List[HypothesisResult]
    grid_n: int

    @property
    def holds(self) -> bool:
        return all(r.holds for r in self.results)

    def to_dict(self) -> Dict[str, Any]:
        return {"holds": self.holds, "grid_n": self.grid_n, "inequalities": self.results}


@dataclass
class SampleResult:
    index: int
    equation: str
    initial: List[float]
    verdict: Verdict
    zero: Optional[float] = None
    zero_count: int = 0
    ratio: Optional[float] = None
    spread: Optional[float] = None
    # min over the grid of the side-condition margin (condition holds when > 0)
    condition_min: Optional[float] = None
    trajectory_csv: Optional[str] = None

    def to_dict(self) -> Dict[str, Any]:
        d = dataclasses.asdict(self)
        d["verdict"] = self.verdict.value
        return d


@dataclass
class ComparisonReport:
    theorem: Theorem
    alpha: float
    interval: List[float]
    hypotheses: HypothesisReport
    samples: List[SampleResult]
    eigenvalue: Optional[float]
    solution_coefficient: Optional[str]
    boundary_residuals: Dict[str, float]
    seed: int
    condition_power: Optional[str] = None
    notes: List[str] = field(default_factory=list)

    @property
    def counterexamples(self) -> List[SampleResult]:
        return [s for s in self.samples if s.verdict is Verdict.COUNTEREXAMPLE]

    @property
    def passed(self) -> bool:
        return self.hypotheses.holds and not self.counterexamples

    def summary(self) -> Dict[str, int]:
        return {v.value: sum(1 for s in self.samples if s.verdict is v) for v in Verdict}

    def to_dict(self) -> Dict[str, Any]:
        return {
            "theorem": self.theorem.value,
            "alpha": self.alpha,
            "interval": list(self.interval),
            "eigenvalue": self.eigenvalue,
            "solution_coefficient": self.solution_coefficient,
            "boundary_residuals": dict(self.boundary_residuals),
            "condition_power": self.condition_power,
            "hypotheses": self.hypotheses,
            "seed": self.seed,
            "sample_count": len(self.samples),
            "summary": self.summary(),
            "samples": self.samples,
            "notes": list(self.notes),
        }


class TheoremCase:
    """A theorem, its manufactured solution u and the equations sampled against it.

    ``comparisons`` holds the v-equation (T1, T2) or the first and third
    equations (C3); ``solution`` is a trajectory of the u-equation.
    """

    def __init__(
        self,
        theorem: Union[Theorem, str],
        solution: Optional[Trajectory],
        comparisons: Sequence[Problem],
        samples: int = 32,
        seed: int = 0,
        proportional_samples: int = 0,
        extra_states: Sequence[Sequence[float]] = (),
        grid: int = 2001,
        zero_tol: float = 1e-10,
        condition_power: str = "corrected",
        eigen: Optional[EigenResult] = None,
        rtol: float = DEFAULT_RTOL,
        atol: float = DEFAULT_ATOL,
        steps_per_span: int = DEFAULT_STEPS_PER_SPAN,
        num_workers: int = 1,
    ):
        self.theorem = theorem if isinstance(theorem, Theorem) else Theorem.parse(theorem)
        self.solution = solution
        self.comparisons = list(comparisons)
        expected = 2 if self.theorem is Theorem.C3 else 1
        if len(self.comparisons) != expected:
            raise PreconditionError(
                f"{self.theorem.value} samples {expected} equation(s), got {len(self.comparisons)}"
            )
        for problem in self.comparisons:
            if problem.order != self.theorem.order:
                raise PreconditionError(
                    f"{self.theorem.value} needs order-{self.theorem.order} equations, got order {problem.order}"
                )
        if condition_power not in FLAG_VALUES["condition_power"]:
            raise VariantError(
                f"condition_power takes one of {', '.join(FLAG_VALUES['condition_power'])}, "
                f"got {condition_power!r}"
            )
        if grid < 2:
            raise PreconditionError(f"grid needs at least 2 points, got {grid}")
        self.samples = int(samples)
        self.seed = int(seed)
        self.proportional_samples = int(proportional_samples)
        self.extra_states = [np.asarray(s, dtype=float) for s in extra_states]
        for state in self.extra_states:
            if state.shape != (self.comparisons[0].state_dim,):
                raise PreconditionError(
                    f"sample states of {self.theorem.value} have {self.comparisons[0].state_dim} components, "
                    f"got {state.shape}"
                )
        self.grid = int(grid)
        self.zero_tol = float(zero_tol)
        self.condition_power = condition_power
        self.eigen = eigen
        self.rtol, self.atol = rtol, atol
        self.steps_per_span = steps_per_span
        self.num_workers = max(1, int(num_workers))
        if solution is not None:
            self._check_boundary(solution)

    def __repr__(self) -> str:
        return f"TheoremCase({self.theorem.value}, alpha={self.alpha!r}, samples={self.samples})"

    @property
    def alpha(self) -> float:
        return self.comparisons[0].alpha

    @property
    def interval(self):
        return self.comparisons[0].interval

    def _check_boundary(self, solution: Trajectory) -> None:
        if solution.order != self.theorem.order:
            raise PreconditionError(f"u must solve an order-{self.theorem.order} equation")
        names = ("u",) if self.theorem is Theorem.C3 else ("u", "du")
        umax = float(np.max(np.abs(solution.ys[:, 0])))
        if umax == 0:
            raise PreconditionError("u is the trivial solution")
        for x in (solution.x0, solution.x1):
            values = solution.fields_at(x)
            for name in names:
                if abs(values[name]) > BOUNDARY_TOL * umax:
                    raise PreconditionError(
                        f"u does not satisfy {name}=0 at x={x!r} (|{name}|/max|u| = "
                        f"{abs(values[name]) / umax:.3e})"
                    )

    @property
    def boundary_residuals(self) -> Dict[str, float]:
        if self.eigen is not None:
            return dict(self.eigen.boundary_residuals)
        if self.solution is None:
            return {}
        umax = float(np.max(np.abs(self.solution.ys[:, 0])))
        names = ("u",) if self.theorem is Theorem.C3 else ("u", "du")
        out = {}
        for tag, x in (("x0", self.solution.x0), ("x1", self.solution.x1)):
            values = self.solution.fields_at(x)
            for name in names:
                out[f"{name}({tag})"] = abs(values[name]) / umax
        return out

    def inequalities(self) -> List[Inequality]:
        u_problem = self.solution.problem if self.solution is not None else None
        if u_problem is None:
            raise PreconditionError("the manufactured solution u is missing")
        zero = as_expr(0.0)
        if self.theorem is Theorem.C3:
            first, third = self.comparisons
            p1, p2, p3 = first.p, u_problem.p, third.p
            q1, q2, q3 = first.q, u_problem.q, third.q
            return [
                Inequality("p1 > 0", zero, p1, strict=True),
                Inequality("p2 > 0", zero, p2, strict=True),
                Inequality("p3 > 0", zero, p3, strict=True),
                Inequality("p2 >= (p1 + p3)/2", 0.5 * (p1 + p3), p2),
                Inequality("q2 <= (q1 + q3)/2", q2, 0.5 * (q1 + q3)),
            ]
        v_problem = self.comparisons[0]
        a, b, c = u_problem.a, u_problem.b, u_problem.c
        A, B, C = v_problem.a, v_problem.b, v_problem.c
        checks = [
            Inequality("0 <= A", zero, A),
            Inequality("A <= a", A, a),
            Inequality("B <= b", B, b),
            Inequality("C <= c", C, c),
        ]
        if self.theorem is Theorem.T1:
            checks.insert(2, Inequality("0 <= B", zero, B))
        return checks

    def grid_points(self) -> np.ndarray:
        return np.linspace(self.interval[0], self.interval[1], self.grid)

    def sample_states(self) -> List[Dict[str, Any]]:
        """Initial states of the sampled solutions, in sample order.

        Random states come from the unit sphere scaled by 1 or 10; proportional
        samples start from multiples of u's initial state; explicit states
        from the problem file come last.
        """
        rng = np.random.default_rng(self.seed)
        dim = self.comparisons[0].state_dim
        specs = []
        for i in range(self.samples):
            z = rng.standard_normal(dim)
            z = z / np.linalg.norm(z) * rng.choice([1.0, 10.0])
            specs.append({"equation": self._equation(i), "initial": z, "factor": None})
        for j in range(self.proportional_samples):
            if self.solution is None:
                break
            factor = (-1) ** j * 2.0 ** (j - 1)
            specs.append({"equation": self._equation(j), "initial": None, "factor": factor})
        for j, state in enumerate(self.extra_states):
            specs.append({"equation": self._equation(j), "initial": state, "factor": None})
        return specs

    def _equation(self, i: int) -> int:
        """Index into ``comparisons``; C3 alternates between its first and third equation."""
        return i % 2 if self.theorem is Theorem.C3 else 0

    def equation_name(self, k: int) -> str:
        if self.theorem is Theorem.C3:
            return ("u1", "u3")[k]
        return "v"


def _first_violation(inequality: Inequality, xs: np.ndarray, ok: np.ndarray) -> float:
    i = int(np.argmin(ok))
    if i == 0:
        return float(xs[0])
    lo, hi = float(xs[i - 1]), float(xs[i])
    for _ in range(BISECTION_STEPS):
        mid = 0.5 * (lo + hi)
        if inequality.holds_at(mid):
            lo = mid
        else:
            hi = mid
    return hi


def check_hypotheses(case: TheoremCase) -> HypothesisReport:
    xs = case.grid_points()
    results = []
    for inequality in case.inequalities():
        ok = inequality.holds_on(xs)
        margin = inequality.margin_on(xs)
        result = HypothesisResult(inequality.name, bool(np.all(ok)), float(np.min(margin)))
        if not result.holds:
            result.first_violation = _first_violation(inequality, xs, ok)
            logger.info(f"{case.theorem.value}: {inequality.name} fails first at x={result.first_violation!r}")
        results.append(result)
    return HypothesisReport(results, len(xs))


def _condition_margin(case: TheoremCase, problem: Problem, traj: Trajectory, xs: np.ndarray) -> Optional[np.ndarray]:
    """Side condition of the theorem as an array that must be > 0; None for C3."""
    if case.theorem is Theorem.C3:
        return None
    fields = traj.fields_on(xs)
    v, dv, d2v = fields["u"], fields["du"], fields["d2u"]
    with np.errstate(divide="ignore", invalid="ignore"):
        if case.theorem is Theorem.T1:
            # v''/v < 0; undefined (hence failing) where v = 0
            return np.where(v != 0, -d2v / v, -np.inf)
        alpha = problem.alpha
        B = evaluate_on(problem.b, xs)
        lead = dv if case.condition_power == "corrected" else v
        return B * abs_power(lead, alpha + 1) - dv * fields["a_phi_d2u_d"]


def constant_multiple(u: np.ndarray, v: np.ndarray):
    """(median ratio v/u, relative spread) over the points where |u| >= U_FLOOR max|u|."""
    mask = np.abs(u) >= U_FLOOR * np.max(np.abs(u))
    ratio = v[mask] / u[mask]
    median = float(np.median(ratio))
    if median == 0 or not math.isfinite(median):
        return median, math.inf
    return median, float((np.max(ratio) - np.min(ratio)) / abs(median))


def _run_sample(case: TheoremCase, index: int, spec: Dict[str, Any], dump_dir: Optional[Path]) -> SampleResult:
    k = spec["equation"]
    problem = case.comparisons[k]
    u = case.solution
    xs = case.grid_points()
    if spec["factor"] is not None and problem == u.problem:
        traj = u.scaled(spec["factor"])
    else:
        initial = spec["initial"] if spec["factor"] is None else u.initial * problem.scale_factors(spec["factor"])
        width = problem.interval[1] - problem.interval[0]
        traj = integrate(
            problem,
            initial,
            rtol=case.rtol,
            atol=case.atol,
            max_step=width / case.steps_per_span,
        )
    result = SampleResult(index, case.equation_name(k), traj.initial.tolist(), Verdict.COUNTEREXAMPLE)

    v = traj.component_on("u", xs)
    result.ratio, result.spread = constant_multiple(u.component_on("u", xs), v)
    if result.spread <= SPREAD_TOL:
        result.verdict = Verdict.CONSTANT_MULTIPLE
        return result

    margin = _condition_margin(case, problem, traj, xs)
    if margin is not None:
        result.condition_min = float(np.min(margin))
        if not np.all(margin > 0):
            result.verdict = Verdict.SKIPPED
            return result

    zeros = find_zeros(traj, "u", case.zero_tol)
    result.zero_count = len(zeros)
    vmax = float(np.max(np.abs(v)))
    ends = [x for x, value in ((traj.x0, v[0]), (traj.x1, v[-1])) if abs(value) <= case.zero_tol * vmax]
    found = sorted(list(zeros) + ends)
    if found:
        result.verdict = Verdict.ZERO_FOUND
        result.zero = found[0]
        return result

    if dump_dir is not None:
        path = dump_dir / f"{case.theorem.value.lower()}_counterexample_{index:03d}.csv"
        traj.to_csv(path, xs)
        result.trajectory_csv = str(path)
    logger.warning(f"{case.theorem.value}: sample {index} ({result.equation}) is a counterexample")
    return result


def verify_conclusion(case: TheoremCase, dump_dir: Optional[Union[str, Path]] = None) -> ComparisonReport:
    """Hypotheses plus the per-sample conclusion; counterexample trajectories go to ``dump_dir``."""
    if case.solution is None:
        raise PreconditionError("the manufactured solution u is missing")
    hypotheses = check_hypotheses(case)
    if not hypotheses.holds:
        logger.warning(f"{case.theorem.value}: hypotheses fail; conclusions are reported anyway")

    if dump_dir is not None:
        dump_dir = Path(dump_dir)
        dump_dir.mkdir(parents=True, exist_ok=True)
    specs = case.sample_states()

    def run(i: int) -> SampleResult:
        return _run_sample(case, i, specs[i], dump_dir)

    if case.num_workers > 1:
        with ThreadPoolExecutor(max_workers=case.num_workers) as ex:
            samples = list(ex.map(run, range(len(specs))))
    else:
        samples = [run(i) for i in range(len(specs))]

    notes = []
    if case.theorem is Theorem.C3:
        notes.append("samples alternate between the first and third equations")
    report = ComparisonReport(
        theorem=case.theorem,
        alpha=case.alpha,
        interval=list(case.interval),
        hypotheses=hypotheses,
        samples=samples,
        eigenvalue=None if case.eigen is None else case.eigen.eigenvalue,
        solution_coefficient=None if case.eigen is None else str(case.eigen.coefficient),
        boundary_residuals=case.boundary_residuals,
        seed=case.seed,
        condition_power=case.condition_power if case.theorem is Theorem.T2 else None,
        notes=notes,
    )
    logger.info(f"{case.theorem.value}: {report.summary()}")
    return report


def shifted(problem: Problem, lam: float) -> Problem:
    """``problem`` with the spectral shift of the manufactured solution applied to its potential."""
    if problem.order == 2:
        return dataclasses.replace(problem, q=problem.q + lam)
    return dataclasses.replace(problem, c=problem.c - lam)


def manufacture_case(
    theorem: Union[Theorem, str],
    problems: Sequence[Problem],
    shift_comparison: bool = False,
    **kwargs,
) -> TheoremCase:
    """Build a case from the file's equations, manufacturing u by shooting.

    T1/T2 take (u-equation, v-equation); u is the clamped eigenfunction and
    the u-equation's c becomes c - lam. C3 takes three equations; u2 is the
    Dirichlet eigenfunction of the second, whose q becomes q + lam. With
    ``shift_comparison`` the sampled equations receive the same shift.
    """
    theorem = theorem if isinstance(theorem, Theorem) else Theorem.parse(theorem)
    problems = list(problems)
    expected = 3 if theorem is Theorem.C3 else 2
    if len(problems) != expected:
        raise PreconditionError(f"{theorem.value} needs {expected} equations, got {len(problems)}")
    for problem in problems:
        if problem.order != theorem.order:
            raise PreconditionError(
                f"{theorem.value} needs order-{theorem.order} equations, got order {problem.order}"
            )
    kw = {k: kwargs[k] for k in ("rtol", "atol", "steps_per_span") if k in kwargs}
    if theorem is Theorem.C3:
        base = problems[1]
        eigen = eigen_shoot_2nd(base.p, base.q, base.alpha, base.interval, **kw)
        comparisons = [problems[0], problems[2]]
    else:
        base = problems[0]
        eigen = eigen_shoot_4th_clamped(
            base.a, base.b, base.alpha, base.interval, c0=base.c, middle_term=base.middle_term, **kw
        )
        comparisons = [problems[1]]
    if shift_comparison:
        comparisons = [shifted(p, eigen.eigenvalue) for p in comparisons]
    return TheoremCase(theorem, eigen.trajectory, comparisons, eigen=eigen, **kwargs)
