"""
An identity instance: kind, variant flags, problems and the functions fed to it.
"""

import dataclasses
import logging
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from hlpicone.coeffexpr import CoeffExpr, MiddleTerm, as_expr
from hlpicone.errors import DomainError, PreconditionError
from hlpicone.hlode import (
    DEFAULT_ATOL,
    DEFAULT_RTOL,
    DEFAULT_STEPS_PER_SPAN,
    FourthOrderProblem,
    SecondOrderProblem,
    Trajectory,
    integrate,
)
from hlpicone.picone.identities import Evaluation, evaluate_identity
from hlpicone.picone.kinds import IdentityKind, resolve_variants
from hlpicone.picone.sources import ExpressionSource, TrajectorySource, coefficients_on

logger = logging.getLogger(__name__)

Problem = Union[SecondOrderProblem, FourthOrderProblem]


@dataclasses.dataclass(frozen=True)
class FunctionInput:
    """One function of an identity: a trajectory, an initial state to integrate
    from the left end of the problem interval, or an expression."""

    trajectory: Optional[Trajectory] = None
    initial: Optional[Tuple[float, ...]] = None
    expr: Optional[CoeffExpr] = None

    def __post_init__(self):
        given = [v is not None for v in (self.trajectory, self.initial, self.expr)]
        if sum(given) != 1:
            raise PreconditionError("a function input needs exactly one of trajectory, initial, expr")
        if self.initial is not None:
            object.__setattr__(self, "initial", tuple(float(v) for v in self.initial))

    @classmethod
    def of(cls, value) -> "FunctionInput":
        if isinstance(value, FunctionInput):
            return value
        if isinstance(value, Trajectory):
            return cls(trajectory=value)
        if isinstance(value, (CoeffExpr, str)):
            return cls(expr=as_expr(value))
        return cls(initial=tuple(value))

    @property
    def is_solution(self) -> bool:
        return self.expr is None


class IdentityCase:
    def __init__(
        self,
        kind: Union[IdentityKind, str],
        problems: Sequence[Problem],
        inputs: Sequence,
        variants: Optional[Dict[str, str]] = None,
        grid: int = 2001,
        delta_factor: float = 1e-6,
        span: Optional[Sequence[float]] = None,
        rtol: float = DEFAULT_RTOL,
        atol: float = DEFAULT_ATOL,
        steps_per_span: int = DEFAULT_STEPS_PER_SPAN,
    ):
        self.kind = kind if isinstance(kind, IdentityKind) else IdentityKind.parse(kind)
        self.variants = resolve_variants(self.kind, variants)
        self.inputs = [FunctionInput.of(v) for v in inputs]
        self.problems = self._check_problems(list(problems))
        if len(self.inputs) != len(self.problems):
            raise PreconditionError(
                f"{len(self.problems)} problems but {len(self.inputs)} function inputs"
            )
        if self.kind in (IdentityKind.P13, IdentityKind.P26):
            if not all(i.is_solution for i in self.inputs):
                raise PreconditionError(
                    f"identity {self.kind.cli_name} is stated for solutions only; "
                    "use 1.6 at alpha=1 for arbitrary functions"
                    if self.kind is IdentityKind.P13
                    else f"identity {self.kind.cli_name} is stated for solutions only"
                )
        if self.kind is IdentityKind.P13 and self.alpha != 1.0:
            raise PreconditionError(f"identity 1.3 is the linear case, got alpha={self.alpha!r}")
        if grid < 5:
            raise DomainError(f"grid needs at least 5 points, got {grid}")
        self.grid = int(grid)
        self.delta_factor = float(delta_factor)
        self.rtol, self.atol = rtol, atol
        self.steps_per_span = steps_per_span
        self.span = self._span(span)
        self._sources = None
        self._deltas = None

    def _check_problems(self, problems: List[Problem]) -> List[Problem]:
        expected = self.kind.order
        if self.kind is IdentityKind.P26:
            if len(problems) < 2:
                raise PreconditionError("identity 2.6 needs N >= 2 equations")
        elif len(problems) != 2:
            raise PreconditionError(f"identity {self.kind.cli_name} needs two problems, got {len(problems)}")
        for problem in problems:
            if problem.order != expected:
                raise PreconditionError(
                    f"identity {self.kind.cli_name} needs order-{expected} problems, got order {problem.order}"
                )
        alphas = {problem.alpha for problem in problems}
        if len(alphas) != 1:
            raise PreconditionError(f"all problems must share alpha, got {sorted(alphas)}")
        if expected == 4:
            term = MiddleTerm(self.variants["middle_term"])
            problems = [
                p if p.middle_term is term else dataclasses.replace(p, middle_term=term)
                for p in problems
            ]
        return problems

    def _span(self, span) -> Tuple[float, float]:
        x0 = max(p.interval[0] for p in self.problems)
        x1 = min(p.interval[1] for p in self.problems)
        if span is not None:
            x0, x1 = max(x0, float(span[0])), min(x1, float(span[1]))
        if not x0 < x1:
            raise DomainError("the problems share no interval")
        return x0, x1

    def __repr__(self) -> str:
        return f"IdentityCase({self.kind.value}, alpha={self.alpha!r}, variants={self.variants})"

    @property
    def alpha(self) -> float:
        return self.problems[0].alpha

    @property
    def n(self) -> int:
        return len(self.problems)

    def with_variants(self, variants: Dict[str, str]) -> "IdentityCase":
        """Same problems and inputs under other flags; trajectories are reused
        when their equation is unchanged."""
        merged = dict(self.variants)
        merged.update(variants)
        inputs = []
        sources = self._sources or [None] * self.n
        for given, source in zip(self.inputs, sources):
            if isinstance(source, TrajectorySource):
                inputs.append(FunctionInput(trajectory=source.trajectory))
            else:
                inputs.append(given)
        return IdentityCase(
            self.kind,
            self.problems,
            inputs,
            variants=merged,
            grid=self.grid,
            delta_factor=self.delta_factor,
            span=self.span,
            rtol=self.rtol,
            atol=self.atol,
            steps_per_span=self.steps_per_span,
        )

    def _source(self, problem: Problem, given: FunctionInput):
        if given.expr is not None:
            return ExpressionSource(problem, given.expr)
        if given.trajectory is not None and given.trajectory.problem == problem:
            return TrajectorySource(given.trajectory)
        if given.trajectory is not None:
            # integrated for another middle term; restart from its initial state
            traj = given.trajectory
            initial, span = traj.initial, (traj.x0, traj.x1)
        else:
            initial, span = given.initial, problem.interval
        width = span[1] - span[0]
        traj = integrate(
            problem,
            initial,
            span=span,
            rtol=self.rtol,
            atol=self.atol,
            max_step=width / self.steps_per_span,
        )
        return TrajectorySource(traj)

    @property
    def sources(self):
        if self._sources is None:
            self._sources = [self._source(p, i) for p, i in zip(self.problems, self.inputs)]
        return self._sources

    def grid_points(self) -> np.ndarray:
        return np.linspace(self.span[0], self.span[1], self.grid)

    def evaluate_on(self, xs: np.ndarray) -> Evaluation:
        xs = np.asarray(xs, dtype=float)
        fields = [s.fields_on(xs) for s in self.sources]
        coefficients = [coefficients_on(p, xs) for p in self.problems]
        return evaluate_identity(self.kind, self.alpha, fields, coefficients, self.variants)

    def kink_mask(self, xs: np.ndarray) -> np.ndarray:
        mask = np.zeros(len(xs), dtype=bool)
        for source in self.sources:
            mask |= source.kink_mask(xs)
        return mask

    def deltas(self, grid_evaluation: Optional[Evaluation] = None) -> Dict[str, float]:
        """Exclusion thresholds: delta_factor times the sup of each denominator over the grid."""
        if self._deltas is None:
            ev = grid_evaluation or self.evaluate_on(self.grid_points())
            self._deltas = {
                name: self.delta_factor * float(np.max(np.abs(den)))
                for name, den in ev.denominators.items()
            }
        return self._deltas

    def admissible(self, ev: Evaluation) -> np.ndarray:
        ok = np.ones(len(ev.F), dtype=bool)
        deltas = self.deltas()
        for name, den in ev.denominators.items():
            ok &= (np.abs(den) >= deltas[name]) & (den != 0)
        return ok

    def _at(self, x: float) -> Evaluation:
        ev = self.evaluate_on(np.array([float(x)]))
        if not self.admissible(ev)[0]:
            raise DomainError(f"x={x!r} is excluded: a denominator is below its threshold")
        return ev


def bracket(case: IdentityCase, x: float) -> float:
    """F(x), the expression under d/dx."""
    return float(case._at(x).F[0])


def rhs(case: IdentityCase, x: float) -> float:
    return float(case._at(x).R[0])
