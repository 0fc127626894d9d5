"""
Dense solution of a quasi-derivative system.

Between accepted mesh nodes the state is the cubic Hermite interpolant of the
stored states and derivatives; at the nodes it is the stored state exactly.
"""

import logging
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Dict, Optional, Union

import numpy as np

from hlpicone.errors import DomainError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class StepStats:
    accepted: int
    rejected: int
    min_step: float
    max_step: float

    def to_dict(self) -> Dict[str, Union[int, float]]:
        return asdict(self)


class Trajectory:
    def __init__(self, problem, xs: np.ndarray, ys: np.ndarray, dys: np.ndarray, stats: StepStats):
        xs = np.asarray(xs, dtype=float)
        if xs.ndim != 1 or len(xs) < 2 or np.any(np.diff(xs) <= 0):
            raise DomainError("trajectory mesh must be strictly increasing with at least two nodes")
        self.problem = problem
        self.xs = xs
        self.ys = np.asarray(ys, dtype=float)
        self.dys = np.asarray(dys, dtype=float)
        self.stats = stats
        for array in (self.xs, self.ys, self.dys):
            array.setflags(write=False)

    def __repr__(self) -> str:
        return (
            f"Trajectory(order={self.order}, span=[{self.x0!r}, {self.x1!r}], "
            f"nodes={len(self.xs)})"
        )

    @property
    def order(self) -> int:
        return self.problem.order

    @property
    def alpha(self) -> float:
        return self.problem.alpha

    @property
    def x0(self) -> float:
        return float(self.xs[0])

    @property
    def x1(self) -> float:
        return float(self.xs[-1])

    @property
    def initial(self) -> np.ndarray:
        return self.ys[0].copy()

    def _locate(self, xs: np.ndarray) -> np.ndarray:
        slack = 1e-12 * (self.x1 - self.x0)
        if np.any(xs < self.x0 - slack) or np.any(xs > self.x1 + slack):
            raise DomainError(
                f"points outside the trajectory span [{self.x0!r}, {self.x1!r}]"
            )
        idx = np.searchsorted(self.xs, xs, side="right") - 1
        return np.clip(idx, 0, len(self.xs) - 2)

    def states_on(self, xs) -> np.ndarray:
        """Interpolated states, shape (len(xs), state_dim)."""
        xs = np.atleast_1d(np.asarray(xs, dtype=float))
        i = self._locate(xs)
        xl, xr = self.xs[i], self.xs[i + 1]
        h = (xr - xl)[:, None]
        t = np.clip((xs - xl) / (xr - xl), 0.0, 1.0)[:, None]
        t2, t3 = t * t, t * t * t
        h00 = 2 * t3 - 3 * t2 + 1
        h10 = t3 - 2 * t2 + t
        h01 = -2 * t3 + 3 * t2
        h11 = t3 - t2
        return (
            h00 * self.ys[i]
            + h10 * h * self.dys[i]
            + h01 * self.ys[i + 1]
            + h11 * h * self.dys[i + 1]
        )

    def state_at(self, x: float) -> np.ndarray:
        return self.states_on([x])[0]

    def fields_on(self, xs) -> Dict[str, np.ndarray]:
        xs = np.atleast_1d(np.asarray(xs, dtype=float))
        return self.problem.fields_from_states(xs, self.states_on(xs))

    def fields_at(self, x: float) -> Dict[str, float]:
        return {k: float(v[0]) for k, v in self.fields_on([x]).items()}

    def component_on(self, name: str, xs) -> np.ndarray:
        if name not in self.problem.field_names:
            raise KeyError(f"unknown field {name!r}; known: {', '.join(self.problem.field_names)}")
        return self.fields_on(xs)[name]

    def scaled(self, c: float) -> "Trajectory":
        """The solution c u, exact by homogeneity of the half-linear equation."""
        factors = self.problem.scale_factors(float(c))
        return Trajectory(self.problem, self.xs, self.ys * factors, self.dys * factors, self.stats)

    def to_csv(self, path: Union[str, Path], xs: Optional[np.ndarray] = None) -> None:
        """Columns x, y1..yN and the derived fields; one header row, 17 significant digits."""
        xs = self.xs if xs is None else np.asarray(xs, dtype=float)
        states = self.states_on(xs)
        fields = self.problem.fields_from_states(xs, states)
        names = ["x"] + [f"y{k + 1}" for k in range(states.shape[1])] + list(fields)
        table = np.column_stack([xs, states] + [fields[k] for k in fields])
        np.savetxt(path, table, fmt="%.17g", delimiter=",", header=",".join(names), comments="")
        logger.debug(f"wrote {len(xs)} rows to {path}")


def fields_at(traj: Trajectory, x: float) -> Dict[str, float]:
    return traj.fields_at(x)
