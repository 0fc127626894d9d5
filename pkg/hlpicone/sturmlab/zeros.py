"""
Zeros of a trajectory component.

A zero is claimed only where the component changes sign between two mesh
nodes (or vanishes exactly at an interior node between values of opposite
sign). Tangential zeros and zeros at the ends of the span are not claimed.
"""

import logging
from dataclasses import dataclass
from typing import Dict, Iterator, List, Optional, Tuple

import numpy as np
from scipy.optimize import brentq

from hlpicone.hlode import Trajectory

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ZeroSet:
    zeros: Tuple[float, ...]
    tol: float
    component: str = "u"

    def __len__(self) -> int:
        return len(self.zeros)

    def __iter__(self) -> Iterator[float]:
        return iter(self.zeros)

    def __getitem__(self, i: int) -> float:
        return self.zeros[i]

    @property
    def first(self) -> Optional[float]:
        return self.zeros[0] if self.zeros else None

    def count_in(self, x0: float, x1: float) -> int:
        """Zeros strictly inside (x0, x1)."""
        return sum(1 for z in self.zeros if x0 < z < x1)

    def to_dict(self) -> Dict:
        return {"component": self.component, "tol": self.tol, "zeros": list(self.zeros)}


def sign_changes(values: np.ndarray) -> int:
    """Number of sign changes in ``values``, exact zeros skipped."""
    signs = np.sign(np.asarray(values, dtype=float))
    signs = signs[signs != 0]
    return int(np.count_nonzero(signs[1:] != signs[:-1]))


def find_zeros(traj: Trajectory, component: str = "u", tol: float = 1e-10) -> ZeroSet:
    xs = traj.xs
    values = traj.component_on(component, xs)

    def f(x: float) -> float:
        return float(traj.component_on(component, [x])[0])

    zeros: List[float] = []
    for i in range(len(xs) - 1):
        left, right = values[i], values[i + 1]
        if left == 0.0 and 0 < i and values[i - 1] * right < 0:
            zeros.append(float(xs[i]))
        elif left * right < 0:
            zeros.append(float(brentq(f, xs[i], xs[i + 1], xtol=tol)))
    logger.debug(f"{len(zeros)} zeros of {component} on [{traj.x0!r}, {traj.x1!r}]")
    return ZeroSet(tuple(zeros), tol, component)
