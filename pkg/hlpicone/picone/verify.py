"""
Residual verification of F' = R.

Differential mode estimates F' with 5-point central differences at the interior
points of every maximal run of admissible grid points; integral mode compares
F(end) - F(start) with the composite Simpson integral of R over each run.
Both residuals are divided by the scale 1 + max|F| + max|R|.
"""

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np
from scipy.integrate import simpson

from hlpicone.errors import EmptyDomainError, VariantError
from hlpicone.picone.cases import IdentityCase
from hlpicone.picone.identities import distinguished_index
from hlpicone.picone.kinds import IdentityKind, variant_combinations

logger = logging.getLogger(__name__)

MODES = ("diff", "int", "both")


def runs_of(mask: np.ndarray) -> List[Tuple[int, int]]:
    """Maximal runs of True as inclusive (start, end) index pairs."""
    padded = np.concatenate([[False], np.asarray(mask, dtype=bool), [False]])
    edges = np.flatnonzero(np.diff(padded.astype(np.int8)))
    return [(int(s), int(e) - 1) for s, e in zip(edges[::2], edges[1::2])]


def central_difference(values: np.ndarray, h: float) -> np.ndarray:
    """5-point derivative at indices 2..n-3 (nan elsewhere)."""
    out = np.full(len(values), np.nan)
    if len(values) >= 5:
        out[2:-2] = (values[:-4] - 8 * values[1:-3] + 8 * values[3:-1] - values[4:]) / (12 * h)
    return out


@dataclass
class IdentityReport:
    kind: IdentityKind
    variant: Dict[str, str]
    alpha: float
    grid_n: int
    span: Tuple[float, float]
    delta: float
    deltas: Dict[str, float]
    residual_diff: float
    residual_int: float
    scale: float
    excluded: List[List[float]]
    kink_points: List[float]
    int_threshold: float
    diff_threshold: float
    samples: Dict[str, np.ndarray] = field(repr=False, default_factory=dict)
    inner_derivative_residual: Optional[float] = None
    notes: List[str] = field(default_factory=list)
    samples_csv_path: Optional[str] = None

    @property
    def passed_diff(self) -> bool:
        return self.residual_diff <= self.diff_threshold

    @property
    def passed_int(self) -> bool:
        return self.residual_int <= self.int_threshold

    @property
    def anomaly(self) -> bool:
        """Differential and integral verdicts disagree."""
        return self.passed_diff != self.passed_int

    def residual(self, mode: str = "both") -> float:
        if mode == "diff":
            return self.residual_diff
        if mode == "int":
            return self.residual_int
        if math.isnan(self.residual_diff) or math.isnan(self.residual_int):
            return math.nan
        return max(self.residual_diff, self.residual_int)

    def passes(self, threshold: float, mode: str = "both") -> bool:
        return self.residual(mode) <= threshold

    def write_samples_csv(self, path: Union[str, Path]) -> None:
        """Columns x, F, dF (5-point estimate, nan where undefined), R, admissible."""
        s = self.samples
        table = np.column_stack([s["x"], s["F"], s["dF"], s["R"], s["admissible"].astype(float)])
        np.savetxt(path, table, fmt="%.17g", delimiter=",", header="x,F,dF,R,admissible", comments="")
        self.samples_csv_path = str(path)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": self.kind.value,
            "identity": self.kind.cli_name,
            "variant": dict(self.variant),
            "alpha": self.alpha,
            "grid_n": self.grid_n,
            "span": list(self.span),
            "delta": self.delta,
            "deltas": dict(self.deltas),
            "residual_diff": self.residual_diff,
            "residual_int": self.residual_int,
            "scale": self.scale,
            "diff_threshold": self.diff_threshold,
            "int_threshold": self.int_threshold,
            "passed_diff": self.passed_diff,
            "passed_int": self.passed_int,
            "anomaly": self.anomaly,
            "excluded": self.excluded,
            "kink_points": self.kink_points,
            "inner_derivative_residual": self.inner_derivative_residual,
            "notes": list(self.notes),
            "samples_csv_path": self.samples_csv_path,
        }


def _notes(case: IdentityCase) -> List[str]:
    notes = []
    if case.kind is IdentityKind.P26:
        m = distinguished_index(case.n, case.variants) + 1
        notes.append(f"distinguished solution u{m} of N={case.n}")
        if case.n == 2:
            notes.append("N=2: F and R equal -1 times those of identity 1.6 with u=u1, v=u2")
    if case.kind is IdentityKind.P13:
        notes.append("solutions only; operator terms are zero")
    return notes


def verify(
    case: IdentityCase,
    int_threshold: float = 1e-6,
    diff_threshold: float = 1e-4,
) -> IdentityReport:
    xs = case.grid_points()
    h = float(xs[1] - xs[0])
    ev = case.evaluate_on(xs)
    deltas = case.deltas(ev)
    ok = case.admissible(ev)
    ok &= np.isfinite(ev.F) & np.isfinite(ev.R)

    runs = runs_of(ok)
    diff_runs = [r for r in runs if r[1] - r[0] + 1 >= 5]
    int_runs = [r for r in runs if r[1] - r[0] + 1 >= 3]
    if not diff_runs and not int_runs:
        raise EmptyDomainError(
            f"{case.kind.value}: every grid point of [{case.span[0]!r}, {case.span[1]!r}] is excluded"
        )

    F, R = ev.F, ev.R
    scale = 1.0 + float(np.max(np.abs(F[ok]))) + float(np.max(np.abs(R[ok])))

    dF = np.full(len(xs), np.nan)
    for s, e in diff_runs:
        dF[s : e + 1] = central_difference(F[s : e + 1], h)
    has_dF = np.isfinite(dF)
    # no run is long enough for the 5-point stencil: the differential check has no verdict
    residual_diff = float(np.max(np.abs(dF[has_dF] - R[has_dF]))) / scale if np.any(has_dF) else math.nan
    if math.isnan(residual_diff):
        logger.warning(f"{case.kind.value}: no admissible run of 5 grid points; differential residual is undefined")

    residual_int = 0.0
    for s, e in int_runs:
        integral = simpson(R[s : e + 1], x=xs[s : e + 1])
        residual_int += abs(F[e] - F[s] - integral)
    residual_int /= scale

    inner = None
    if "dW" in ev.extras:
        W, dW = ev.extras["W"], ev.extras["dW"]
        worst = 0.0
        for s, e in diff_runs:
            fd = central_difference(W[s : e + 1], h)
            mask = np.isfinite(fd)
            if np.any(mask):
                worst = max(worst, float(np.max(np.abs(fd[mask] - dW[s : e + 1][mask]))))
        inner = worst / scale

    excluded = [[float(xs[s]), float(xs[e])] for s, e in runs_of(~ok)]
    kinks = case.kink_mask(xs)
    kink_points = [float(x) for x in xs[kinks]]
    if kink_points:
        logger.warning(
            f"{case.kind.value}: {len(kink_points)} grid points hit a derivative kink (value-0 convention)"
        )
    if excluded:
        logger.info(f"{case.kind.value}: {len(excluded)} excluded subintervals")

    report = IdentityReport(
        kind=case.kind,
        variant=dict(case.variants),
        alpha=case.alpha,
        grid_n=len(xs),
        span=case.span,
        delta=next(iter(deltas.values())),
        deltas=deltas,
        residual_diff=residual_diff,
        residual_int=residual_int,
        scale=scale,
        excluded=excluded,
        kink_points=kink_points,
        int_threshold=int_threshold,
        diff_threshold=diff_threshold,
        samples={"x": xs, "F": F, "dF": dF, "R": R, "admissible": ok},
        inner_derivative_residual=inner,
        notes=_notes(case),
    )
    if report.anomaly:
        logger.warning(
            f"{case.kind.value}: differential ({residual_diff:.3e}) and integral "
            f"({residual_int:.3e}) verdicts disagree"
        )
    logger.info(
        f"{case.kind.value} {case.variants}: residual_diff={residual_diff:.3e}, "
        f"residual_int={residual_int:.3e}, scale={scale:.3e}"
    )
    return report


@dataclass
class SweepResult:
    kind: IdentityKind
    threshold: float
    mode: str
    reports: List[IdentityReport]

    @property
    def passing(self) -> List[Dict[str, str]]:
        return [r.variant for r in self.reports if r.passes(self.threshold, self.mode)]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": self.kind.value,
            "threshold": self.threshold,
            "mode": self.mode,
            "passing": self.passing,
            "reports": [r.to_dict() for r in self.reports],
        }


def sweep_variants(
    case: IdentityCase,
    threshold: float = 1e-5,
    mode: str = "both",
    int_threshold: float = 1e-6,
    diff_threshold: float = 1e-4,
) -> SweepResult:
    """Verify ``case`` under every combination of the flags its kind owns."""
    if mode not in MODES:
        raise VariantError(f"mode must be one of {', '.join(MODES)}, got {mode!r}")
    # combinations with unchanged equations share these trajectories
    case.sources
    reports = []
    for combination in variant_combinations(case.kind):
        variant_case = case.with_variants(combination)
        reports.append(verify(variant_case, int_threshold, diff_threshold))
    result = SweepResult(case.kind, threshold, mode, reports)
    logger.info(f"{case.kind.value}: {len(result.passing)} of {len(reports)} variant combinations pass")
    return result
