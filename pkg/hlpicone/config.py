"""
Numerical settings and the problem-file schema.

A problem file is a JSON document merged into the structured config
:class:`ProblemFile`; the merge runs in struct mode, so an unknown member
or a value of the wrong type is a :class:`ProblemFileError`.

    {
      "alpha": 2,
      "interval": [0.1, 1.4],
      "order": "second",
      "coefficients": {"p": "1", "q": "2"},
      "second": {"P": "1", "Q": "2"},
      "initial": {"u": [0.3, 1.0], "v": [1.0, 0.2]},
      "variants": {"bracket_power": "corrected"},
      "settings": {"grid": 2001}
    }
"""

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Union

from omegaconf import MISSING, DictConfig, OmegaConf
from omegaconf.errors import OmegaConfBaseException

from hlpicone.coeffexpr import CoeffExpr, MiddleTerm, as_expr
from hlpicone.errors import DomainError, ProblemFileError, SingularCoefficientError
from hlpicone.hlode import FourthOrderProblem, SecondOrderProblem
from hlpicone.picone.kinds import FLAG_VALUES

logger = logging.getLogger(__name__)

ORDERS = ("second", "fourth", "system")
COEFFICIENT_KEYS = {"second": ("p", "q"), "fourth": ("a", "b", "c"), "system": ("p", "q")}


@dataclass
class Settings:
    grid: int = 2001
    rtol: float = 1e-10
    atol: float = 1e-12
    max_steps_per_span: int = 2000
    # exclusion threshold for identity denominators, relative to their sup over the grid
    delta_factor: float = 1e-6
    threshold: float = 1e-5
    int_threshold: float = 1e-6
    diff_threshold: float = 1e-4
    hypothesis_grid: int = 2001
    samples: int = 32
    # extra comparison samples started from multiples of the manufactured solution's state
    proportional_samples: int = 0
    # apply the manufactured solution's eigenvalue shift to the sampled equations too
    shift_comparison: bool = False
    seed: int = 0
    zero_tol: float = 1e-10
    num_workers: int = 1


@dataclass
class Coefficients:
    # strings in the expression grammar, numbers, or lists of those for systems
    p: Any = None
    q: Any = None
    a: Any = None
    b: Any = None
    c: Any = None


@dataclass
class SecondCoefficients:
    P: Any = None
    Q: Any = None
    A: Any = None
    B: Any = None
    C: Any = None


@dataclass
class Functions:
    u: Optional[str] = None
    v: Optional[str] = None


@dataclass
class Initial:
    u: Optional[List[float]] = None
    v: Optional[List[float]] = None
    systems: Optional[List[List[float]]] = None
    # extra comparison samples (compare): initial states of v, or of u1 and u3 alternately
    samples: Optional[List[List[float]]] = None


@dataclass
class ProblemFile:
    alpha: float = MISSING
    interval: List[float] = MISSING
    order: str = "second"
    description: str = ""
    coefficients: Coefficients = field(default_factory=Coefficients)
    second: Optional[SecondCoefficients] = None
    functions: Functions = field(default_factory=Functions)
    initial: Initial = field(default_factory=Initial)
    variants: Dict[str, str] = field(default_factory=dict)
    settings: Settings = field(default_factory=Settings)


def default_settings() -> Settings:
    return Settings()


def merge_settings(settings: Union[Settings, DictConfig], overrides: Mapping[str, Any]) -> Settings:
    """Settings with non-None ``overrides`` applied (command-line flags)."""
    base = OmegaConf.structured(settings)
    updates = {k: v for k, v in overrides.items() if v is not None}
    try:
        merged = OmegaConf.merge(base, updates)
    except OmegaConfBaseException as e:
        raise ProblemFileError(f"bad settings override: {e}") from e
    return OmegaConf.to_object(merged)


def problem_from_dict(doc: Mapping[str, Any], source: str = "<problem>") -> DictConfig:
    if not isinstance(doc, Mapping):
        raise ProblemFileError(f"{source}: top level must be a JSON object")
    schema = OmegaConf.structured(ProblemFile)
    try:
        cfg = OmegaConf.merge(schema, doc)
        OmegaConf.to_container(cfg, throw_on_missing=True)
    except OmegaConfBaseException as e:
        raise ProblemFileError(f"{source}: {e}") from e

    if not cfg.alpha > 0:
        raise ProblemFileError(f"{source}: alpha must be positive, got {cfg.alpha!r}")
    if len(cfg.interval) != 2 or not cfg.interval[0] < cfg.interval[1]:
        raise ProblemFileError(f"{source}: interval must be [x0, x1] with x0 < x1")
    if cfg.order not in ORDERS:
        raise ProblemFileError(f"{source}: order must be one of {', '.join(ORDERS)}, got {cfg.order!r}")
    return cfg


def load_problem_file(path: Union[str, Path]) -> DictConfig:
    try:
        with open(path) as f:
            doc = json.load(f)
    except OSError as e:
        raise ProblemFileError(f"cannot read {path}: {e.strerror}") from e
    except json.JSONDecodeError as e:
        raise ProblemFileError(f"{path}: invalid JSON: {e}") from e
    cfg = problem_from_dict(doc, source=str(path))
    logger.info(f"loaded {cfg.order} problem from {path}")
    return cfg


def _container(node) -> Any:
    if isinstance(node, (DictConfig,)) or OmegaConf.is_list(node):
        return OmegaConf.to_container(node, resolve=True)
    return node


def _expr(value: Any, name: str, default: Optional[str] = None) -> CoeffExpr:
    if value is None:
        if default is None:
            raise ProblemFileError(f"missing coefficient {name}")
        value = default
    if isinstance(value, bool) or not isinstance(value, (str, int, float)):
        raise ProblemFileError(f"coefficient {name} must be a string or a number")
    return as_expr(value)


def _expr_list(value: Any, name: str) -> List[CoeffExpr]:
    value = _container(value)
    if not isinstance(value, list) or len(value) < 2:
        raise ProblemFileError(f"coefficient {name} of a system must be a list of at least two entries")
    return [_expr(v, f"{name}[{k}]") for k, v in enumerate(value)]


@dataclass
class ParsedProblem:
    """Every expression of a problem file, parsed before any computation."""

    alpha: float
    interval: List[float]
    order: str
    coefficients: Dict[str, Any]
    second: Optional[Dict[str, CoeffExpr]]
    functions: Dict[str, Optional[CoeffExpr]]
    initial: Dict[str, Any]
    variants: Dict[str, str]
    settings: Settings

    @property
    def has_second(self) -> bool:
        return self.second is not None

    def problem(self, middle_term: Optional[str] = None):
        """The first problem of the file (coefficients p, q or a, b, c)."""
        return self._build(self.coefficients, ("p", "q", "a", "b", "c"), middle_term)

    def second_problem(self, middle_term: Optional[str] = None):
        if self.second is None:
            raise ProblemFileError("the problem file has no 'second' member")
        return self._build(self.second, ("P", "Q", "A", "B", "C"), middle_term)

    def system(self) -> List[SecondOrderProblem]:
        if self.order != "system":
            raise ProblemFileError(f"order 'system' required, file has {self.order!r}")
        ps, qs = self.coefficients["p"], self.coefficients["q"]
        return [self._wrap(SecondOrderProblem, p, q) for p, q in zip(ps, qs)]

    def _wrap(self, cls, *args, **kwargs):
        try:
            return cls(*args, alpha=self.alpha, interval=tuple(self.interval), **kwargs)
        except (DomainError, SingularCoefficientError) as e:
            raise ProblemFileError(str(e)) from e

    def _build(self, coefficients: Dict[str, CoeffExpr], names, middle_term: Optional[str]):
        p, q, a, b, c = names
        if self.order == "second":
            return self._wrap(SecondOrderProblem, coefficients[p], coefficients[q])
        if self.order == "fourth":
            term = MiddleTerm(middle_term or self.variants.get("middle_term", MiddleTerm.FIRST_DERIVATIVE))
            return self._wrap(
                FourthOrderProblem,
                coefficients[a],
                coefficients[b],
                coefficients[c],
                middle_term=term,
            )
        raise ProblemFileError("use system() for order 'system'")


def _only_keys(members: Mapping, allowed, section: str, order: str) -> None:
    extra = [k for k, v in members.items() if v is not None and k not in allowed]
    if extra:
        raise ProblemFileError(
            f"{section} member(s) {', '.join(extra)} do not belong to an order {order!r} problem; "
            f"expected {', '.join(allowed)}"
        )


def parse_problem(cfg: DictConfig) -> ParsedProblem:
    coeffs = _container(cfg.coefficients)
    _only_keys(coeffs, COEFFICIENT_KEYS[cfg.order], "coefficients", cfg.order)
    if cfg.order == "second":
        coefficients = {"p": _expr(coeffs["p"], "p"), "q": _expr(coeffs["q"], "q", "0")}
    elif cfg.order == "fourth":
        coefficients = {
            "a": _expr(coeffs["a"], "a"),
            "b": _expr(coeffs["b"], "b", "0"),
            "c": _expr(coeffs["c"], "c", "0"),
        }
    else:
        coefficients = {"p": _expr_list(coeffs["p"], "p"), "q": _expr_list(coeffs["q"], "q")}
        if len(coefficients["p"]) != len(coefficients["q"]):
            raise ProblemFileError("coefficient lists p and q of a system differ in length")

    second = None
    if cfg.second is not None:
        other = _container(cfg.second)
        _only_keys(other, [k.upper() for k in COEFFICIENT_KEYS[cfg.order]], "second", cfg.order)
        if cfg.order == "second":
            second = {"P": _expr(other["P"], "P"), "Q": _expr(other["Q"], "Q", "0")}
        elif cfg.order == "fourth":
            second = {
                "A": _expr(other["A"], "A"),
                "B": _expr(other["B"], "B", "0"),
                "C": _expr(other["C"], "C", "0"),
            }
        else:
            raise ProblemFileError("a system file carries its equations in coefficient lists, not 'second'")

    functions = {
        name: None if cfg.functions[name] is None else _expr(cfg.functions[name], name)
        for name in ("u", "v")
    }
    initial = _container(cfg.initial)
    for name, state in initial.items():
        if state is None:
            continue
        states = state if name in ("systems", "samples") else [state]
        for s in states:
            expected = 4 if cfg.order == "fourth" else 2
            if len(s) != expected:
                raise ProblemFileError(
                    f"initial state {name} must have {expected} components, got {len(s)}"
                )
    for flag, value in cfg.variants.items():
        if flag not in FLAG_VALUES:
            raise ProblemFileError(f"unknown variant flag {flag!r}; known: {', '.join(FLAG_VALUES)}")
        if value not in FLAG_VALUES[flag]:
            raise ProblemFileError(
                f"variant {flag!r} takes one of {', '.join(FLAG_VALUES[flag])}, got {value!r}"
            )
    return ParsedProblem(
        alpha=float(cfg.alpha),
        interval=[float(x) for x in cfg.interval],
        order=cfg.order,
        coefficients=coefficients,
        second=second,
        functions=functions,
        initial=initial,
        variants=dict(cfg.variants),
        settings=OmegaConf.to_object(cfg.settings),
    )
