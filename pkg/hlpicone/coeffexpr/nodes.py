"""
Expression tree of a coefficient or test function of one variable x.

Nodes are frozen dataclasses, so two trees compare (and hash) structurally.
"""

from dataclasses import dataclass, field
from typing import Callable, Optional, Union

# unary functions understood by the grammar
FUNCTIONS = (
    "sin",
    "cos",
    "tan",
    "exp",
    "log",
    "sqrt",
    "abs",
    "sgn",
    "sinh",
    "cosh",
    "tanh",
)

# functions taking an expression and a numeric exponent literal
POWER_FUNCTIONS = ("sgnpow", "abspow")

BINARY_OPS = ("+", "-", "*", "/", "^")


@dataclass(frozen=True)
class Const:
    value: float
    name: Optional[str] = None


@dataclass(frozen=True)
class Var:
    pass


@dataclass(frozen=True)
class Neg:
    arg: "Node"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Call:
    name: str
    arg: "Node"


@dataclass(frozen=True)
class SgnPow:
    """|arg|^(alpha-1) arg, i.e. phi_alpha(arg)."""

    arg: "Node"
    alpha: float


@dataclass(frozen=True)
class AbsPow:
    """|arg|^power."""

    arg: "Node"
    power: float


Node = Union[Const, Var, Neg, BinOp, Call, SgnPow, AbsPow]


def depends_on_x(node: Node) -> bool:
    if isinstance(node, Var):
        return True
    if isinstance(node, Const):
        return False
    if isinstance(node, BinOp):
        return depends_on_x(node.left) or depends_on_x(node.right)
    return depends_on_x(node.arg)


def to_text(node: Node) -> str:
    """Canonical, fully parenthesised text; parse(to_text(t)) evaluates like t
    and prints back to the same text."""
    if isinstance(node, Const):
        if node.name is not None:
            return node.name
        if node.value < 0:
            return f"(-{repr(-node.value)})"
        return repr(float(node.value))
    if isinstance(node, Var):
        return "x"
    if isinstance(node, Neg):
        return f"(-{to_text(node.arg)})"
    if isinstance(node, BinOp):
        return f"({to_text(node.left)} {node.op} {to_text(node.right)})"
    if isinstance(node, Call):
        return f"{node.name}({to_text(node.arg)})"
    if isinstance(node, SgnPow):
        return f"sgnpow({to_text(node.arg)}, {repr(float(node.alpha))})"
    if isinstance(node, AbsPow):
        return f"abspow({to_text(node.arg)}, {repr(float(node.power))})"
    raise TypeError(f"not an expression node: {node!r}")


def tree_depth(node: Node) -> int:
    if isinstance(node, (Const, Var)):
        return 1
    if isinstance(node, BinOp):
        return 1 + max(tree_depth(node.left), tree_depth(node.right))
    return 1 + tree_depth(node.arg)


def _coerce(value: Union["CoeffExpr", Node, float, int]) -> Node:
    if isinstance(value, CoeffExpr):
        return value.root
    if isinstance(value, (int, float)):
        return Const(float(value))
    return value


@dataclass(frozen=True)
class CoeffExpr:
    """A parsed coefficient / test function.

    Calling the object evaluates it at a scalar x (see ``calculus.evaluate``).
    Arithmetic operators build new expressions:

        >>> u = parse("sin(x)")
        >>> w = 2 * u + parse("x")
    """

    root: Node
    _compiled: Optional[Callable[[float], float]] = field(
        default=None, compare=False, repr=False, hash=False
    )

    def __str__(self) -> str:
        return to_text(self.root)

    def __call__(self, x: float) -> float:
        from hlpicone.coeffexpr.calculus import evaluate

        return evaluate(self, x)

    @property
    def is_constant(self) -> bool:
        return not depends_on_x(self.root)

    def __add__(self, other):
        return CoeffExpr(BinOp("+", self.root, _coerce(other)))

    def __radd__(self, other):
        return CoeffExpr(BinOp("+", _coerce(other), self.root))

    def __sub__(self, other):
        return CoeffExpr(BinOp("-", self.root, _coerce(other)))

    def __rsub__(self, other):
        return CoeffExpr(BinOp("-", _coerce(other), self.root))

    def __mul__(self, other):
        return CoeffExpr(BinOp("*", self.root, _coerce(other)))

    def __rmul__(self, other):
        return CoeffExpr(BinOp("*", _coerce(other), self.root))

    def __truediv__(self, other):
        return CoeffExpr(BinOp("/", self.root, _coerce(other)))

    def __rtruediv__(self, other):
        return CoeffExpr(BinOp("/", _coerce(other), self.root))

    def __neg__(self):
        return CoeffExpr(Neg(self.root))
