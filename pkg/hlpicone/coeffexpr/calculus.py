"""
Evaluation and symbolic differentiation of coefficient expressions.

Evaluation compiles the tree once into nested closures (cached on the
CoeffExpr), which keeps coefficient calls cheap inside the integrator.
"""

import math
from functools import singledispatch
from typing import Callable, Tuple

import numpy as np

from hlpicone.coeffexpr.nodes import (
    AbsPow,
    BinOp,
    Call,
    CoeffExpr,
    Const,
    Neg,
    Node,
    SgnPow,
    Var,
    depends_on_x,
)
from hlpicone.errors import DomainError
from hlpicone.sgnpow import TINY, spow as _sgnpow

Scalar = Callable[[float], float]


def _abspow(v: float, c: float) -> float:
    if c == 0:
        return 1.0
    if abs(v) < TINY:
        return 0.0
    return abs(v) ** c


def _sgn(v: float) -> float:
    if v > 0:
        return 1.0
    if v < 0:
        return -1.0
    return 0.0


def _div(a: float, b: float) -> float:
    if b == 0:
        raise DomainError("division by zero")
    return a / b


def _pow(base: float, exponent: float) -> float:
    if math.isfinite(exponent) and exponent == int(exponent) and abs(exponent) < 2 ** 31:
        n = int(exponent)
        if base == 0 and n < 0:
            raise DomainError("zero raised to a negative power")
        try:
            return base ** n
        except OverflowError:
            return math.copysign(math.inf, base) if n % 2 else math.inf
    if base > 0:
        try:
            return math.pow(base, exponent)
        except OverflowError:
            return math.inf
    if base == 0 and exponent > 0:
        return 0.0
    raise DomainError(f"non-integer power {exponent!r} of non-positive base {base!r}")


def _log(v: float) -> float:
    if v <= 0:
        raise DomainError(f"log of non-positive argument {v!r}")
    return math.log(v)


def _sqrt(v: float) -> float:
    if v < 0:
        raise DomainError(f"sqrt of negative argument {v!r}")
    return math.sqrt(v)


def _overflow_safe(fn: Scalar) -> Scalar:
    def wrapped(v: float) -> float:
        try:
            return fn(v)
        except OverflowError:
            return math.inf

    return wrapped


def _sinh(v: float) -> float:
    try:
        return math.sinh(v)
    except OverflowError:
        return math.copysign(math.inf, v)


UNARY = {
    "sin": math.sin,
    "cos": math.cos,
    "tan": math.tan,
    "exp": _overflow_safe(math.exp),
    "log": _log,
    "sqrt": _sqrt,
    "abs": abs,
    "sgn": _sgn,
    "sinh": _sinh,
    "cosh": _overflow_safe(math.cosh),
    "tanh": math.tanh,
}

BINARY = {
    "+": lambda a, b: a + b,
    "-": lambda a, b: a - b,
    "*": lambda a, b: a * b,
    "/": _div,
    "^": _pow,
}


def compile_node(node: Node) -> Scalar:
    if isinstance(node, Const):
        value = float(node.value)
        return lambda x: value
    if isinstance(node, Var):
        return lambda x: x
    if isinstance(node, Neg):
        arg = compile_node(node.arg)
        return lambda x: -arg(x)
    if isinstance(node, BinOp):
        left, right = compile_node(node.left), compile_node(node.right)
        op = BINARY[node.op]
        return lambda x: op(left(x), right(x))
    if isinstance(node, Call):
        arg = compile_node(node.arg)
        fn = UNARY[node.name]
        return lambda x: fn(arg(x))
    if isinstance(node, SgnPow):
        arg, c = compile_node(node.arg), node.alpha
        return lambda x: _sgnpow(arg(x), c)
    if isinstance(node, AbsPow):
        arg, c = compile_node(node.arg), node.power
        return lambda x: _abspow(arg(x), c)
    raise TypeError(f"not an expression node: {node!r}")


def compile_expr(expr: CoeffExpr) -> Scalar:
    """Scalar callable of ``expr``; arithmetic failures surface as DomainError."""
    if expr._compiled is None:
        fn = compile_node(expr.root)

        def checked(x: float) -> float:
            try:
                return fn(x)
            except DomainError:
                raise
            except (ZeroDivisionError, ValueError, OverflowError) as e:
                raise DomainError(f"{e} at x={x!r}") from e

        object.__setattr__(expr, "_compiled", checked)
    return expr._compiled


def evaluate(expr: CoeffExpr, x: float) -> float:
    """Value of ``expr`` at ``x``; IEEE semantics except for the domain errors
    (log/sqrt of negatives, division by zero, bad powers)."""
    x = float(x)
    if not math.isfinite(x):
        raise DomainError(f"cannot evaluate at non-finite x={x!r}")
    return compile_expr(expr)(x)


def evaluate_on(expr: CoeffExpr, xs: np.ndarray) -> np.ndarray:
    fn = compile_expr(expr)
    return np.array([fn(float(x)) for x in np.asarray(xs, dtype=float)])


def _walk(node: Node, x: float) -> Tuple[float, bool]:
    if isinstance(node, Const):
        return float(node.value), False
    if isinstance(node, Var):
        return x, False
    if isinstance(node, Neg):
        v, hit = _walk(node.arg, x)
        return -v, hit
    if isinstance(node, BinOp):
        a, hit_a = _walk(node.left, x)
        b, hit_b = _walk(node.right, x)
        return BINARY[node.op](a, b), hit_a or hit_b
    v, hit = _walk(node.arg, x)
    at_zero = abs(v) < TINY
    if isinstance(node, Call):
        return UNARY[node.name](v), hit or (node.name == "sgn" and at_zero)
    if isinstance(node, SgnPow):
        return _sgnpow(v, node.alpha), hit or (at_zero and node.alpha <= 0)
    return _abspow(v, node.power), hit or (at_zero and node.power < 0)


def _can_kink(node: Node) -> bool:
    if isinstance(node, (Const, Var)):
        return False
    if isinstance(node, BinOp):
        return _can_kink(node.left) or _can_kink(node.right)
    if isinstance(node, Call) and node.name == "sgn":
        return True
    if isinstance(node, SgnPow) and node.alpha <= 0:
        return True
    if isinstance(node, AbsPow) and node.power < 0:
        return True
    return _can_kink(node.arg)


def can_kink(expr: CoeffExpr) -> bool:
    """False when no evaluation of ``expr`` can reach a kink convention."""
    return _can_kink(expr.root)


def kink_hit(expr: CoeffExpr, x: float) -> bool:
    """True when evaluating at ``x`` relies on the value-0 convention at a kink
    (sgn of 0, or a negative power of |0|)."""
    return _walk(expr.root, float(x))[1]


# differentiation

ZERO = Const(0.0)
ONE = Const(1.0)


def _is(node: Node, value: float) -> bool:
    return isinstance(node, Const) and node.value == value


def _add(a: Node, b: Node) -> Node:
    if _is(a, 0):
        return b
    if _is(b, 0):
        return a
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value + b.value)
    return BinOp("+", a, b)


def _neg(a: Node) -> Node:
    if isinstance(a, Const):
        return Const(-a.value)
    if isinstance(a, Neg):
        return a.arg
    return Neg(a)


def _sub(a: Node, b: Node) -> Node:
    if _is(b, 0):
        return a
    if _is(a, 0):
        return _neg(b)
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value - b.value)
    return BinOp("-", a, b)


def _mul(a: Node, b: Node) -> Node:
    if _is(a, 0) or _is(b, 0):
        return ZERO
    if _is(a, 1):
        return b
    if _is(b, 1):
        return a
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value * b.value)
    return BinOp("*", a, b)


def _div_node(a: Node, b: Node) -> Node:
    if _is(a, 0):
        return ZERO
    if _is(b, 1):
        return a
    return BinOp("/", a, b)


def _pow_node(a: Node, n: Node) -> Node:
    if _is(n, 0):
        return ONE
    if _is(n, 1):
        return a
    return BinOp("^", a, n)


@singledispatch
def _d(node) -> Node:
    raise TypeError(f"cannot differentiate {type(node).__name__}")


@_d.register(Const)
def _(node: Const) -> Node:
    return ZERO


@_d.register(Var)
def _(node: Var) -> Node:
    return ONE


@_d.register(Neg)
def _(node: Neg) -> Node:
    return _neg(_d(node.arg))


@_d.register(BinOp)
def _(node: BinOp) -> Node:
    f, g = node.left, node.right
    if node.op == "+":
        return _add(_d(f), _d(g))
    if node.op == "-":
        return _sub(_d(f), _d(g))
    if node.op == "*":
        return _add(_mul(_d(f), g), _mul(f, _d(g)))
    if node.op == "/":
        numerator = _sub(_mul(_d(f), g), _mul(f, _d(g)))
        return _div_node(numerator, _pow_node(g, Const(2.0)))
    # power
    if not depends_on_x(g):
        n_minus_1 = Const(g.value - 1.0) if isinstance(g, Const) else _sub(g, ONE)
        return _mul(_mul(g, _pow_node(f, n_minus_1)), _d(f))
    if not depends_on_x(f):
        return _mul(_mul(node, Call("log", f)), _d(g))
    # f^g (g' log f + g f'/f)
    inner = _add(_mul(_d(g), Call("log", f)), _div_node(_mul(g, _d(f)), f))
    return _mul(node, inner)


@_d.register(Call)
def _(node: Call) -> Node:
    f = node.arg
    df = _d(f)
    if _is(df, 0):
        return ZERO
    name = node.name
    if name == "sin":
        outer = Call("cos", f)
    elif name == "cos":
        outer = Neg(Call("sin", f))
    elif name == "tan":
        outer = _div_node(ONE, _pow_node(Call("cos", f), Const(2.0)))
    elif name == "exp":
        outer = node
    elif name == "log":
        return _div_node(df, f)
    elif name == "sqrt":
        return _div_node(df, _mul(Const(2.0), node))
    elif name == "abs":
        outer = Call("sgn", f)
    elif name == "sgn":
        return ZERO
    elif name == "sinh":
        outer = Call("cosh", f)
    elif name == "cosh":
        outer = Call("sinh", f)
    elif name == "tanh":
        outer = _sub(ONE, _pow_node(node, Const(2.0)))
    else:
        raise TypeError(f"cannot differentiate function {name}")
    return _mul(outer, df)


@_d.register(SgnPow)
def _(node: SgnPow) -> Node:
    c = node.alpha
    return _mul(_mul(Const(c), _abspow_node(node.arg, c - 1.0)), _d(node.arg))


@_d.register(AbsPow)
def _(node: AbsPow) -> Node:
    c = node.power
    if c == 0:
        return ZERO
    inner = Call("sgn", node.arg) if c == 1 else SgnPow(node.arg, c - 1.0)
    return _mul(_mul(Const(c), inner), _d(node.arg))


def _abspow_node(arg: Node, c: float) -> Node:
    if c == 0:
        return ONE
    return AbsPow(arg, c)


def derive(expr: CoeffExpr) -> CoeffExpr:
    """Symbolic d/dx of ``expr``.

    d sgnpow(g, a) = a |g|^(a-1) g' and d abs(g) = sgn(g) g'; at g = 0 these
    use the value-0 convention (see :func:`kink_hit`).
    """
    return CoeffExpr(_d(expr.root))


def derive_n(expr: CoeffExpr, n: int) -> CoeffExpr:
    for _ in range(n):
        expr = derive(expr)
    return expr
