import math
import unittest

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from hlpicone.coeffexpr import can_kink, derive, derive_n, evaluate, evaluate_on, kink_hit, parse
from hlpicone.coeffexpr.nodes import BinOp, Call, CoeffExpr, Const, Neg, Var, tree_depth
from hlpicone.errors import DomainError

SMOOTH = [
    "x^3 - 2*x",
    "sin(x) * exp(-x)",
    "log(1 + x^2)",
    "sqrt(2 + x) / (3 + x^2)",
    "sgnpow(cos(x) + 2, 2.5)",
    "abspow(x + 3, 1.5)",
    "tanh(x) + cosh(x) - sinh(2*x)",
    "(1 + x^2)^(0.5 + 0.1*x)",
    "2^x",
]


def central(expr, x, h=1e-5):
    return (evaluate(expr, x + h) - evaluate(expr, x - h)) / (2 * h)


def smooth_trees(depth):
    # constants in (0, 1] bound depth-5 trees by 256 on [-1, 1]
    leaves = st.one_of(st.just(Var()), st.sampled_from([0.5, 1.0]).map(Const))
    if depth == 1:
        return leaves
    sub = smooth_trees(depth - 1)
    return st.one_of(
        leaves,
        sub.map(Neg),
        st.builds(BinOp, st.sampled_from(["+", "-", "*"]), sub, sub),
        sub.map(lambda t: BinOp("^", t, Const(2.0))),
        st.builds(Call, st.sampled_from(["sin", "cos", "tanh"]), sub),
    )


class TestDerive(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.exprs = [parse(text) for text in SMOOTH]
        cls.derivatives = [derive(e) for e in cls.exprs]

    def test_known(self):
        for (text, x, expected) in [
            ("x^3", 2.0, 12.0),
            ("sin(x)", 0.0, 1.0),
            ("exp(2*x)", 0.0, 2.0),
            ("1/x", 2.0, -0.25),
            ("sgnpow(x, 3)", -2.0, 12.0),
            ("abspow(x, 2)", -3.0, -6.0),
            ("7", 1.0, 0.0),
        ]:
            self.assertAlmostEqual(derive(parse(text))(x), expected, places=12, msg=text)

    @settings(deadline=None)
    @given(st.integers(min_value=0, max_value=len(SMOOTH) - 1), st.floats(min_value=-1.0, max_value=1.0))
    def test_against_finite_differences(self, k, x):
        exact = evaluate(self.derivatives[k], x)
        approx = central(self.exprs[k], x)
        self.assertAlmostEqual(exact, approx, delta=1e-5 * (1 + abs(exact)), msg=SMOOTH[k])

    @settings(max_examples=100, deadline=None)
    @given(smooth_trees(5), st.floats(min_value=-1.0, max_value=1.0))
    def test_random_expressions(self, root, x):
        expr = CoeffExpr(root)
        self.assertLessEqual(tree_depth(root), 5)
        exact = evaluate(derive(expr), x)
        approx = central(expr, x)
        scale = 1 + abs(exact) + abs(evaluate(expr, x))
        self.assertAlmostEqual(exact, approx, delta=1e-4 * scale, msg=str(expr))

    def test_higher_derivatives(self):
        u = parse("x^4")
        self.assertAlmostEqual(derive_n(u, 2)(1.5), 12 * 1.5**2, places=10)
        self.assertAlmostEqual(derive_n(u, 4)(0.3), 24.0, places=10)
        self.assertAlmostEqual(derive_n(parse("sin(x)"), 4)(0.4), math.sin(0.4), places=12)

    def test_kinks(self):
        d_abs = derive(parse("abs(x)"))
        self.assertTrue(can_kink(d_abs))
        self.assertTrue(kink_hit(d_abs, 0.0))
        self.assertFalse(kink_hit(d_abs, 0.5))
        self.assertEqual(d_abs(0.0), 0.0)
        self.assertFalse(can_kink(parse("sin(x) + x^2")))
        # d sgnpow(x, 0.5) = 0.5 |x|^(-0.5)
        d_root = derive(parse("sgnpow(x, 0.5)"))
        self.assertTrue(kink_hit(d_root, 0.0))
        self.assertEqual(d_root(0.0), 0.0)

    def test_evaluate_on(self):
        xs = np.linspace(0, 1, 5)
        np.testing.assert_allclose(evaluate_on(parse("x^2 + 1"), xs), xs**2 + 1)

    def test_library_errors_become_domain_errors(self):
        # exp overflows to inf and sin(inf) raises ValueError
        xs = np.linspace(0, 1, 3)
        for text in ("sin(exp(1000 + x))", "cos(x * exp(1000))"):
            with self.assertRaises(DomainError, msg=text):
                evaluate_on(parse(text), xs)
            with self.assertRaises(DomainError, msg=text):
                parse(text)(0.5)


if __name__ == "__main__":
    unittest.main()
