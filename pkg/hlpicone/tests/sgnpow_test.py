import math
import unittest

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from hlpicone.errors import DomainError
from hlpicone.sgnpow import SignedPowerParam, abs_power, as_alpha, phi, phi_inv, q_form, signed_power

alphas = st.floats(min_value=0.2, max_value=5.0)
reals = st.floats(min_value=-1e3, max_value=1e3, allow_nan=False)


class TestSignedPower(unittest.TestCase):
    def test_values(self):
        for (s, c, expected) in [
            (2.0, 2.0, 4.0),
            (-2.0, 2.0, -4.0),
            (-8.0, 1 / 3, -2.0),
            (0.0, 0.5, 0.0),
            (0.0, -1.0, 0.0),
            (3.0, 1.0, 3.0),
        ]:
            self.assertAlmostEqual(signed_power(s, c), expected, places=12)

    def test_abs_power_at_zero(self):
        self.assertEqual(abs_power(0.0, 2.5), 0.0)
        self.assertEqual(abs_power(0.0, 0.0), 1.0)
        self.assertEqual(abs_power(-2.0, 0.0), 1.0)

    def test_arrays(self):
        s = np.array([-4.0, 0.0, 9.0])
        np.testing.assert_allclose(signed_power(s, 0.5), [-2.0, 0.0, 3.0])
        np.testing.assert_allclose(abs_power(s, 0.5), [2.0, 0.0, 3.0])
        self.assertIsInstance(signed_power(2.0, 3.0), float)

    def test_bad_alpha(self):
        for alpha in (0.0, -1.0, math.inf, math.nan):
            with self.assertRaises(DomainError):
                as_alpha(alpha)
        self.assertEqual(as_alpha(SignedPowerParam(2)), 2.0)

    def test_non_finite_argument(self):
        with self.assertRaises(DomainError):
            phi(2.0, math.nan)
        with self.assertRaises(DomainError):
            q_form(2.0, math.inf, 1.0)

    def test_q_form_linear_case(self):
        X, Y = np.array([1.0, -2.0, 0.5]), np.array([3.0, 0.5, 0.5])
        np.testing.assert_allclose(q_form(1.0, X, Y), (X - Y) ** 2, atol=1e-12)

    @given(alphas, reals)
    def test_phi_inverse(self, alpha, s):
        back = phi(alpha, phi_inv(alpha, s))
        self.assertAlmostEqual(back, s, delta=1e-9 * (1 + abs(s)))

    @given(alphas, reals)
    def test_phi_odd(self, alpha, s):
        self.assertEqual(phi(alpha, -s), -phi(alpha, s))

    @settings(max_examples=200, deadline=None)
    @given(alphas, st.floats(-10, 10), st.floats(-10, 10))
    def test_q_form_nonnegative(self, alpha, X, Y):
        value = q_form(alpha, X, Y)
        scale = 1 + abs(X) ** (alpha + 1) + abs(Y) ** (alpha + 1)
        self.assertGreaterEqual(value, -1e-10 * scale)

    def test_q_form_continuous_at_equality(self):
        # near Y = X the form behaves like alpha (alpha + 1) / 2 |X|^(alpha - 1) (Y - X)^2
        for alpha in (0.5, 1.0, 2.0, 3.0):
            for X in (-2.0, 0.5, 3.0):
                previous = math.inf
                for eps in (1e-2, 1e-3, 1e-4):
                    value = q_form(alpha, X, X + eps)
                    leading = 0.5 * alpha * (alpha + 1) * abs(X) ** (alpha - 1) * eps**2
                    self.assertGreaterEqual(value, -1e-12)
                    self.assertAlmostEqual(value, leading, delta=0.25 * leading + 1e-12, msg=f"{alpha} {X} {eps}")
                    self.assertLess(value, previous)
                    previous = value

    @given(alphas, st.floats(-10, 10))
    def test_q_form_vanishes_on_diagonal(self, alpha, X):
        self.assertAlmostEqual(q_form(alpha, X, X), 0.0, delta=1e-9 * (1 + abs(X) ** (alpha + 1)))


if __name__ == "__main__":
    unittest.main()
