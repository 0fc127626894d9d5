import math
import unittest

import numpy as np

from hlpicone.hlode import SecondOrderProblem, StepStats, Trajectory, integrate
from hlpicone.sturmlab import find_zeros, sign_changes


def table_trajectory(values, slopes):
    """A trajectory through given u values on [-1, 1] (p = 1, so y2 = u')."""
    problem = SecondOrderProblem("1", "0", 1.0, (-1.0, 1.0))
    xs = np.linspace(-1.0, 1.0, len(values))
    ys = np.column_stack([values, slopes])
    dys = np.column_stack([slopes, np.zeros(len(values))])
    return Trajectory(problem, xs, ys, dys, StepStats(len(xs) - 1, 0, 0.5, 0.5))


class TestZeros(unittest.TestCase):
    def test_sine_zeros(self):
        problem = SecondOrderProblem("1", "1", 1.0, (0.0, 2.5 * math.pi))
        traj = integrate(problem, [0.0, 1.0])
        zeros = find_zeros(traj)
        self.assertEqual(len(zeros), 2)
        self.assertAlmostEqual(zeros[0], math.pi, places=8)
        self.assertAlmostEqual(zeros[1], 2 * math.pi, places=8)
        self.assertEqual(zeros.first, zeros[0])
        self.assertEqual(zeros.count_in(0.0, 4.0), 1)
        self.assertEqual(zeros.to_dict()["component"], "u")

    def test_zeros_reevaluate_small(self):
        tol = 1e-10
        for (p, q, alpha, x1) in [("1", "1", 1.0, 10.0), ("1 + x", "4", 2.0, 8.0), ("2", "1 + x^2", 0.5, 8.0)]:
            traj = integrate(SecondOrderProblem(p, q, alpha, (0.0, x1)), [0.0, 1.0])
            zeros = find_zeros(traj, tol=tol)
            self.assertGreater(len(zeros), 1, p)
            umax = np.max(np.abs(traj.ys[:, 0]))
            values = traj.component_on("u", list(zeros))
            # brentq stops within tol of the root; |u'| bounds the value error
            slope = np.max(np.abs(traj.component_on("du", traj.xs)))
            self.assertTrue(np.all(np.abs(values) <= tol * max(umax, slope)), (p, values))

    def test_derivative_zeros(self):
        problem = SecondOrderProblem("1", "1", 1.0, (0.0, math.pi))
        zeros = find_zeros(integrate(problem, [0.0, 1.0]), component="du")
        self.assertEqual(len(zeros), 1)
        self.assertAlmostEqual(zeros[0], math.pi / 2, places=8)

    def test_exact_node_zero(self):
        xs = np.linspace(-1.0, 1.0, 5)
        zeros = find_zeros(table_trajectory(xs, np.ones(5)))
        self.assertEqual(list(zeros), [0.0])

    def test_tangential_zero_is_not_claimed(self):
        xs = np.linspace(-1.0, 1.0, 5)
        zeros = find_zeros(table_trajectory(xs**2, 2 * xs))
        self.assertEqual(len(zeros), 0)
        self.assertIsNone(zeros.first)

    def test_sign_changes(self):
        for (values, expected) in [
            ([1.0, 0.0, -1.0, 2.0], 2),
            ([0.0, 0.0], 0),
            ([1.0, 2.0, 3.0], 0),
            ([-1.0, 0.0, 0.0, -2.0], 0),
        ]:
            self.assertEqual(sign_changes(np.array(values)), expected)


if __name__ == "__main__":
    unittest.main()
