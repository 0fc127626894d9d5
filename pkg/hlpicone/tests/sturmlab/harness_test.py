import math
import os
import tempfile
import unittest

import numpy as np

from hlpicone.errors import PreconditionError, VariantError
from hlpicone.hlode import FourthOrderProblem, SecondOrderProblem, integrate
from hlpicone.sturmlab import (
    Theorem,
    TheoremCase,
    Verdict,
    check_hypotheses,
    constant_multiple,
    eigen_shoot_4th_clamped,
    manufacture_case,
    shifted,
    verify_conclusion,
)

UNIT = (0.0, 1.0)


def second(q, interval=(0.0, math.pi)):
    return SecondOrderProblem("1", q, 1.0, interval)


class TestTheorem(unittest.TestCase):
    def test_parse(self):
        for (text, expected) in [("1", Theorem.T1), ("2", Theorem.T2), ("c3", Theorem.C3), ("T2", Theorem.T2)]:
            self.assertIs(Theorem.parse(text), expected)
        with self.assertRaises(VariantError):
            Theorem.parse("3")
        self.assertEqual(Theorem.C3.order, 2)
        self.assertEqual(Theorem.T1.order, 4)

    def test_constant_multiple(self):
        xs = np.linspace(0, math.pi, 101)
        ratio, spread = constant_multiple(np.sin(xs), -3 * np.sin(xs))
        self.assertAlmostEqual(ratio, -3.0)
        self.assertLess(spread, 1e-12)
        _, spread = constant_multiple(np.sin(xs), np.cos(xs))
        self.assertGreater(spread, 1.0)


class TestThreeEquations(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.sine = integrate(second("1"), [0.0, 1.0])

    def test_sturm(self):
        case = TheoremCase("c3", self.sine, [second("4"), second("4")], samples=32, seed=0)
        self.assertTrue(check_hypotheses(case).holds)
        report = verify_conclusion(case)
        self.assertEqual(report.summary()[Verdict.ZERO_FOUND.value], 32)
        self.assertTrue(report.passed)
        self.assertEqual([s.equation for s in report.samples[:4]], ["u1", "u3", "u1", "u3"])
        for sample in report.samples:
            self.assertTrue(0.0 <= sample.zero <= math.pi)

    def test_workers_do_not_change_results(self):
        comparisons = [second("4"), second("2 + x")]
        serial = verify_conclusion(TheoremCase("c3", self.sine, comparisons, samples=12, seed=5))
        pooled = verify_conclusion(TheoremCase("c3", self.sine, comparisons, samples=12, seed=5, num_workers=3))
        self.assertEqual(
            [(s.verdict, s.zero) for s in serial.samples], [(s.verdict, s.zero) for s in pooled.samples]
        )

    def test_violated_hypotheses_give_counterexamples(self):
        case = TheoremCase("c3", self.sine, [second("0.1"), second("0.1")], samples=16, seed=0)
        hypotheses = check_hypotheses(case)
        self.assertFalse(hypotheses.holds)
        failed = [r.name for r in hypotheses.results if not r.holds]
        self.assertEqual(failed, ["q2 <= (q1 + q3)/2"])
        with tempfile.TemporaryDirectory() as tmpdir:
            report = verify_conclusion(case, dump_dir=tmpdir)
            self.assertFalse(report.passed)
            self.assertGreater(len(report.counterexamples), 0)
            for sample in report.counterexamples:
                self.assertTrue(os.path.exists(sample.trajectory_csv))
                self.assertTrue(os.path.basename(sample.trajectory_csv).startswith("c3_counterexample_"))

    def test_boundary_check(self):
        cosine = integrate(second("1"), [1.0, 0.0])
        with self.assertRaises(PreconditionError):
            TheoremCase("c3", cosine, [second("4"), second("4")])

    def test_equation_count(self):
        with self.assertRaises(PreconditionError):
            TheoremCase("c3", self.sine, [second("4")])
        with self.assertRaises(PreconditionError):
            manufacture_case("c3", [second("4"), second("1")])


class TestFourthOrder(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.beam = eigen_shoot_4th_clamped("1", "0", 1.0, UNIT)
        cls.u_problem = cls.beam.trajectory.problem

    def case(self, theorem, v_problem, **kwargs):
        return TheoremCase(theorem, self.beam.trajectory, [v_problem], eigen=self.beam, **kwargs)

    def test_hypotheses(self):
        v = FourthOrderProblem("0.5", "0", "-1000", 1.0, UNIT)
        report = check_hypotheses(self.case("1", v))
        self.assertTrue(report.holds)
        self.assertEqual([r.name for r in report.results], ["0 <= A", "A <= a", "0 <= B", "B <= b", "C <= c"])
        t2 = check_hypotheses(self.case("2", v))
        self.assertNotIn("0 <= B", [r.name for r in t2.results])

    def test_violation_is_located(self):
        v = FourthOrderProblem("1 + x^2", "0", "-1000", 1.0, UNIT)
        report = check_hypotheses(self.case("1", v))
        self.assertFalse(report.holds)
        failed = {r.name: r for r in report.results if not r.holds}
        self.assertEqual(list(failed), ["A <= a"])
        self.assertGreater(failed["A <= a"].first_violation, 0.0)
        self.assertLess(failed["A <= a"].first_violation, 1e-3)
        self.assertAlmostEqual(failed["A <= a"].min_margin, -1.0, places=12)

    def test_identical_equation(self):
        case = self.case("1", self.u_problem, samples=8, proportional_samples=4)
        report = verify_conclusion(case)
        self.assertEqual(report.summary()[Verdict.CONSTANT_MULTIPLE.value], 4)
        self.assertEqual(report.counterexamples, [])
        for sample in report.samples[8:]:
            self.assertEqual(sample.verdict, Verdict.CONSTANT_MULTIPLE)
        self.assertEqual([s.ratio for s in report.samples[8:]], [0.5, -1.0, 2.0, -4.0])

    def test_side_condition_met(self):
        # v = sin(5x + 0.3) solves v'''' = 625 v and vanishes once on [0, 1]
        v = FourthOrderProblem("1", "0", "-625", 1.0, UNIT)
        s, c = math.sin(0.3), math.cos(0.3)
        state = [s, 5 * c, -25 * s, -125 * c]
        for theorem in ("1", "2"):
            report = verify_conclusion(self.case(theorem, v, samples=0, extra_states=[state]))
            self.assertTrue(report.hypotheses.holds, theorem)
            (sample,) = report.samples
            self.assertEqual(sample.verdict, Verdict.ZERO_FOUND, theorem)
            self.assertGreater(sample.condition_min, 0.0, theorem)
            self.assertAlmostEqual(sample.zero, (math.pi - 0.3) / 5, delta=1e-6)
            self.assertEqual(sample.zero_count, 1)
        with self.assertRaises(PreconditionError):
            self.case("1", v, extra_states=[[1.0, 0.0]])

    def test_shifted_equation_matches(self):
        v = shifted(FourthOrderProblem("1", "0", "0", 1.0, UNIT), self.beam.eigenvalue)
        self.assertEqual(v, self.u_problem)

    def test_condition_power(self):
        with self.assertRaises(VariantError):
            self.case("2", self.u_problem, condition_power="squared")

    def test_clamped_boundary_required(self):
        traj = integrate(FourthOrderProblem("1", "0", "0", 1.0, UNIT), [0.0, 0.0, 0.0, 6.0])
        with self.assertRaises(PreconditionError):
            TheoremCase("1", traj, [self.u_problem])


class TestManufactured(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.problems = [
            FourthOrderProblem("1", "1", "0", 1.0, UNIT),
            FourthOrderProblem("0.5", "0.5", "-1000", 1.0, UNIT),
        ]
        cls.base = manufacture_case("1", cls.problems, samples=8)

    def test_no_counterexamples(self):
        self.assertTrue(check_hypotheses(self.base).holds)
        for seed in (1, 2, 3):
            for theorem in ("1", "2"):
                case = TheoremCase(
                    theorem,
                    self.base.solution,
                    self.base.comparisons,
                    samples=8,
                    seed=seed,
                    eigen=self.base.eigen,
                )
                report = verify_conclusion(case)
                self.assertEqual(report.counterexamples, [], f"theorem {theorem}, seed {seed}")
                self.assertEqual(len(report.samples), 8)

    def test_report(self):
        report = verify_conclusion(self.base).to_dict()
        self.assertEqual(report["theorem"], "T1")
        self.assertEqual(report["sample_count"], 8)
        self.assertGreater(report["eigenvalue"], 500.0)
        self.assertIsNone(report["condition_power"])
        self.assertEqual(set(report["summary"]), {v.value for v in Verdict})

    def test_sample_states_are_seeded(self):
        first = [s["initial"] for s in self.base.sample_states()]
        again = [s["initial"] for s in self.base.sample_states()]
        np.testing.assert_array_equal(np.array(first), np.array(again))
        for z in first:
            self.assertTrue(math.isclose(np.linalg.norm(z), 1.0) or math.isclose(np.linalg.norm(z), 10.0))


if __name__ == "__main__":
    unittest.main()
