import json
import math
import os
import tempfile
import unittest

import numpy as np

from hlpicone.errors import VariantError
from hlpicone.hlode import FourthOrderProblem, SecondOrderProblem
from hlpicone.picone import IdentityCase, IdentityKind, default_variants, sweep_variants, verify
from hlpicone.picone.verify import central_difference, runs_of
from hlpicone.utils.report_io import dumps_report


class TestHelpers(unittest.TestCase):
    def test_runs(self):
        mask = np.array([True, True, False, True, False, False, True, True, True])
        self.assertEqual(runs_of(mask), [(0, 1), (3, 3), (6, 8)])
        self.assertEqual(runs_of(np.zeros(3, dtype=bool)), [])

    def test_central_difference(self):
        xs = np.linspace(0, 1, 11)
        d = central_difference(xs**3, xs[1] - xs[0])
        self.assertTrue(np.all(np.isnan(d[:2])) and np.all(np.isnan(d[-2:])))
        # exact for polynomials up to degree 4
        np.testing.assert_allclose(d[2:-2], 3 * xs[2:-2] ** 2, rtol=1e-12)


class TestFourthOrderSweep(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        problems = [
            FourthOrderProblem("2", "1 + x", "1", 0.5, (0.0, 1.0)),
            FourthOrderProblem("1", "0.5", "0", 0.5, (0.0, 1.0)),
        ]
        cls.case = IdentityCase("2.4", problems, ["exp(x) + x", "exp(0.5*x) + 2"], grid=801)
        cls.sweep = sweep_variants(cls.case, threshold=1e-5)

    def test_default_reading_passes(self):
        self.assertEqual(len(self.sweep.reports), 16)
        self.assertIn(default_variants(IdentityKind.P24), self.sweep.passing)
        self.assertLess(len(self.sweep.passing), 16)

    def test_bracket_power_matters(self):
        for report in self.sweep.reports:
            if report.variant["bracket_power"] == "as_printed":
                self.assertFalse(report.passes(1e-5), report.variant)

    def test_report_dict(self):
        d = self.sweep.to_dict()
        self.assertEqual(d["kind"], "P24")
        self.assertEqual(d["mode"], "both")
        self.assertEqual(len(d["reports"]), 16)
        first = d["reports"][0]
        self.assertEqual(first["identity"], "2.4")
        self.assertEqual(first["grid_n"], 801)
        self.assertEqual(sorted(first["deltas"]), ["dv", "v"])

    def test_bad_mode(self):
        with self.assertRaises(VariantError):
            sweep_variants(self.case, mode="sideways")


class TestReport(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        problems = [
            SecondOrderProblem("1 + x", "1", 1.0, (0.0, 1.0)),
            SecondOrderProblem("1", "1", 1.0, (0.0, 1.0)),
        ]
        cls.case = IdentityCase("1.6", problems, [[0.0, 1.0], [1.0, 0.0]], grid=401)
        cls.report = verify(cls.case)

    def test_modes(self):
        report = self.report
        self.assertEqual(report.residual("diff"), report.residual_diff)
        self.assertEqual(report.residual("int"), report.residual_int)
        self.assertEqual(report.residual(), max(report.residual_diff, report.residual_int))
        self.assertTrue(report.passes(1e-5, "diff"))
        self.assertGreaterEqual(report.scale, 1.0)
        self.assertEqual(report.excluded, [])

    def test_samples_csv(self):
        with tempfile.TemporaryDirectory() as tmpdir:
            path = os.path.join(tmpdir, "samples.csv")
            self.report.write_samples_csv(path)
            with open(path) as f:
                self.assertEqual(f.readline().strip(), "x,F,dF,R,admissible")
            table = np.genfromtxt(path, delimiter=",", skip_header=1)
            self.assertEqual(table.shape, (401, 5))
            self.assertEqual(self.report.to_dict()["samples_csv_path"], path)

    def test_no_differential_verdict(self):
        # v vanishes at the middle grid point, leaving two runs of 4 points
        problems = [
            SecondOrderProblem("1 + x", "1", 1.0, (0.0, 1.0)),
            SecondOrderProblem("1", "1", 1.0, (0.0, 1.0)),
        ]
        case = IdentityCase("1.6", problems, ["1 + x", "(x - 0.5)^2"], grid=9)
        report = verify(case)
        self.assertEqual(report.excluded, [[0.5, 0.5]])
        self.assertTrue(math.isnan(report.residual_diff))
        self.assertTrue(math.isfinite(report.residual_int))
        self.assertFalse(report.passed_diff)
        self.assertTrue(math.isnan(report.residual()))
        for mode in ("diff", "both"):
            self.assertFalse(report.passes(1.0, mode), mode)
        self.assertIsNone(json.loads(dumps_report(report))["residual_diff"])

    def test_repeatable(self):
        again = verify(self.case)
        self.assertEqual(again.residual_diff, self.report.residual_diff)
        self.assertEqual(again.residual_int, self.report.residual_int)


if __name__ == "__main__":
    unittest.main()
