import contextlib
import io
import json
import math
import os
import tempfile
import unittest
from pathlib import Path

from hlpicone.bin.hlpicone import (
    EXIT_FAILED,
    EXIT_HYPOTHESES,
    EXIT_INPUT,
    EXIT_OK,
    get_parser,
    main,
)

PROBLEMS = Path(__file__).resolve().parents[3] / "problems"


def run(*argv):
    """(exit code, standard output) of one command line."""
    out = io.StringIO()
    with contextlib.redirect_stdout(out), contextlib.redirect_stderr(io.StringIO()):
        code = main([str(a) for a in argv])
    return code, out.getvalue()


class TestCli(unittest.TestCase):
    def setUp(self):
        self._tmp = tempfile.TemporaryDirectory()
        self.tmpdir = Path(self._tmp.name)

    def tearDown(self):
        self._tmp.cleanup()

    def write_problem(self, doc):
        path = self.tmpdir / "problem.json"
        path.write_text(json.dumps(doc))
        return path

    def test_parser(self):
        args = get_parser().parse_args(["compare", "--problem", "p.json", "--theorem", "c3", "--grid", "11"])
        self.assertEqual(args.hypothesis_grid, 11)
        self.assertEqual(args.dump_dir, Path("counterexamples"))
        with self.assertRaises(SystemExit):
            get_parser().parse_args(["verify", "--problem", "p.json"])

    def test_solve(self):
        csv = self.tmpdir / "u.csv"
        code, out = run("solve", "--problem", PROBLEMS / "sine.json", "--csv", csv)
        self.assertEqual(code, EXIT_OK)
        report = json.loads(out)
        self.assertEqual(report["command"], "solve")
        final = report["trajectories"][0]["final"]
        self.assertAlmostEqual(final[0], 0.0, places=8)
        self.assertAlmostEqual(final[1], -1.0, places=8)
        with open(csv) as f:
            self.assertEqual(f.readline().strip(), "x,y1,y2,u,du,p_phi_du")

    def test_solve_pair(self):
        csv = self.tmpdir / "u.csv"
        code, out = run("solve", "--problem", PROBLEMS / "p16_alpha2.json", "--csv", csv, "--grid", 101)
        self.assertEqual(code, EXIT_OK)
        names = [t["name"] for t in json.loads(out)["trajectories"]]
        self.assertEqual(names, ["u", "v"])
        self.assertTrue((self.tmpdir / "u_v.csv").exists())

    def test_verify(self):
        for (name, identity, extra) in [
            ("p13_linear.json", "1.3", []),
            ("p16_alpha2.json", "1.6", []),
            ("p16_expressions.json", "1.6", []),
            ("p23_alpha2.json", "2.3", ["--grid", 801]),
            ("p26_n2.json", "2.6", []),
            ("p26_n3.json", "2.6", ["--variant", "distinguished_index=n"]),
        ]:
            code, out = run("verify", "--problem", PROBLEMS / name, "--identity", identity, *extra)
            self.assertEqual(code, EXIT_OK, name)
            self.assertTrue(json.loads(out)["passed"], name)

    def test_verify_variant_fails(self):
        code, out = run(
            "verify",
            "--problem",
            PROBLEMS / "p16_alpha2.json",
            "--identity",
            "1.6",
            "--variant",
            "bracket_power=as_printed",
        )
        self.assertEqual(code, EXIT_FAILED)
        self.assertFalse(json.loads(out)["passed"])

    def test_sweep(self):
        code, out = run(
            "verify", "--problem", PROBLEMS / "p24_alpha_half.json", "--identity", "2.4", "--sweep", "--grid", 401
        )
        self.assertEqual(code, EXIT_OK)
        sweep = json.loads(out)["sweep"]
        self.assertEqual(len(sweep["reports"]), 16)
        self.assertGreater(len(sweep["passing"]), 0)

    def test_deterministic_reports(self):
        paths = [self.tmpdir / "a.json", self.tmpdir / "b.json"]
        for path in paths:
            code, _ = run("verify", "--problem", PROBLEMS / "p16_alpha2.json", "--identity", "1.6", "--out", path)
            self.assertEqual(code, EXIT_OK)
        self.assertEqual(paths[0].read_bytes(), paths[1].read_bytes())

    def test_compare(self):
        dump = self.tmpdir / "dump"
        code, out = run(
            "compare", "--problem", PROBLEMS / "c3_sturm.json", "--theorem", "c3", "--samples", 8, "--dump-dir", dump
        )
        self.assertEqual(code, EXIT_OK)
        report = json.loads(out)["report"]
        self.assertEqual(report["summary"]["zero_found"], 8)
        self.assertEqual(os.listdir(dump), [])

    def test_compare_hypotheses_violated(self):
        code, out = run(
            "compare", "--problem", PROBLEMS / "t1_violation.json", "--theorem", "1", "--dump-dir", self.tmpdir
        )
        self.assertEqual(code, EXIT_HYPOTHESES)
        self.assertFalse(json.loads(out)["report"]["hypotheses"]["holds"])

    def test_eigen(self):
        out_path = self.tmpdir / "eigen.json"
        code, out = run("eigen", "--problem", PROBLEMS / "eigen_dirichlet.json", "--out", out_path)
        self.assertEqual(code, EXIT_OK)
        self.assertAlmostEqual(float(out.strip()), math.pi**2, delta=1e-6)
        report = json.loads(out_path.read_text())
        self.assertEqual(report["mode"], "dirichlet")

    def test_solve_fourth_order(self):
        code, out = run("solve", "--problem", PROBLEMS / "cubic_fourth.json")
        self.assertEqual(code, EXIT_OK)
        final = json.loads(out)["trajectories"][0]["final"]
        # u = x^3: (u, u', u'', u''') = (1, 3, 6, 6) at x = 1
        for (value, expected) in zip(final, [1.0, 3.0, 6.0, 6.0]):
            self.assertAlmostEqual(value, expected, places=8)

    def test_verify_fourth_order(self):
        code, out = run("verify", "--problem", PROBLEMS / "p24_alpha_half.json", "--identity", "2.4")
        self.assertEqual(code, EXIT_OK)
        report = json.loads(out)
        self.assertTrue(report["passed"])
        self.assertEqual(report["report"]["identity"], "2.4")
        self.assertLessEqual(report["report"]["residual_diff"], 1e-5)

    def test_verify_two_solution_note(self):
        code, out = run("verify", "--problem", PROBLEMS / "p26_n2.json", "--identity", "2.6")
        self.assertEqual(code, EXIT_OK)
        notes = json.loads(out)["report"]["notes"]
        self.assertTrue(any(note.startswith("N=2:") for note in notes), notes)

    def test_compare_fourth_order(self):
        for (name, theorem) in [
            ("t1_manufactured.json", "1"),
            ("t2_manufactured.json", "2"),
            ("t1_zero_found.json", "1"),
            ("t1_zero_found.json", "2"),
        ]:
            code, out = run(
                "compare", "--problem", PROBLEMS / name, "--theorem", theorem, "--dump-dir", self.tmpdir
            )
            self.assertEqual(code, EXIT_OK, name)
            report = json.loads(out)["report"]
            self.assertTrue(report["hypotheses"]["holds"], name)
            self.assertEqual(report["summary"]["counterexample"], 0, name)
            for (key, residual) in report["boundary_residuals"].items():
                self.assertLessEqual(residual, 1e-6, f"{name} {key}")
            if name == "t1_zero_found.json":
                self.assertEqual(report["summary"]["zero_found"], 1, theorem)

    def test_eigen_clamped(self):
        code, out = run("eigen", "--problem", PROBLEMS / "eigen_clamped.json", "--order", 4)
        self.assertEqual(code, EXIT_OK)
        self.assertAlmostEqual(float(out.strip()), 500.5639, delta=1e-2)

    def test_input_errors(self):
        bad_expression = self.write_problem(
            {"alpha": 1, "interval": [0, 1], "coefficients": {"p": "2*", "q": "1"}}
        )
        no_interval = self.tmpdir / "no_interval.json"
        no_interval.write_text(json.dumps({"alpha": 1, "coefficients": {"p": "1", "q": "1"}}))
        for argv in [
            ("solve", "--problem", bad_expression),
            ("solve", "--problem", no_interval),
            ("solve", "--problem", self.tmpdir / "missing.json"),
            ("verify", "--problem", PROBLEMS / "p16_alpha2.json", "--identity", "1.6", "--variant", "inner_phi=split"),
            ("verify", "--problem", PROBLEMS / "p16_alpha2.json", "--identity", "7.7"),
            ("verify", "--problem", PROBLEMS / "p26_n2.json", "--identity", "1.6"),
            ("compare", "--problem", PROBLEMS / "sine.json", "--theorem", "1"),
            ("eigen", "--problem", PROBLEMS / "sine.json", "--order", 4),
            ("solve", "--problem", PROBLEMS / "sine.json", "--log-level", "chatty"),
        ]:
            code, _ = run(*argv)
            self.assertEqual(code, EXIT_INPUT, argv)

    def test_members_of_the_other_order(self):
        path = self.write_problem(
            {
                "alpha": 1,
                "interval": [0, 1],
                "order": "second",
                "coefficients": {"p": "1", "q": "1", "a": "5", "c": "7"},
                "initial": {"u": [0, 1]},
            }
        )
        code, _ = run("solve", "--problem", path)
        self.assertEqual(code, EXIT_INPUT)

    def test_coefficient_domain_errors(self):
        # log of a negative x and sin of an overflowed exp both fail while integrating
        for q in ("log(x)", "sin(exp(1000 + x))"):
            path = self.write_problem(
                {"alpha": 1, "interval": [-1, 1], "coefficients": {"p": "1", "q": q}, "initial": {"u": [0, 1]}}
            )
            code, _ = run("solve", "--problem", path)
            self.assertEqual(code, EXIT_INPUT, q)


if __name__ == "__main__":
    unittest.main()
