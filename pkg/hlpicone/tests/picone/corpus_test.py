import unittest
from pathlib import Path

from hlpicone.config import load_problem_file, parse_problem
from hlpicone.picone import FunctionInput, IdentityCase, default_variants, verify

PROBLEMS = Path(__file__).resolve().parents[3] / "problems"

# (file, alpha); every file carries a fourth-order pair and its two inputs
FOURTH_ORDER = [
    ("fourth_traj_linear.json", 1.0),
    ("fourth_traj_alpha2.json", 2.0),
    ("fourth_traj_alpha2_potential.json", 2.0),
    ("fourth_traj_alpha_half.json", 0.5),
    ("fourth_traj_alpha_half_potential.json", 0.5),
    ("p23_alpha2.json", 2.0),
    ("p24_alpha_half.json", 0.5),
]

# files whose u-equation has a non-constant b
VARIABLE_B = ["fourth_traj_alpha2.json", "fourth_traj_alpha_half.json"]


def load_case(name, kind, variants=None):
    parsed = parse_problem(load_problem_file(PROBLEMS / name))
    inputs = []
    for k in ("u", "v"):
        if parsed.functions[k] is not None:
            inputs.append(FunctionInput(expr=parsed.functions[k]))
        else:
            inputs.append(FunctionInput(initial=tuple(parsed.initial[k])))
    return IdentityCase(kind, [parsed.problem(), parsed.second_problem()], inputs, variants=variants)


class TestFourthOrderCorpus(unittest.TestCase):
    def test_trajectory_inputs_cover_each_alpha(self):
        alphas = []
        for (name, alpha) in FOURTH_ORDER:
            case = load_case(name, "2.3")
            if all(given.is_solution for given in case.inputs):
                alphas.append(alpha)
        self.assertGreaterEqual(len(alphas), 5)
        self.assertEqual(set(alphas), {0.5, 1.0, 2.0})

    def test_default_reading_passes(self):
        for (name, alpha) in FOURTH_ORDER:
            for kind in ("2.3", "2.4"):
                case = load_case(name, kind)
                self.assertEqual(case.alpha, alpha, name)
                self.assertEqual(case.variants, default_variants(case.kind), name)
                report = verify(case)
                self.assertTrue(report.passes(1e-5), f"{kind} {name}: {report.residual():.3e}")
                self.assertLessEqual(report.residual("diff"), 1e-6, f"{kind} {name}")
                self.assertEqual(report.excluded, [], f"{kind} {name}")

    def test_printed_middle_term_breaks_variable_b(self):
        for name in VARIABLE_B:
            for kind in ("2.3", "2.4"):
                case = load_case(name, kind)
                self.assertTrue(verify(case).passes(1e-5), f"{kind} {name}")
                printed = verify(case.with_variants({"middle_term": "as_printed_second_derivative"}))
                self.assertFalse(printed.passes(1e-5), f"{kind} {name}")


if __name__ == "__main__":
    unittest.main()
