import unittest

from hlpicone.errors import VariantError
from hlpicone.picone import (
    IdentityKind,
    default_variants,
    parse_variant_args,
    resolve_variants,
    variant_combinations,
)


class TestIdentityKind(unittest.TestCase):
    def test_parse(self):
        for (text, expected) in [
            ("1.6", IdentityKind.P16),
            ("p26", IdentityKind.P26),
            ("P13", IdentityKind.P13),
            (" 2.4 ", IdentityKind.P24),
        ]:
            self.assertIs(IdentityKind.parse(text), expected)
        with self.assertRaises(VariantError):
            IdentityKind.parse("9.9")

    def test_properties(self):
        self.assertEqual(IdentityKind.P23.cli_name, "2.3")
        self.assertEqual(IdentityKind.P24.order, 4)
        self.assertEqual(IdentityKind.P26.order, 2)


class TestVariants(unittest.TestCase):
    def test_defaults(self):
        self.assertEqual(default_variants(IdentityKind.P13), {})
        self.assertEqual(default_variants(IdentityKind.P16), {"bracket_power": "corrected"})
        self.assertEqual(
            default_variants(IdentityKind.P24),
            {
                "middle_term": "first_derivative",
                "bracket_power": "corrected",
                "condition_power": "corrected",
                "p24_second_bracket": "plain",
            },
        )

    def test_resolve(self):
        resolved = resolve_variants(IdentityKind.P26, {"distinguished_index": "n"})
        self.assertEqual(resolved, {"distinguished_index": "n"})
        for variants in (
            {"no_such_flag": "x"},
            {"inner_phi": "ratio"},
            {"bracket_power": "squared"},
        ):
            with self.assertRaises(VariantError, msg=str(variants)):
                resolve_variants(IdentityKind.P16, variants)

    def test_combinations(self):
        self.assertEqual(list(variant_combinations(IdentityKind.P13)), [{}])
        combinations = list(variant_combinations(IdentityKind.P24))
        self.assertEqual(len(combinations), 16)
        self.assertEqual(combinations[0], default_variants(IdentityKind.P24))
        self.assertEqual(len({tuple(sorted(c.items())) for c in combinations}), 16)

    def test_parse_args(self):
        self.assertEqual(
            parse_variant_args(["bracket_power=as_printed", " inner_phi = split "]),
            {"bracket_power": "as_printed", "inner_phi": "split"},
        )
        self.assertEqual(parse_variant_args(None), {})
        for item in ("bracket_power", "=x", "k="):
            with self.assertRaises(VariantError):
                parse_variant_args([item])


if __name__ == "__main__":
    unittest.main()
