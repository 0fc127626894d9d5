"""
Identity kinds and the transcription-variant flags each kind owns.

Every flag defaults to the self-consistent reading; the other values
reproduce the formulas exactly as they are printed.
"""

import enum
import itertools
from typing import Dict, Iterator, Mapping, Optional, Tuple

from hlpicone.coeffexpr import MiddleTerm
from hlpicone.errors import VariantError


class IdentityKind(str, enum.Enum):
    P13 = "P13"
    P16 = "P16"
    P23 = "P23"
    P24 = "P24"
    P26 = "P26"

    @classmethod
    def parse(cls, text: str) -> "IdentityKind":
        """Accept "P16", "p16" or the command-line form "1.6"."""
        tag = str(text).strip().upper().replace(".", "")
        if not tag.startswith("P"):
            tag = "P" + tag
        try:
            return cls(tag)
        except ValueError:
            known = ", ".join(k.cli_name for k in cls)
            raise VariantError(f"unknown identity {text!r}; known: {known}") from None

    @property
    def cli_name(self) -> str:
        return f"{self.value[1]}.{self.value[2]}"

    @property
    def order(self) -> int:
        return 4 if self in (IdentityKind.P23, IdentityKind.P24) else 2


# flag -> (allowed values, default first)
FLAG_VALUES: Dict[str, Tuple[str, ...]] = {
    "bracket_power": ("corrected", "as_printed"),
    "middle_term": tuple(m.value for m in MiddleTerm),
    "condition_power": ("corrected", "as_printed"),
    "inner_phi": ("ratio", "split"),
    "p24_second_bracket": ("plain", "as_printed"),
    "distinguished_index": ("n_minus_1", "n"),
}

KIND_FLAGS: Dict[IdentityKind, Tuple[str, ...]] = {
    IdentityKind.P13: (),
    IdentityKind.P16: ("bracket_power",),
    IdentityKind.P23: ("middle_term", "inner_phi"),
    IdentityKind.P24: ("middle_term", "bracket_power", "condition_power", "p24_second_bracket"),
    IdentityKind.P26: ("distinguished_index",),
}


def default_variants(kind: IdentityKind) -> Dict[str, str]:
    return {flag: FLAG_VALUES[flag][0] for flag in KIND_FLAGS[kind]}


def resolve_variants(kind: IdentityKind, variants: Optional[Mapping[str, str]] = None) -> Dict[str, str]:
    """Full flag assignment for ``kind``; rejects flags the kind does not own."""
    resolved = default_variants(kind)
    for flag, value in (variants or {}).items():
        if flag not in FLAG_VALUES:
            raise VariantError(f"unknown variant flag {flag!r}")
        if flag not in KIND_FLAGS[kind]:
            owned = ", ".join(KIND_FLAGS[kind]) or "none"
            raise VariantError(f"flag {flag!r} does not apply to {kind.value} (its flags: {owned})")
        if value not in FLAG_VALUES[flag]:
            raise VariantError(
                f"flag {flag!r} takes one of {', '.join(FLAG_VALUES[flag])}, got {value!r}"
            )
        resolved[flag] = value
    return resolved


def variant_combinations(kind: IdentityKind) -> Iterator[Dict[str, str]]:
    flags = KIND_FLAGS[kind]
    for values in itertools.product(*(FLAG_VALUES[f] for f in flags)):
        yield dict(zip(flags, values))


def parse_variant_args(items) -> Dict[str, str]:
    """["k=v", ...] from the command line."""
    out = {}
    for item in items or ():
        key, sep, value = item.partition("=")
        if not sep or not key or not value:
            raise VariantError(f"variant must look like KEY=VALUE, got {item!r}")
        out[key.strip()] = value.strip()
    return out
