from hlpicone.picone.cases import FunctionInput, IdentityCase, bracket, rhs
from hlpicone.picone.identities import (
    Evaluation,
    binomial_weights,
    distinguished_index,
    evaluate_identity,
    inner_derivative,
    square,
)
from hlpicone.picone.kinds import (
    FLAG_VALUES,
    KIND_FLAGS,
    IdentityKind,
    default_variants,
    parse_variant_args,
    resolve_variants,
    variant_combinations,
)
from hlpicone.picone.sources import ExpressionSource, TrajectorySource
from hlpicone.picone.verify import MODES, IdentityReport, SweepResult, sweep_variants, verify
