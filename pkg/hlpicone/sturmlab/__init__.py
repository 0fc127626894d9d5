from hlpicone.sturmlab.harness import (
    ComparisonReport,
    HypothesisReport,
    HypothesisResult,
    Inequality,
    SampleResult,
    Theorem,
    TheoremCase,
    Verdict,
    check_hypotheses,
    constant_multiple,
    manufacture_case,
    shifted,
    verify_conclusion,
)
from hlpicone.sturmlab.shooting import (
    EigenResult,
    eigen_shoot_2nd,
    eigen_shoot_4th_clamped,
    generalized_pi,
)
from hlpicone.sturmlab.zeros import ZeroSet, find_zeros, sign_changes
