"""Exact computations in the algebra of sequences of locally constant functions
modulo sequences that eventually vanish on every compact set."""

from .constructions import (
    InvalidPhi,
    NotRepresentable,
    PreconditionViolated,
    SeparationReport,
    counterexample_family,
    counterexample_report,
    delta_embedding,
    phi_delta,
    separation_report,
    stripped_ball_family,
    witness_x0,
)
from .egorov import (
    GeneralizedFunction,
    MalformedCertificate,
    NotCompactlySupported,
    eval_at_gpoint,
    gf_equal,
    is_negligible_global,
    is_negligible_on,
    point_value,
    refutation_to_gpoint,
)
from .exact_numbers import (
    GAUSSIAN,
    RATIONAL,
    GaussianRational,
    IntMod,
    IntModRing,
    MixedRings,
    NonPrime,
    digit_truncate,
    valuation,
)
from .generalized import (
    PointFamily,
    Proved,
    Refuted,
    ScalarFamily,
    Schedule,
    Unknown,
    constant_point,
    gpoint_equiv,
    is_compactly_supported,
    monomial_point,
    scalar_equal,
    scalar_is_zero,
)
from .sequences import (
    Constant,
    ExplicitThen,
    IntegerMap,
    MonomialIndicator,
    Neg,
    Prod,
    Sum,
    family_from_json,
    family_to_json,
    normalize_family,
    nth,
    term_value,
    validate_phi,
)
from .spaces import Ball, FiniteDiscreteSpace, QpSpace, ball_relation, in_ball, split_ball
from .step_functions import StepFunction, add, char_fn, constancy_exponent, evaluate, mul, restrict
