"""Variational Bewley preferences: dominance, aggregation audits and witnesses."""

from .audit import (
    ConditionReport,
    ConditionViolation,
    NoDecomposition,
    UtilitarianDecomposition,
    check_corollary1,
    check_corollary2,
    check_prop1,
    check_prop2,
    check_prop3_liberalism,
    check_theorem1_condition,
    decompose_utility,
    diversity_check,
    polytope_contained,
)
from .lp import EPS_FEAS, EPS_GAP, LinearProgram, LpOutcome, Status, minimize, solve
from .model import (
    Act,
    AffineUtility,
    PerceptionFunction,
    Polyhedron,
    Preference,
    Prior,
    Profile,
    ProfileError,
    ValidationError,
    make_profile,
    validate_profile,
)
from .preference import EPS_DEC, Relation, compare, dominance, relation
from .witness import ParetoWitness, SeparationCertificate, build_separation, construct_witness, forge

__version__ = "0.1.0"
