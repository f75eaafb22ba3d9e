"""Reserve-based seat allocation with de-reservation.

Choice rules (India Reserves, Backward Transfers), clearinghouse mechanisms
(DA, multi-run DA, DA-BT), axiom audits and brute-force oracles.
"""
from .audit import (
    AuditReport,
    Witness,
    check_choice_axioms,
    check_individual_rationality,
    check_meritocracy,
    check_non_wastefulness,
    check_open_first,
    check_stability,
    find_blocking_pairs,
)
from .choice import (
    ChoiceResult,
    bt_termination_check,
    choose_backward_transfers,
    choose_india,
    choose_open,
    choose_thakur_literal,
    restricted_merit_order,
)
from .io import dump_market, dump_run, fixture_path, load_assignment, load_fixture, load_market, parse_market
from .market import (
    GC,
    INDIA,
    Applicant,
    Assignment,
    CapacityVector,
    CategoryScheme,
    DomainError,
    Institution,
    Market,
    MarketError,
    Matching,
    induce_matching,
    validate_assignment,
)
from .mechanisms import MECHANISMS, MechanismRun, da_bt, da_india, deferred_acceptance, multi_run_da
from .oracle import (
    Comparison,
    FuzzConfig,
    ManipulationWitness,
    SearchTruncated,
    check_improvement,
    check_size_monotonicity,
    check_spirit_of_aa,
    check_substitutability,
    find_joint_manipulation,
    find_membership_manipulation,
    find_preference_manipulation,
    fuzz,
    pareto_compare,
)

__version__ = "0.1.0"
