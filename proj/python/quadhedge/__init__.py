"""Quadratic hedging and exercise-policy analysis on futures-price lattices."""

from quadhedge._core import (
    ExercisePolicy,
    HedgeCoefficients,
    MarketLattice,
    PayoffSpec,
    QuadhedgeError,
    RNMeasureSpec,
    anchored_objective,
    coefficients_table,
    compute_coefficients,
    evaluate_value_function,
    examples,
    interval_contains,
    is_equivalent_measure,
    one_step_weights,
    optimal_initial_capital,
    optimize_risk_neutral,
    optimize_vo_naive,
    optimize_vo_time_consistent,
    rn_policy_value,
    run_hedge,
    stopped_weights,
    tc_mismatches,
    trade_decision,
    validate_lattice_text,
    value_bounds,
    vo_expected_value,
)

__all__ = [
    "ExercisePolicy",
    "HedgeCoefficients",
    "MarketLattice",
    "PayoffSpec",
    "QuadhedgeError",
    "RNMeasureSpec",
    "anchored_objective",
    "coefficients_table",
    "compute_coefficients",
    "evaluate_value_function",
    "examples",
    "interval_contains",
    "is_equivalent_measure",
    "one_step_weights",
    "optimal_initial_capital",
    "optimize_risk_neutral",
    "optimize_vo_naive",
    "optimize_vo_time_consistent",
    "rn_policy_value",
    "run_hedge",
    "stopped_weights",
    "tc_mismatches",
    "trade_decision",
    "validate_lattice_text",
    "value_bounds",
    "vo_expected_value",
]

__version__ = "0.1.0"
