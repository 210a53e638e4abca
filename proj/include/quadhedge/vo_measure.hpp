#pragma once

#include <vector>

#include "quadhedge/hedging_engine.hpp"

namespace quadhedge {

// Variance-optimal change of measure induced by a policy's hedge. One-step
// weights reweight the statistical child probabilities by a'(1 - q dF),
// normalized; they may be negative, and the product along a path gives the
// stopped-outcome weight.

struct EdgeWeight {
    NodeId child = -1;
    double weight = 0.0;
};

struct EdgeWeights {
    NodeId node = -1;
    std::vector<EdgeWeight> weights;  // child-id order, sum to 1
};

/// Per alive continuation node, keyed in (stage, id) order.
struct SignedEdgeMeasure {
    std::vector<EdgeWeights> nodes;
};

struct StoppedOutcome {
    std::vector<NodeId> prefix;  // from-node through the stopping node
    NodeId stop = -1;
    Stage stop_stage = 0;
    bool exercised = false;
    double weight = 0.0;
};

struct SignedStoppedMeasure {
    NodeId from = -1;
    Stage from_stage = 0;
    std::vector<StoppedOutcome> outcomes;  // weights sum to 1
};

inline constexpr double kMeasureNormalizerFloor = 1e-14;
inline constexpr double kEquivalenceEps = 1e-12;

/// weight(child) = prob * a'(child) * (1 - q dF) / normalizer. Sums to 1 and
/// prices the node: sum weight * child price = node price.
EdgeWeights one_step_weights(const MarketLattice& lattice, const HedgeCoefficients& coeffs,
                             NodeId node);

SignedEdgeMeasure build_edge_measure(const MarketLattice& lattice,
                                     const HedgeCoefficients& coeffs);

/// Product of one-step weights along every path prefix until the policy
/// stops (exercise or expiry). Outcomes are keyed by full path prefix, which
/// is exact on DAGs as well as trees.
SignedStoppedMeasure stopped_path_weights(const MarketLattice& lattice,
                                          const HedgeCoefficients& coeffs,
                                          const ExercisePolicy& policy, NodeId from);

/// E over stopped outcomes of D_{i,iota} * realized cash flow; equals the
/// hedge coefficient b at the node. Immediate exercise returns C(from).
Money vo_expected_value(const MarketLattice& lattice, const PayoffSpec& payoff,
                        const ExercisePolicy& policy, const HedgeCoefficients& coeffs,
                        NodeId from);
Money vo_expected_value(const MarketLattice& lattice, const PayoffSpec& payoff,
                        const ExercisePolicy& policy, NodeId from);

struct EquivalenceResult {
    bool equivalent = false;
    std::vector<std::size_t> offending;  // outcome indices with weight <= eps
};

/// Equivalent iff every stopped-outcome weight is strictly positive.
EquivalenceResult is_equivalent_measure(const SignedStoppedMeasure& measure);

/// E[F_{iota ^ j}] - F_from under the stopped measure; ~0 on valid inputs.
double check_stopped_martingale(const MarketLattice& lattice, const SignedStoppedMeasure& measure,
                                Stage j);

}  // namespace quadhedge
