#pragma once

#include <vector>

#include "quadhedge/exercise_policy.hpp"
#include "quadhedge/market_model.hpp"

namespace quadhedge {

enum class NodeRole : std::uint8_t {
    Continuation,       // alive, trading continues
    Exercised,          // policy exercises here
    AbandonedTerminal,  // terminal stage, decision 0: option expires worthless
};

/// Per-node quadratic value function J(V) = a (b - V)^2 + c and, at
/// continuation nodes, the trade rule coefficients (p, q).
struct NodeCoefficients {
    double a = 0.0;  // 1/money^2, > 0 on the alive region
    Money b = 0.0;   // minimizer: target capital
    double c = 0.0;  // money^2 residual
    double p = 0.0;  // trade intercept (contracts)
    double q = 0.0;  // trade slope (1/money)
    NodeRole role = NodeRole::Continuation;
    bool has_trade = false;  // p, q meaningful
};

/// Whole-lattice coefficient table for one (payoff, policy) pair.
/// Trade execution during simulation is a table lookup.
class HedgeCoefficients {
public:
    HedgeCoefficients(std::vector<NodeCoefficients> by_index, std::vector<bool> alive)
        : by_index_(std::move(by_index)), alive_(std::move(alive)) {}

    const NodeCoefficients& at_index(std::size_t index) const { return by_index_[index]; }
    const NodeCoefficients& at(const MarketLattice& lattice, NodeId id) const {
        return by_index_[lattice.index(id)];
    }
    bool alive_index(std::size_t index) const { return alive_[index]; }
    bool alive(const MarketLattice& lattice, NodeId id) const { return alive_[lattice.index(id)]; }
    std::size_t size() const { return by_index_.size(); }

private:
    std::vector<NodeCoefficients> by_index_;
    std::vector<bool> alive_;  // reachable while the option is alive
};

// Guards from the coefficient recursions: a deterministic next-step price
// makes the trade indeterminate, and b's recursion divides by a.
inline constexpr double kSingularityScale = 1e-12;  // times (node price)^2
inline constexpr double kDegenerateWeight = 1e-300;

namespace detail {

/// One continuation step of the backward recursion, reading child
/// coefficients from `coeffs` (by node index). Sums run over children in id
/// order. `strict` raises on singular/degenerate nodes; otherwise they get
/// q = p = 0 (only acceptable off the alive region).
NodeCoefficients step_continuation(const MarketLattice& lattice, std::size_t node_index,
                                   const std::vector<NodeCoefficients>& coeffs, bool strict);

NodeCoefficients stopped_coefficients(const MarketLattice& lattice, const Node& node,
                                      const PayoffSpec& payoff, bool exercised);

}  // namespace detail

/// Backward-induction solve of the quadratic-hedging recursion for a
/// canonical policy. Coefficients are produced for every node, as if the
/// option were alive on arrival there.
HedgeCoefficients compute_coefficients(const MarketLattice& lattice, const PayoffSpec& payoff,
                                       const ExercisePolicy& policy);

/// b at the root: the minimizer of J_0 and the policy's minimal production cost.
Money optimal_initial_capital(const MarketLattice& lattice, const HedgeCoefficients& coeffs);

/// J_i(V) = a (b - V)^2 + c at an alive node.
double evaluate_value_function(const MarketLattice& lattice, const HedgeCoefficients& coeffs,
                               NodeId node, Money value);

/// Optimal futures position p - q V / D_{i+1} at an alive continuation node.
double trade_decision(const MarketLattice& lattice, const HedgeCoefficients& coeffs, NodeId node,
                      Money value);

/// J_0(V0): squared replication error of the hedge anchored at initial
/// capital V0, with trading still following the optimal rule.
double anchored_objective(const MarketLattice& lattice, const HedgeCoefficients& coeffs,
                          Money v0);

}  // namespace quadhedge
