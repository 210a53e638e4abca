#pragma once

#include <map>
#include <vector>

#include "quadhedge/hedging_engine.hpp"
#include "quadhedge/vo_measure.hpp"

namespace quadhedge {

inline constexpr double kRnSumTol = 1e-10;
inline constexpr double kRnMartingaleScale = 1e-8;  // times node price

/// User-supplied equivalent martingale (risk-neutral) measure: strictly
/// positive one-step probabilities that price every continuation node.
class RNMeasureSpec {
public:
    RNMeasureSpec() = default;
    explicit RNMeasureSpec(std::map<NodeId, std::map<NodeId, double>> entries)
        : entries_(std::move(entries)) {}

    static RNMeasureSpec from_json(const nlohmann::json& doc);
    static RNMeasureSpec load_file(const std::string& path);
    nlohmann::json to_json() const;

    const std::map<NodeId, std::map<NodeId, double>>& entries() const { return entries_; }

    /// Probability of the edge from -> to; throws if absent.
    double prob(NodeId from, NodeId to) const;

private:
    std::map<NodeId, std::map<NodeId, double>> entries_;
};

/// Positivity, normalization, coverage, and the one-step martingale
/// condition at every continuation node. Reports, never throws.
ValidationReport validate_rn_measure(const MarketLattice& lattice, const RNMeasureSpec& rn);

struct OptimizationDiagnostics {
    std::uint64_t policies_evaluated = 0;
    std::uint64_t ties = 0;
};

struct OptimizationResult {
    ExercisePolicy policy;
    Money value = 0.0;
    std::map<NodeId, Money> per_node_values;  // TC and RN optimizers only
    OptimizationDiagnostics diagnostics;
};

inline constexpr std::uint64_t kDefaultPolicyCap = std::uint64_t{1} << 20;

/// Exhaustive search for the policy with maximal minimal production cost
/// b_0. Ties go to the policy with fewest exercise nodes, then enumeration
/// order.
OptimizationResult optimize_vo_naive(const MarketLattice& lattice, const PayoffSpec& payoff,
                                     std::uint64_t cap = kDefaultPolicyCap);

/// Backward-induction time-consistent policy: at each node, exercise iff the
/// immediate cash flow strictly beats the production cost of continuing with
/// the already-fixed downstream decisions.
OptimizationResult optimize_vo_time_consistent(const MarketLattice& lattice,
                                               const PayoffSpec& payoff);

/// E^RN[D_{0,iota} * realized cash flow] for a canonical policy.
Money rn_policy_value(const MarketLattice& lattice, const PayoffSpec& payoff,
                      const ExercisePolicy& policy, const RNMeasureSpec& rn);

/// Optimal stopping under the supplied risk-neutral measure:
/// V = max(C, D E^RN[V']), exercising only on strict improvement.
OptimizationResult optimize_risk_neutral(const MarketLattice& lattice, const PayoffSpec& payoff,
                                         const RNMeasureSpec& rn);

/// Nodes reachable alive under `policy` where re-solving the stage-wise
/// optimization would decide differently. Empty iff the policy is time
/// consistent on its alive region.
std::vector<NodeId> tc_mismatches(const MarketLattice& lattice, const PayoffSpec& payoff,
                                  const ExercisePolicy& policy);

}  // namespace quadhedge
