#pragma once

#include <map>

#include "quadhedge/exercise_policy.hpp"
#include "quadhedge/market_model.hpp"

namespace quadhedge {

/// No-arbitrage value set of a policy's cash-flow stream over all equivalent
/// martingale measures. Ends are open when only boundary (non-equivalent)
/// measures attain them.
struct ValueInterval {
    Money lo = 0.0;
    Money hi = 0.0;
    bool open_lo = false;
    bool open_hi = false;
};

inline constexpr double kMembershipEpsScale = 1e-12;  // times max(1, |hi|)

ValueInterval value_bounds(const MarketLattice& lattice, const PayoffSpec& payoff,
                           const ExercisePolicy& policy);

/// Open-endpoint membership: lo + eps < x < hi - eps.
bool contains(const ValueInterval& interval, Money x);

enum class BoundEnd { Min, Max };

/// Per-node conditional distributions attaining the chosen closed-end bound.
/// Zero components mark a boundary (non-equivalent) optimizer.
struct WitnessMeasure {
    std::map<NodeId, std::map<NodeId, double>> distributions;
    bool boundary = false;
    std::vector<NodeId> boundary_nodes;
};

WitnessMeasure witness_measure(const MarketLattice& lattice, const PayoffSpec& payoff,
                               const ExercisePolicy& policy, BoundEnd end);

}  // namespace quadhedge
