#pragma once

#include <string>
#include <vector>

#include "quadhedge/market_model.hpp"
#include "quadhedge/optimizers.hpp"

namespace quadhedge::examples {

// Built-in two-date reference market: root price 3.2, terminal prices
// 2.56 / 6.4 / 16 with statistical probabilities 0.05 / 0.05 / 0.90, zero
// interest. Node ids 0 (root), 1 (2.56), 2 (6.4), 3 (16).
MarketLattice two_date_market();

inline constexpr NodeId kRootId = 0;
inline constexpr NodeId kLowId = 1;    // price 2.56
inline constexpr NodeId kMidId = 2;    // price 6.4
inline constexpr NodeId kHighId = 3;   // price 16

PayoffSpec call_strike_3();
PayoffSpec call_strike_7();

/// The market's one-parameter family of equivalent martingale measures:
/// Pr(16) = r with r in (0, 1/21), Pr(2.56) = 5/6 + 5r/2, Pr(6.4) = 1/6 - 7r/2.
RNMeasureSpec rn_family(double r);

struct ReferenceRow {
    std::string quantity;
    std::string expected;  // reference value, as printed
    std::string computed;
    double delta = 0.0;          // |computed - reference| when numeric
    double tolerance = 0.0;
    bool pass = false;
    bool informational = false;  // recorded discrepancy, not a failure
};

/// Runs both built-in reference option problems end to end and checks every
/// computed quantity against its reference value.
std::vector<ReferenceRow> reproduce_reference_examples();

}  // namespace quadhedge::examples
