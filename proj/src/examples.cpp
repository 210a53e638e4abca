#include "quadhedge/examples.hpp"

#include <cmath>
#include <sstream>

#include "quadhedge/arbitrage_bounds.hpp"
#include "quadhedge/vo_measure.hpp"

namespace quadhedge::examples {

MarketLattice two_date_market() {
    LatticeData data;
    data.stages = 2;
    data.discounts = {1.0};
    data.nodes = {
        {kRootId, 0, 3.2, {{kLowId, 0.05}, {kMidId, 0.05}, {kHighId, 0.90}}},
        {kLowId, 1, 2.56, {}},
        {kMidId, 1, 6.4, {}},
        {kHighId, 1, 16.0, {}},
    };
    return MarketLattice(std::move(data));
}

PayoffSpec call_strike_3() { return PayoffSpec::call(3.0); }
PayoffSpec call_strike_7() { return PayoffSpec::call(7.0); }

RNMeasureSpec rn_family(double r) {
    std::map<NodeId, std::map<NodeId, double>> entries;
    entries[kRootId][kLowId] = 5.0 / 6.0 + 2.5 * r;
    entries[kRootId][kMidId] = 1.0 / 6.0 - 3.5 * r;
    entries[kRootId][kHighId] = r;
    return RNMeasureSpec(std::move(entries));
}

namespace {

std::string fmt(double x) {
    std::ostringstream os;
    os.precision(6);
    os << x;
    return os.str();
}

std::string fmt_ids(const std::set<NodeId>& ids) {
    std::ostringstream os;
    os << "{";
    bool first = true;
    for (NodeId id : ids) {
        if (!first) os << ", ";
        os << id;
        first = false;
    }
    os << "}";
    return os.str();
}

void numeric_row(std::vector<ReferenceRow>& rows, const std::string& quantity, double reference,
                 double computed, double tolerance, bool informational = false) {
    const double delta = std::abs(computed - reference);
    rows.push_back({quantity, fmt(reference), fmt(computed), delta, tolerance,
                    informational || delta <= tolerance, informational});
}

void flag_row(std::vector<ReferenceRow>& rows, const std::string& quantity,
              const std::string& expected, const std::string& computed, bool pass) {
    rows.push_back({quantity, expected, computed, 0.0, 0.0, pass, false});
}

}  // namespace

std::vector<ReferenceRow> reproduce_reference_examples() {
    std::vector<ReferenceRow> rows;
    const MarketLattice market = two_date_market();

    // Reference values are the 4-decimal figures for this market; the
    // companion checks in the test suites pin the exact finite-sum values.
    constexpr double kValueTol = 5e-4;
    constexpr double kRoundedTol = 5e-3;  // values the reference rounds more coarsely
    constexpr double kIntervalTol = 1e-4;

    {  // strike-3 call
        const PayoffSpec payoff = call_strike_3();
        const ExercisePolicy vo_policy(market, {kMidId});
        const HedgeCoefficients coeffs = compute_coefficients(market, payoff, vo_policy);
        const EdgeWeights weights = one_step_weights(market, coeffs, kRootId);
        numeric_row(rows, "strike 3: vo weight at 2.56", 0.6312, weights.weights[0].weight,
                    kValueTol);
        numeric_row(rows, "strike 3: vo weight at 6.4", 0.4496, weights.weights[1].weight,
                    kValueTol);
        numeric_row(rows, "strike 3: vo weight at 16", -0.0808, weights.weights[2].weight,
                    kValueTol);

        const OptimizationResult naive = optimize_vo_naive(market, payoff);
        flag_row(rows, "strike 3: naive vo policy", "{2}",
                 fmt_ids(naive.policy.exercise_ids(market)),
                 naive.policy.exercise_ids(market) == std::set<NodeId>{kMidId});
        numeric_row(rows, "strike 3: naive vo production cost", 1.5286, naive.value, kValueTol);

        const OptimizationResult tc = optimize_vo_time_consistent(market, payoff);
        flag_row(rows, "strike 3: time-consistent policy", "{2, 3}",
                 fmt_ids(tc.policy.exercise_ids(market)),
                 tc.policy.exercise_ids(market) == std::set<NodeId>{kMidId, kHighId});
        numeric_row(rows, "strike 3: time-consistent production cost", 0.4777, tc.value,
                    kRoundedTol);

        const OptimizationResult rn = optimize_risk_neutral(market, payoff, rn_family(1.0 / 42.0));
        flag_row(rows, "strike 3: risk-neutral optimal policy", "{2, 3}",
                 fmt_ids(rn.policy.exercise_ids(market)),
                 rn.policy.exercise_ids(market) == std::set<NodeId>{kMidId, kHighId});

        const ValueInterval naive_interval = value_bounds(market, payoff, naive.policy);
        numeric_row(rows, "strike 3: naive policy value interval lo", 0.0, naive_interval.lo,
                    kIntervalTol);
        numeric_row(rows, "strike 3: naive policy value interval hi", 0.5667, naive_interval.hi,
                    kIntervalTol);
        const ValueInterval rn_interval = value_bounds(market, payoff, rn.policy);
        numeric_row(rows, "strike 3: rn policy value interval lo", 0.5667, rn_interval.lo,
                    kIntervalTol);
        numeric_row(rows, "strike 3: rn policy value interval hi", 0.6190, rn_interval.hi,
                    kIntervalTol);

        flag_row(rows, "strike 3: naive cost outside its no-arbitrage interval", "outside",
                 contains(naive_interval, naive.value) ? "inside" : "outside",
                 !contains(naive_interval, naive.value));
        flag_row(rows, "strike 3: tc cost outside the rn policy interval", "outside",
                 contains(rn_interval, tc.value) ? "inside" : "outside",
                 !contains(rn_interval, tc.value));
    }

    {  // strike-7 call
        const PayoffSpec payoff = call_strike_7();
        const OptimizationResult naive = optimize_vo_naive(market, payoff);
        flag_row(rows, "strike 7: naive vo policy", "{} (never exercise)",
                 fmt_ids(naive.policy.exercise_ids(market)),
                 naive.policy.exercise_ids(market).empty());
        numeric_row(rows, "strike 7: naive vo production cost", 0.0, naive.value, 0.0);

        const OptimizationResult rn = optimize_risk_neutral(market, payoff, rn_family(1.0 / 42.0));
        flag_row(rows, "strike 7: risk-neutral optimal policy", "{3}",
                 fmt_ids(rn.policy.exercise_ids(market)),
                 rn.policy.exercise_ids(market) == std::set<NodeId>{kHighId});

        const HedgeCoefficients coeffs = compute_coefficients(market, payoff, rn.policy);
        numeric_row(rows, "strike 7: rn policy production cost", -0.7254,
                    optimal_initial_capital(market, coeffs), kRoundedTol);

        const ValueInterval interval = value_bounds(market, payoff, rn.policy);
        numeric_row(rows, "strike 7: rn policy value interval lo", 0.0, interval.lo,
                    kIntervalTol);
        numeric_row(rows, "strike 7: rn policy value interval hi", 3.0 / 7.0, interval.hi,
                    kIntervalTol);
        // The commonly quoted figure for this bound is 0.5667; the exact
        // recursion gives 3/7. Recorded, not scored.
        numeric_row(rows, "strike 7: interval hi vs quoted 0.5667 (discrepancy note)", 0.5667,
                    interval.hi, kIntervalTol, /*informational=*/true);
    }

    return rows;
}

}  // namespace quadhedge::examples
