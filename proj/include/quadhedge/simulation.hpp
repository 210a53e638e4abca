#pragma once

#include <functional>
#include <vector>

#include "quadhedge/hedging_engine.hpp"

namespace quadhedge {

struct SimulationConfig {
    std::uint64_t path_count = 1;
    std::uint64_t seed = 0;
    Money initial_capital = 0.0;
    int threads = 1;
};

/// Moments of the date-(I-1) replication error over sampled paths.
struct PnlStats {
    double mean_error = 0.0;
    double mean_squared_error = 0.0;      // estimates J_0(V_0)
    double unhedged_second_moment = 0.0;  // theta = 0 comparator, diagnostic
    double se_mean = 0.0;
    double se_mse = 0.0;
    double se_unhedged = 0.0;
    std::uint64_t path_count = 0;
};

struct PathRecord {
    std::uint64_t path_id = 0;
    Stage iota = 0;
    bool exercised = false;
    Money cashflow = 0.0;
    Money terminal_wealth = 0.0;
    double error = 0.0;
};

/// n independent root-to-terminal paths; path k is a pure function of
/// (seed, k), so worker count never changes the draw.
std::vector<Path> sample_paths(const MarketLattice& lattice, std::uint64_t n, std::uint64_t seed);

/// Executes the hedge path by path: optimal trade while alive, wealth
/// V' = V/D + dF * theta, trading stopped at the stopping stage. Identical
/// (seed, n) produce bit-identical stats for every thread count.
PnlStats run_hedge(const MarketLattice& lattice, const PayoffSpec& payoff,
                   const ExercisePolicy& policy, const HedgeCoefficients& coeffs,
                   const SimulationConfig& config);

/// Same, streaming one record per path (forces a single worker).
PnlStats run_hedge(const MarketLattice& lattice, const PayoffSpec& payoff,
                   const ExercisePolicy& policy, const HedgeCoefficients& coeffs,
                   const SimulationConfig& config,
                   const std::function<void(const PathRecord&)>& sink);

/// Probability-weighted enumeration of every path: the exact counterpart of
/// run_hedge. mean_squared_error equals J_0(V_0) up to roundoff.
PnlStats evaluate_hedge_exact(const MarketLattice& lattice, const PayoffSpec& payoff,
                              const ExercisePolicy& policy, const HedgeCoefficients& coeffs,
                              Money initial_capital);

struct HedgeSummary {
    double empirical_mse = 0.0;
    double predicted_mse = 0.0;
    double standard_error = 0.0;
    double z = 0.0;
    bool pass = false;  // |z| <= 3
};

HedgeSummary summarize(const PnlStats& stats, double predicted_mse);

}  // namespace quadhedge
