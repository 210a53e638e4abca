#include <cmath>
#include <set>

#include "doctest.h"

#include "quadhedge/examples.hpp"
#include "quadhedge/simulation.hpp"
#include "support/test_lattices.hpp"

using namespace quadhedge;
namespace ts = quadhedge::testsupport;
using quadhedge::examples::kHighId;
using quadhedge::examples::kMidId;
using quadhedge::examples::kRootId;

namespace frozen {
constexpr double kRnAnchor = 0.5928571428571429;  // 83/140
}

namespace {

bool same_stats(const PnlStats& a, const PnlStats& b) {
    return a.mean_error == b.mean_error && a.mean_squared_error == b.mean_squared_error &&
           a.unhedged_second_moment == b.unhedged_second_moment && a.se_mean == b.se_mean &&
           a.se_mse == b.se_mse && a.se_unhedged == b.se_unhedged &&
           a.path_count == b.path_count;
}

}  // namespace

TEST_CASE("sampled edge frequencies converge to the statistical probabilities") {
    MarketLattice lattice = examples::two_date_market();
    const std::uint64_t n = 1000000;
    std::vector<Path> paths = sample_paths(lattice, n, 20240601);
    REQUIRE(paths.size() == n);

    std::uint64_t high = 0;
    for (const Path& path : paths) high += path.nodes[1] == kHighId ? 1 : 0;
    const double freq = static_cast<double>(high) / static_cast<double>(n);
    const double se = std::sqrt(0.9 * 0.1 / static_cast<double>(n));
    CHECK(std::abs(freq - 0.9) <= 3.0 * se);
}

TEST_CASE("paths are pure functions of (seed, index)") {
    MarketLattice lattice = ts::binomial_tree(4, 4.0, 1.3, 0.8, 0.45, 1.0);
    std::vector<Path> once = sample_paths(lattice, 1, 99);
    std::vector<Path> again = sample_paths(lattice, 1, 99);
    REQUIRE(once.size() == 1);
    CHECK(once[0].nodes == again[0].nodes);

    // a prefix of a longer run draws the same paths
    std::vector<Path> many = sample_paths(lattice, 64, 99);
    CHECK(many[0].nodes == once[0].nodes);

    std::vector<Path> other_seed = sample_paths(lattice, 64, 100);
    bool any_different = false;
    for (std::size_t k = 0; k < 64; ++k)
        if (other_seed[k].nodes != many[k].nodes) any_different = true;
    CHECK(any_different);
}

TEST_CASE("single-branch chains always produce the same path") {
    MarketLattice lattice = ts::chain(4, 5.0);
    for (const Path& path : sample_paths(lattice, 16, 7))
        CHECK(path.nodes == std::vector<NodeId>{0, 1, 2, 3});
}

TEST_CASE("Monte Carlo MSE matches the DP prediction on the two-date market") {
    MarketLattice lattice = examples::two_date_market();
    const PayoffSpec payoff = examples::call_strike_3();
    ExercisePolicy policy(lattice, {kMidId, kHighId});
    HedgeCoefficients coeffs = compute_coefficients(lattice, payoff, policy);
    const NodeCoefficients& root = coeffs.at(lattice, kRootId);

    SUBCASE("free optimum: empirical MSE estimates c0") {
        SimulationConfig config{1000000, 20240602, root.b, 1};
        PnlStats stats = run_hedge(lattice, payoff, policy, coeffs, config);
        HedgeSummary summary = summarize(stats, root.c);
        CHECK(std::abs(summary.z) <= 3.0);
        CHECK(summary.pass);
    }
    SUBCASE("anchored at the risk-neutral value") {
        SimulationConfig config{1000000, 20240603, frozen::kRnAnchor, 1};
        PnlStats stats = run_hedge(lattice, payoff, policy, coeffs, config);
        const double predicted = anchored_objective(lattice, coeffs, frozen::kRnAnchor);
        CHECK(std::abs(summarize(stats, predicted).z) <= 3.0);
    }
}

TEST_CASE("complete binomial markets replicate path by path") {
    ts::Rng rng(20240604);
    for (int trial = 0; trial < 10; ++trial) {
        MarketLattice lattice = ts::random_binomial(rng);
        PayoffSpec payoff = ts::random_table_payoff(rng, lattice);
        ExercisePolicy policy = ts::random_canonical_policy(rng, lattice);
        HedgeCoefficients coeffs = compute_coefficients(lattice, payoff, policy);
        const Money b0 = optimal_initial_capital(lattice, coeffs);

        SimulationConfig config{512, 5, b0, 1};
        double max_error = 0.0;
        run_hedge(lattice, payoff, policy, coeffs, config, [&](const PathRecord& rec) {
            max_error = std::max(max_error, std::abs(rec.error));
        });
        CHECK(max_error <= 1e-10);

        PnlStats exact = evaluate_hedge_exact(lattice, payoff, policy, coeffs, b0);
        CHECK(exact.mean_squared_error <= 1e-12);
    }
}

TEST_CASE("exhaustive path enumeration reproduces the DP objective exactly") {
    ts::Rng rng(20240605);
    for (int trial = 0; trial < 30; ++trial) {
        MarketLattice lattice = ts::random_tree(rng);
        PayoffSpec payoff = ts::random_table_payoff(rng, lattice);
        ExercisePolicy policy = ts::random_canonical_policy(rng, lattice);
        HedgeCoefficients coeffs = compute_coefficients(lattice, payoff, policy);
        const NodeCoefficients& root = coeffs.at_index(lattice.root_index());

        for (Money v0 : {root.b, 0.0, root.b + 0.7}) {
            PnlStats exact = evaluate_hedge_exact(lattice, payoff, policy, coeffs, v0);
            const double predicted = anchored_objective(lattice, coeffs, v0);
            CHECK(exact.mean_squared_error ==
                  doctest::Approx(predicted).epsilon(1e-12));
        }
    }
}

TEST_CASE("stats are bit-identical across thread counts") {
    MarketLattice lattice = ts::binomial_tree(4, 4.0, 1.25, 0.8, 0.4, 0.98);
    PayoffSpec payoff = PayoffSpec::call(4.0);
    ExercisePolicy policy = ExercisePolicy::never(lattice);
    HedgeCoefficients coeffs = compute_coefficients(lattice, payoff, policy);
    const Money b0 = optimal_initial_capital(lattice, coeffs);

    SimulationConfig config{100000, 31337, b0, 1};
    PnlStats serial = run_hedge(lattice, payoff, policy, coeffs, config);
    for (int threads : {2, 3, 8}) {
        config.threads = threads;
        CHECK(same_stats(serial, run_hedge(lattice, payoff, policy, coeffs, config)));
    }
}

TEST_CASE("empirical MSE is a consistent estimator across seeds") {
    MarketLattice lattice = examples::two_date_market();
    const PayoffSpec payoff = examples::call_strike_3();
    ExercisePolicy policy(lattice, {kMidId, kHighId});
    HedgeCoefficients coeffs = compute_coefficients(lattice, payoff, policy);
    const NodeCoefficients& root = coeffs.at(lattice, kRootId);

    int within = 0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        SimulationConfig config{100000, seed, root.b, 1};
        PnlStats stats = run_hedge(lattice, payoff, policy, coeffs, config);
        if (std::abs(summarize(stats, root.c).z) <= 3.0) ++within;
    }
    CHECK(within >= 18);
}

TEST_CASE("per-path records are consistent with the policy") {
    MarketLattice lattice = examples::two_date_market();
    const PayoffSpec payoff = examples::call_strike_3();
    ExercisePolicy policy(lattice, {kMidId});
    HedgeCoefficients coeffs = compute_coefficients(lattice, payoff, policy);

    SimulationConfig config{256, 11, optimal_initial_capital(lattice, coeffs), 1};
    std::set<std::uint64_t> ids;
    run_hedge(lattice, payoff, policy, coeffs, config, [&](const PathRecord& rec) {
        ids.insert(rec.path_id);
        CHECK(rec.iota == 1);
        if (rec.exercised) CHECK(rec.cashflow == doctest::Approx(3.4).epsilon(1e-15));
        if (!rec.exercised) CHECK(rec.cashflow == 0.0);
        CHECK(rec.error == rec.cashflow - rec.terminal_wealth);  // D = 1 here
    });
    CHECK(ids.size() == 256);
}

TEST_CASE("summarize") {
    PnlStats stats;
    stats.path_count = 1000;
    stats.mean_squared_error = 0.00325;
    stats.se_mse = 1e-4;

    HedgeSummary s = summarize(stats, 0.003235);
    CHECK(s.z == doctest::Approx(0.15).epsilon(1e-12));
    CHECK(s.pass);

    CHECK(summarize(stats, stats.mean_squared_error).z == 0.0);

    PnlStats exact_stats;  // complete market: zero error, zero spread
    exact_stats.path_count = 10;
    CHECK(summarize(exact_stats, 0.0).z == 0.0);
    CHECK(summarize(exact_stats, 0.0).pass);

    stats.se_mse = 1e-6;
    CHECK_FALSE(summarize(stats, 0.003235).pass);  // |z| = 15
}

TEST_CASE("config validation") {
    MarketLattice lattice = examples::two_date_market();
    const PayoffSpec payoff = examples::call_strike_3();
    ExercisePolicy policy(lattice, {kMidId});
    HedgeCoefficients coeffs = compute_coefficients(lattice, payoff, policy);
    SimulationConfig config;
    config.path_count = 0;
    CHECK_THROWS_AS(run_hedge(lattice, payoff, policy, coeffs, config), ValidationError);
}
