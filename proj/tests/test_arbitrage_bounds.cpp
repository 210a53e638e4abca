#include <cmath>

#include "doctest.h"

#include "quadhedge/arbitrage_bounds.hpp"
#include "quadhedge/examples.hpp"
#include "quadhedge/optimizers.hpp"
#include "support/oracles.hpp"
#include "support/test_lattices.hpp"

using namespace quadhedge;
namespace ts = quadhedge::testsupport;
using quadhedge::examples::kHighId;
using quadhedge::examples::kLowId;
using quadhedge::examples::kMidId;
using quadhedge::examples::kRootId;

TEST_CASE("value_bounds on the two-date market") {
    MarketLattice lattice = examples::two_date_market();

    SUBCASE("strike 3, exercise only at 6.4: (0, 1.7/3)") {
        ValueInterval interval =
            value_bounds(lattice, examples::call_strike_3(), ExercisePolicy(lattice, {kMidId}));
        CHECK(std::abs(interval.lo - 0.0) <= 1e-9);
        CHECK(std::abs(interval.hi - 1.7 / 3.0) <= 1e-9);
        CHECK(interval.open_lo);
        CHECK(interval.open_hi);
    }
    SUBCASE("strike 3, exercise at 6.4 and 16: (1.7/3, 13/21)") {
        ValueInterval interval = value_bounds(lattice, examples::call_strike_3(),
                                              ExercisePolicy(lattice, {kMidId, kHighId}));
        CHECK(std::abs(interval.lo - 1.7 / 3.0) <= 1e-9);
        CHECK(std::abs(interval.hi - 13.0 / 21.0) <= 1e-9);
        CHECK(interval.open_lo);
        CHECK(interval.open_hi);
    }
    SUBCASE("strike 7, exercise at 16: (0, 3/7)") {
        ValueInterval interval =
            value_bounds(lattice, examples::call_strike_7(), ExercisePolicy(lattice, {kHighId}));
        CHECK(std::abs(interval.lo - 0.0) <= 1e-9);
        CHECK(std::abs(interval.hi - 3.0 / 7.0) <= 1e-9);
        CHECK(interval.open_lo);
        CHECK(interval.open_hi);
    }
    SUBCASE("exercise at the root: degenerate closed interval") {
        ValueInterval interval =
            value_bounds(lattice, examples::call_strike_3(), ExercisePolicy(lattice, {kRootId}));
        CHECK(interval.lo == doctest::Approx(0.2).epsilon(1e-15));
        CHECK(interval.hi == doctest::Approx(0.2).epsilon(1e-15));
        CHECK_FALSE(interval.open_lo);
        CHECK_FALSE(interval.open_hi);
    }
}

TEST_CASE("contains implements open-endpoint membership") {
    MarketLattice lattice = examples::two_date_market();
    const PayoffSpec payoff = examples::call_strike_3();

    ValueInterval naive_interval =
        value_bounds(lattice, payoff, ExercisePolicy(lattice, {kMidId}));
    CHECK_FALSE(contains(naive_interval, 1.5286));  // production cost is not arbitrage free

    ValueInterval rn_interval =
        value_bounds(lattice, payoff, ExercisePolicy(lattice, {kMidId, kHighId}));
    CHECK_FALSE(contains(rn_interval, 0.47774451097804393));

    CHECK(contains(naive_interval, 0.5 * (naive_interval.lo + naive_interval.hi)));
    CHECK_FALSE(contains(naive_interval, naive_interval.hi));
    CHECK_FALSE(contains(naive_interval, naive_interval.lo));
}

TEST_CASE("witness_measure reports the optimizing boundary distributions") {
    MarketLattice lattice = examples::two_date_market();
    const PayoffSpec payoff = examples::call_strike_3();
    ExercisePolicy policy(lattice, {kMidId});

    WitnessMeasure max_w = witness_measure(lattice, payoff, policy, BoundEnd::Max);
    CHECK(max_w.boundary);
    CHECK(max_w.boundary_nodes == std::vector<NodeId>{kRootId});
    const auto& max_dist = max_w.distributions.at(kRootId);
    CHECK(max_dist.at(kLowId) == doctest::Approx(5.0 / 6.0).epsilon(1e-12));
    CHECK(max_dist.at(kMidId) == doctest::Approx(1.0 / 6.0).epsilon(1e-12));
    CHECK(max_dist.at(kHighId) == 0.0);

    WitnessMeasure min_w = witness_measure(lattice, payoff, policy, BoundEnd::Min);
    CHECK(min_w.boundary);
    const auto& min_dist = min_w.distributions.at(kRootId);
    CHECK(min_dist.at(kLowId) == doctest::Approx(20.0 / 21.0).epsilon(1e-12));
    CHECK(min_dist.at(kMidId) == 0.0);
    CHECK(min_dist.at(kHighId) == doctest::Approx(1.0 / 21.0).epsilon(1e-12));
}

TEST_CASE("binomial lattices have a point interval at the unique RN value") {
    ts::Rng rng(808);
    for (int trial = 0; trial < 25; ++trial) {
        MarketLattice lattice = ts::random_binomial(rng);
        PayoffSpec payoff = ts::random_table_payoff(rng, lattice);
        ExercisePolicy policy = ts::random_canonical_policy(rng, lattice);

        ValueInterval interval = value_bounds(lattice, payoff, policy);
        CHECK(interval.lo == doctest::Approx(interval.hi).epsilon(1e-12));
        CHECK_FALSE(interval.open_lo);
        CHECK_FALSE(interval.open_hi);

        WitnessMeasure w = witness_measure(lattice, payoff, policy, BoundEnd::Max);
        CHECK_FALSE(w.boundary);

        std::map<NodeId, std::map<NodeId, double>> rn;
        for (std::size_t i = 0; i < lattice.size(); ++i) {
            const Node& n = lattice.node_at(i);
            if (lattice.terminal(n)) continue;
            const Node& lo = lattice.node(n.edges[0].to);
            const Node& hi = lattice.node(n.edges[1].to);
            const double up = (n.price - lo.price) / (hi.price - lo.price);
            rn[n.id][lo.id] = 1.0 - up;
            rn[n.id][hi.id] = up;
        }
        const Money rn_value = ts::rn_value_by_paths(lattice, payoff, policy, rn);
        CHECK(interval.lo == doctest::Approx(rn_value).epsilon(1e-10));
    }
}

TEST_CASE("every equivalent measure prices strictly inside an open interval") {
    ts::Rng rng(909);
    for (int trial = 0; trial < 10; ++trial) {
        MarketLattice lattice = ts::random_tree(rng, {2, 3, 3, 4, /*straddle=*/true});
        PayoffSpec payoff = ts::random_table_payoff(rng, lattice);
        ExercisePolicy policy = ts::random_canonical_policy(rng, lattice, 0.25);
        ValueInterval interval = value_bounds(lattice, payoff, policy);

        for (int sample = 0; sample < 100; ++sample) {
            RNMeasureSpec rn = ts::random_rn_measure(rng, lattice);
            REQUIRE(validate_rn_measure(lattice, rn).ok());
            const Money value = rn_policy_value(lattice, payoff, policy, rn);
            CHECK(value >= interval.lo - 1e-9);
            CHECK(value <= interval.hi + 1e-9);
            // interior measures sit strictly inside fully open intervals
            if (interval.open_lo && interval.open_hi && interval.hi - interval.lo > 1e-9)
                CHECK(contains(interval, value));
        }
    }
}

TEST_CASE("bounds are monotone in the realized cash flows") {
    ts::Rng rng(1010);
    for (int trial = 0; trial < 15; ++trial) {
        MarketLattice lattice = ts::random_tree(rng, {2, 3, 2, 4, /*straddle=*/true});
        ExercisePolicy policy = ts::random_canonical_policy(rng, lattice, 0.3);

        std::map<NodeId, Money> base, bumped;
        std::uniform_real_distribution<double> u(0.0, 5.0), bump(0.0, 1.0);
        for (std::size_t i = 0; i < lattice.size(); ++i) {
            const NodeId id = lattice.node_at(i).id;
            base[id] = u(rng);
            bumped[id] = base[id] + bump(rng);
        }
        ValueInterval lo_interval =
            value_bounds(lattice, PayoffSpec::table(base), policy);
        ValueInterval hi_interval =
            value_bounds(lattice, PayoffSpec::table(bumped), policy);
        CHECK(hi_interval.lo >= lo_interval.lo - 1e-12);
        CHECK(hi_interval.hi >= lo_interval.hi - 1e-12);
    }
}

TEST_CASE("bounds ignore the statistical probabilities") {
    ts::Rng rng(1111);
    MarketLattice lattice = ts::random_tree(rng, {3, 3, 2, 3, /*straddle=*/true});
    PayoffSpec payoff = ts::random_table_payoff(rng, lattice);
    ExercisePolicy policy = ts::random_canonical_policy(rng, lattice, 0.3);
    ValueInterval before = value_bounds(lattice, payoff, policy);

    LatticeData data = ts::lattice_data(lattice);
    for (Node& n : data.nodes) {
        if (n.edges.empty()) continue;
        double acc = 0.0;
        for (std::size_t k = 0; k + 1 < n.edges.size(); ++k) {
            n.edges[k].prob = (k + 1.0) / (n.edges.size() * (n.edges.size() + 1.0) / 2.0);
            acc += n.edges[k].prob;
        }
        n.edges.back().prob = 1.0 - acc;
    }
    MarketLattice perturbed{std::move(data)};
    ExercisePolicy same_policy(perturbed, policy.exercise_ids(lattice));
    ValueInterval after = value_bounds(perturbed, payoff, same_policy);

    CHECK(before.lo == after.lo);  // bitwise: probabilities never enter
    CHECK(before.hi == after.hi);
    CHECK(before.open_lo == after.open_lo);
    CHECK(before.open_hi == after.open_hi);
}

TEST_CASE("backward recursion equals brute-force joint optimization on two periods") {
    ts::Rng rng(1212);
    for (int trial = 0; trial < 10; ++trial) {
        MarketLattice lattice = ts::random_tree(rng, {3, 3, 2, 3, /*straddle=*/true});
        PayoffSpec payoff = ts::random_table_payoff(rng, lattice);
        ExercisePolicy policy = ts::random_canonical_policy(rng, lattice, 0.2);
        ValueInterval interval = value_bounds(lattice, payoff, policy);

        // Joint brute force: enumerate the straddling-pair vertices of every
        // alive continuation node and take the best combination.
        const std::vector<bool> alive = alive_reachable(lattice, policy);
        std::vector<std::size_t> lp_nodes;
        std::vector<std::vector<std::map<NodeId, double>>> vertex_sets;
        for (Stage s = 0; s < lattice.stage_count(); ++s)
            for (std::size_t idx : lattice.stage_indices(s)) {
                const Node& n = lattice.node_at(idx);
                if (!alive[idx] || policy.exercises_index(idx) || lattice.terminal(n)) continue;
                std::vector<std::map<NodeId, double>> vertices;
                for (std::size_t a = 0; a < n.edges.size(); ++a)
                    for (std::size_t b = 0; b < n.edges.size(); ++b) {
                        const Money pa = lattice.node(n.edges[a].to).price;
                        const Money pb = lattice.node(n.edges[b].to).price;
                        if (pa >= n.price || pb <= n.price) continue;
                        std::map<NodeId, double> m;
                        m[n.edges[a].to] = (pb - n.price) / (pb - pa);
                        m[n.edges[b].to] = (n.price - pa) / (pb - pa);
                        vertices.push_back(std::move(m));
                    }
                REQUIRE_FALSE(vertices.empty());
                lp_nodes.push_back(idx);
                vertex_sets.push_back(std::move(vertices));
            }

        Money best_hi = -1e300, best_lo = 1e300;
        std::vector<std::size_t> pick(lp_nodes.size(), 0);
        auto evaluate = [&]() {
            std::vector<Money> value(lattice.size(), 0.0);
            for (Stage s = lattice.stage_count() - 1; s >= 0; --s)
                for (std::size_t idx : lattice.stage_indices(s)) {
                    const Node& n = lattice.node_at(idx);
                    if (policy.exercises_index(idx)) {
                        value[idx] = payoff.cash_flow(n);
                    } else if (lattice.terminal(n)) {
                        value[idx] = 0.0;
                    } else if (alive[idx]) {
                        auto it = std::find(lp_nodes.begin(), lp_nodes.end(), idx);
                        const auto& m = vertex_sets[static_cast<std::size_t>(
                            it - lp_nodes.begin())][pick[static_cast<std::size_t>(
                            it - lp_nodes.begin())]];
                        Money acc = 0.0;
                        for (const auto& [child, weight] : m)
                            acc += weight * value[lattice.index(child)];
                        value[idx] = lattice.discount(n.stage + 1) * acc;
                    }
                }
            return value[lattice.root_index()];
        };
        auto recurse = [&](auto&& self, std::size_t k) -> void {
            if (k == lp_nodes.size()) {
                const Money v = evaluate();
                best_hi = std::max(best_hi, v);
                best_lo = std::min(best_lo, v);
                return;
            }
            for (std::size_t v = 0; v < vertex_sets[k].size(); ++v) {
                pick[k] = v;
                self(self, k + 1);
            }
        };
        recurse(recurse, 0);

        if (lp_nodes.empty()) continue;
        CHECK(interval.hi == doctest::Approx(best_hi).epsilon(1e-10));
        CHECK(interval.lo == doctest::Approx(best_lo).epsilon(1e-10));
    }
}

TEST_CASE("non-straddling alive nodes raise an arbitrage error") {
    LatticeData data;
    data.stages = 2;
    data.discounts = {1.0};
    data.nodes = {{0, 0, 3.0, {{1, 0.5}, {2, 0.5}}}, {1, 1, 4.0, {}}, {2, 1, 5.0, {}}};
    MarketLattice lattice{std::move(data)};
    try {
        value_bounds(lattice, PayoffSpec::call(3.0), ExercisePolicy::never(lattice));
        FAIL("expected ArbitrageError");
    } catch (const ArbitrageError& e) {
        CHECK(e.node == 0);
    }

    // the same node below an exercise is harmless
    ValueInterval interval =
        value_bounds(lattice, PayoffSpec::call(2.0), ExercisePolicy(lattice, {0}));
    CHECK(interval.lo == 1.0);
    CHECK(interval.hi == 1.0);
}

TEST_CASE("chain lattices have a closed point interval") {
    MarketLattice lattice = ts::chain(3, 5.0);
    ValueInterval interval =
        value_bounds(lattice, PayoffSpec::call(4.0), ExercisePolicy(lattice, {2}));
    CHECK(interval.lo == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(interval.hi == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_FALSE(interval.open_lo);
    CHECK_FALSE(interval.open_hi);
}
