#include "quadhedge/arbitrage_bounds.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace quadhedge {

namespace {

constexpr double kPriceMatchScale = 1e-9;   // node-price feasibility tolerance
constexpr double kTieScale = 1e-12;         // optimal-vertex tie detection

struct NodeLpResult {
    double value = 0.0;
    std::vector<double> distribution;  // aligned with the node's sorted edges
    bool boundary = false;             // no full-support optimizer exists
};

// max/min of sum m_k v_k over m >= 0, sum m = 1, sum m F_k = F. The optimum
// sits on a vertex with at most two support points; the reported
// distribution averages all optimal vertices, so it has full support exactly
// when an interior optimizer exists.
NodeLpResult solve_node_lp(const Node& node, const std::vector<double>& child_prices,
                           const std::vector<double>& child_values, BoundEnd end) {
    const std::size_t n = child_prices.size();
    const double tol_price = kPriceMatchScale * std::max(1.0, node.price);

    struct Vertex {
        std::vector<double> m;
        double value;
    };
    std::vector<Vertex> vertices;

    for (std::size_t k = 0; k < n; ++k) {
        if (std::abs(child_prices[k] - node.price) <= tol_price) {
            std::vector<double> m(n, 0.0);
            m[k] = 1.0;
            vertices.push_back({std::move(m), child_values[k]});
        }
    }
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t k = 0; k < n; ++k) {
            if (child_prices[j] >= child_prices[k]) continue;
            if (child_prices[j] > node.price + tol_price) continue;
            if (child_prices[k] < node.price - tol_price) continue;
            const double span = child_prices[k] - child_prices[j];
            double mj = (child_prices[k] - node.price) / span;
            double mk = (node.price - child_prices[j]) / span;
            mj = std::clamp(mj, 0.0, 1.0);
            mk = std::clamp(mk, 0.0, 1.0);
            std::vector<double> m(n, 0.0);
            m[j] = mj;
            m[k] = mk;
            vertices.push_back({std::move(m), mj * child_values[j] + mk * child_values[k]});
        }
    }

    if (vertices.empty())
        throw ArbitrageError(node.id, "child prices do not straddle the price of node " +
                                          std::to_string(node.id));

    const bool maximize = end == BoundEnd::Max;
    double best = vertices.front().value;
    for (const Vertex& v : vertices) best = maximize ? std::max(best, v.value) : std::min(best, v.value);

    NodeLpResult result;
    result.value = best;
    result.distribution.assign(n, 0.0);
    const double tie = kTieScale * std::max(1.0, std::abs(best));
    std::size_t optimal = 0;
    for (const Vertex& v : vertices) {
        if (std::abs(v.value - best) > tie) continue;
        ++optimal;
        for (std::size_t k = 0; k < n; ++k) result.distribution[k] += v.m[k];
    }
    for (double& m : result.distribution) m /= static_cast<double>(optimal);
    result.boundary =
        std::any_of(result.distribution.begin(), result.distribution.end(),
                    [](double m) { return m == 0.0; });
    return result;
}

struct Sweep {
    std::vector<Money> value;          // by node index
    WitnessMeasure witness;
};

Sweep bound_sweep(const MarketLattice& lattice, const PayoffSpec& payoff,
                  const ExercisePolicy& canon, const std::vector<bool>& alive, BoundEnd end) {
    Sweep sweep;
    sweep.value.assign(lattice.size(), 0.0);

    const Stage last = lattice.stage_count() - 1;
    for (Stage stage = last; stage >= 0; --stage) {
        for (std::size_t idx : lattice.stage_indices(stage)) {
            const Node& node = lattice.node_at(idx);
            if (canon.exercises_index(idx)) {
                sweep.value[idx] = payoff.cash_flow(node);
                continue;
            }
            if (stage == last) {
                sweep.value[idx] = 0.0;
                continue;
            }
            if (!alive[idx]) continue;  // value never read

            std::vector<double> prices, values;
            prices.reserve(node.edges.size());
            values.reserve(node.edges.size());
            for (const Edge& e : node.edges) {
                prices.push_back(lattice.node(e.to).price);
                values.push_back(sweep.value[lattice.index(e.to)]);
            }
            NodeLpResult lp = solve_node_lp(node, prices, values, end);
            sweep.value[idx] = lattice.discount(stage + 1) * lp.value;

            auto& dist = sweep.witness.distributions[node.id];
            for (std::size_t k = 0; k < node.edges.size(); ++k)
                dist[node.edges[k].to] = lp.distribution[k];
            if (lp.boundary) {
                sweep.witness.boundary = true;
                sweep.witness.boundary_nodes.push_back(node.id);
            }
        }
    }
    return sweep;
}

}  // namespace

ValueInterval value_bounds(const MarketLattice& lattice, const PayoffSpec& payoff,
                           const ExercisePolicy& policy) {
    const ExercisePolicy canon = canonicalize(policy, lattice);
    const std::vector<bool> alive = alive_reachable(lattice, canon);

    const Sweep lo = bound_sweep(lattice, payoff, canon, alive, BoundEnd::Min);
    const Sweep hi = bound_sweep(lattice, payoff, canon, alive, BoundEnd::Max);

    ValueInterval interval;
    interval.lo = lo.value[lattice.root_index()];
    interval.hi = hi.value[lattice.root_index()];
    interval.open_lo = lo.witness.boundary;
    interval.open_hi = hi.witness.boundary;
    return interval;
}

bool contains(const ValueInterval& interval, Money x) {
    const double eps = kMembershipEpsScale * std::max(1.0, std::abs(interval.hi));
    return interval.lo + eps < x && x < interval.hi - eps;
}

WitnessMeasure witness_measure(const MarketLattice& lattice, const PayoffSpec& payoff,
                               const ExercisePolicy& policy, BoundEnd end) {
    const ExercisePolicy canon = canonicalize(policy, lattice);
    const std::vector<bool> alive = alive_reachable(lattice, canon);
    return bound_sweep(lattice, payoff, canon, alive, end).witness;
}

}  // namespace quadhedge
