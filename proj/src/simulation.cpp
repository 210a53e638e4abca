#include "quadhedge/simulation.hpp"

#include <atomic>
#include <cmath>
#include <thread>

namespace quadhedge {

namespace {

// Counter-based generator: a fresh SplitMix64 stream per (seed, path index).
struct SplitMix64 {
    std::uint64_t state;

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
};

SplitMix64 path_stream(std::uint64_t seed, std::uint64_t path_index) {
    SplitMix64 mix{seed ^ (0xD1B54A32D192ED03ull * (path_index + 1))};
    mix.next();
    return mix;
}

// Cumulative child probabilities per node, children in id order.
struct SamplingTables {
    std::vector<std::vector<double>> cumulative;  // by node index
    std::vector<double> dinv_to_last;             // 1 / D_{i,I-1} by stage

    explicit SamplingTables(const MarketLattice& lattice) {
        cumulative.resize(lattice.size());
        for (std::size_t i = 0; i < lattice.size(); ++i) {
            double acc = 0.0;
            for (const Edge& e : lattice.node_at(i).edges) {
                acc += e.prob;
                cumulative[i].push_back(acc);
            }
            if (!cumulative[i].empty()) cumulative[i].back() = 1.0;
        }
        const Stage last = lattice.stage_count() - 1;
        dinv_to_last.resize(static_cast<std::size_t>(last) + 1);
        for (Stage s = 0; s <= last; ++s)
            dinv_to_last[static_cast<std::size_t>(s)] = 1.0 / lattice.compound_discount(s, last);
    }

    std::size_t draw_child(const MarketLattice& lattice, std::size_t idx, double u) const {
        const auto& cum = cumulative[idx];
        std::size_t k = 0;
        while (k + 1 < cum.size() && u >= cum[k]) ++k;
        return lattice.index(lattice.node_at(idx).edges[k].to);
    }
};

PathRecord simulate_one(const MarketLattice& lattice, const PayoffSpec& payoff,
                        const ExercisePolicy& policy, const HedgeCoefficients& coeffs,
                        const SamplingTables& tables, Money v0, std::uint64_t seed,
                        std::uint64_t path_index) {
    SplitMix64 rng = path_stream(seed, path_index);
    std::size_t idx = lattice.root_index();
    Money value = v0;
    const Stage last = lattice.stage_count() - 1;

    PathRecord rec;
    rec.path_id = path_index;
    for (;;) {
        const Node& node = lattice.node_at(idx);
        if (policy.exercises_index(idx)) {
            rec.iota = node.stage;
            rec.exercised = true;
            rec.cashflow = payoff.cash_flow(node);
            break;
        }
        if (node.stage == last) {
            rec.iota = last;
            rec.exercised = false;
            rec.cashflow = 0.0;
            break;
        }
        const NodeCoefficients& k = coeffs.at_index(idx);
        const double d = lattice.discount(node.stage + 1);
        const double theta = k.p - k.q * value / d;
        const std::size_t child = tables.draw_child(lattice, idx, rng.uniform());
        value = value / d + (lattice.node_at(child).price - node.price) * theta;
        idx = child;
    }
    rec.terminal_wealth = value;
    rec.error = tables.dinv_to_last[static_cast<std::size_t>(rec.iota)] * (rec.cashflow - value);
    return rec;
}

struct Accumulator {
    double sum_e = 0.0;
    double sum_e2 = 0.0;
    double sum_e4 = 0.0;
    double sum_u2 = 0.0;
    double sum_u4 = 0.0;

    void add(double e, double u) {
        const double e2 = e * e;
        const double u2 = u * u;
        sum_e += e;
        sum_e2 += e2;
        sum_e4 += e2 * e2;
        sum_u2 += u2;
        sum_u4 += u2 * u2;
    }

    void fold(const Accumulator& o) {
        sum_e += o.sum_e;
        sum_e2 += o.sum_e2;
        sum_e4 += o.sum_e4;
        sum_u2 += o.sum_u2;
        sum_u4 += o.sum_u4;
    }
};

PnlStats finalize(const Accumulator& acc, std::uint64_t n) {
    PnlStats stats;
    stats.path_count = n;
    if (n == 0) return stats;
    const double dn = static_cast<double>(n);
    stats.mean_error = acc.sum_e / dn;
    stats.mean_squared_error = acc.sum_e2 / dn;
    stats.unhedged_second_moment = acc.sum_u2 / dn;
    const double var_e = std::max(0.0, acc.sum_e2 / dn - stats.mean_error * stats.mean_error);
    const double var_e2 =
        std::max(0.0, acc.sum_e4 / dn - stats.mean_squared_error * stats.mean_squared_error);
    const double var_u2 =
        std::max(0.0, acc.sum_u4 / dn - stats.unhedged_second_moment * stats.unhedged_second_moment);
    stats.se_mean = std::sqrt(var_e / dn);
    stats.se_mse = std::sqrt(var_e2 / dn);
    stats.se_unhedged = std::sqrt(var_u2 / dn);
    return stats;
}

constexpr std::uint64_t kChunk = 16384;  // reduction blocks, fixed across thread counts

}  // namespace

std::vector<Path> sample_paths(const MarketLattice& lattice, std::uint64_t n,
                               std::uint64_t seed) {
    const SamplingTables tables(lattice);
    const Stage last = lattice.stage_count() - 1;
    std::vector<Path> paths;
    paths.reserve(n);
    for (std::uint64_t k = 0; k < n; ++k) {
        SplitMix64 rng = path_stream(seed, k);
        Path path;
        std::size_t idx = lattice.root_index();
        path.nodes.push_back(lattice.node_at(idx).id);
        for (Stage s = 0; s < last; ++s) {
            idx = tables.draw_child(lattice, idx, rng.uniform());
            path.nodes.push_back(lattice.node_at(idx).id);
        }
        paths.push_back(std::move(path));
    }
    return paths;
}

PnlStats run_hedge(const MarketLattice& lattice, const PayoffSpec& payoff,
                   const ExercisePolicy& policy, const HedgeCoefficients& coeffs,
                   const SimulationConfig& config,
                   const std::function<void(const PathRecord&)>& sink) {
    if (coeffs.size() != lattice.size())
        throw ValidationError("coefficient table does not match the lattice");
    if (config.path_count < 1) throw ValidationError("path_count must be >= 1");
    const ExercisePolicy canon = canonicalize(policy, lattice);
    const SamplingTables tables(lattice);
    const double dinv0 = tables.dinv_to_last[0];
    const std::uint64_t n = config.path_count;

    const std::uint64_t chunks = (n + kChunk - 1) / kChunk;
    std::vector<Accumulator> partial(chunks);

    auto run_chunk = [&](std::uint64_t chunk) {
        const std::uint64_t begin = chunk * kChunk;
        const std::uint64_t end = std::min(n, begin + kChunk);
        Accumulator acc;
        for (std::uint64_t k = begin; k < end; ++k) {
            PathRecord rec = simulate_one(lattice, payoff, canon, coeffs, tables,
                                          config.initial_capital, config.seed, k);
            const double unhedged =
                tables.dinv_to_last[static_cast<std::size_t>(rec.iota)] * rec.cashflow -
                dinv0 * config.initial_capital;
            acc.add(rec.error, unhedged);
            if (sink) sink(rec);
        }
        partial[chunk] = acc;
    };

    const int threads = sink ? 1 : std::max(1, config.threads);
    if (threads == 1 || chunks == 1) {
        for (std::uint64_t chunk = 0; chunk < chunks; ++chunk) run_chunk(chunk);
    } else {
        std::atomic<std::uint64_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(threads));
        for (int t = 0; t < threads; ++t)
            pool.emplace_back([&] {
                for (;;) {
                    const std::uint64_t chunk = next.fetch_add(1);
                    if (chunk >= chunks) return;
                    run_chunk(chunk);
                }
            });
        for (std::thread& t : pool) t.join();
    }

    Accumulator total;
    for (const Accumulator& acc : partial) total.fold(acc);  // fixed order
    return finalize(total, n);
}

PnlStats run_hedge(const MarketLattice& lattice, const PayoffSpec& payoff,
                   const ExercisePolicy& policy, const HedgeCoefficients& coeffs,
                   const SimulationConfig& config) {
    return run_hedge(lattice, payoff, policy, coeffs, config, nullptr);
}

PnlStats evaluate_hedge_exact(const MarketLattice& lattice, const PayoffSpec& payoff,
                              const ExercisePolicy& policy, const HedgeCoefficients& coeffs,
                              Money initial_capital) {
    if (coeffs.size() != lattice.size())
        throw ValidationError("coefficient table does not match the lattice");
    const ExercisePolicy canon = canonicalize(policy, lattice);
    const SamplingTables tables(lattice);
    const double dinv0 = tables.dinv_to_last[0];
    const Stage last = lattice.stage_count() - 1;

    Accumulator acc;
    std::uint64_t paths = 0;
    auto walk = [&](auto&& self, std::size_t idx, double prob, Money value) -> void {
        const Node& node = lattice.node_at(idx);
        const bool exercised = canon.exercises_index(idx);
        if (exercised || node.stage == last) {
            const Money cash = exercised ? payoff.cash_flow(node) : 0.0;
            const double dinv = tables.dinv_to_last[static_cast<std::size_t>(node.stage)];
            const double e = dinv * (cash - value);
            const double u = dinv * cash - dinv0 * initial_capital;
            acc.sum_e += prob * e;
            acc.sum_e2 += prob * e * e;
            acc.sum_e4 += prob * e * e * e * e;
            acc.sum_u2 += prob * u * u;
            acc.sum_u4 += prob * u * u * u * u;
            ++paths;
            return;
        }
        const NodeCoefficients& k = coeffs.at_index(idx);
        const double d = lattice.discount(node.stage + 1);
        const double theta = k.p - k.q * value / d;
        for (const Edge& e : node.edges) {
            const std::size_t child = lattice.index(e.to);
            const Money next = value / d + (lattice.node_at(child).price - node.price) * theta;
            self(self, child, prob * e.prob, next);
        }
    };
    walk(walk, lattice.root_index(), 1.0, initial_capital);

    // Probability-weighted sums are already expectations; no sampling error.
    PnlStats stats;
    stats.path_count = paths;
    stats.mean_error = acc.sum_e;
    stats.mean_squared_error = acc.sum_e2;
    stats.unhedged_second_moment = acc.sum_u2;
    return stats;
}

HedgeSummary summarize(const PnlStats& stats, double predicted_mse) {
    HedgeSummary summary;
    summary.empirical_mse = stats.mean_squared_error;
    summary.predicted_mse = predicted_mse;
    summary.standard_error = stats.se_mse;
    summary.z = stats.se_mse > 0.0
                    ? (stats.mean_squared_error - predicted_mse) / stats.se_mse
                    : 0.0;
    summary.pass = std::abs(summary.z) <= 3.0;
    return summary;
}

}  // namespace quadhedge
