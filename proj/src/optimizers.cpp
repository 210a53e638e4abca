#include "quadhedge/optimizers.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <string>

namespace quadhedge {

RNMeasureSpec RNMeasureSpec::from_json(const nlohmann::json& doc) {
    std::map<NodeId, std::map<NodeId, double>> entries;
    try {
        for (const auto& je : doc.at("edges")) {
            const NodeId from = je.at("from").get<NodeId>();
            const NodeId to = je.at("to").get<NodeId>();
            entries[from][to] = je.at("p").get<double>();
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("malformed measure document: ") + e.what());
    }
    return RNMeasureSpec(std::move(entries));
}

RNMeasureSpec RNMeasureSpec::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open measure file: " + path);
    try {
        return from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("malformed measure document: ") + e.what());
    }
}

nlohmann::json RNMeasureSpec::to_json() const {
    nlohmann::json edges = nlohmann::json::array();
    for (const auto& [from, children] : entries_)
        for (const auto& [to, p] : children)
            edges.push_back({{"from", from}, {"to", to}, {"p", p}});
    return {{"edges", edges}};
}

double RNMeasureSpec::prob(NodeId from, NodeId to) const {
    auto it = entries_.find(from);
    if (it != entries_.end()) {
        auto jt = it->second.find(to);
        if (jt != it->second.end()) return jt->second;
    }
    throw ValidationError("measure has no probability for edge " + std::to_string(from) + " -> " +
                          std::to_string(to));
}

ValidationReport validate_rn_measure(const MarketLattice& lattice, const RNMeasureSpec& rn) {
    ValidationReport report;
    auto add = [&](std::string code, std::string message, NodeId node) {
        report.issues.push_back({std::move(code), std::move(message), node});
    };

    for (const auto& [from, children] : rn.entries()) {
        if (!lattice.has_node(from)) {
            add("unknown_node", "measure entry for unknown node", from);
            continue;
        }
        const Node& node = lattice.node(from);
        std::set<NodeId> child_ids;
        for (const Edge& e : node.edges) child_ids.insert(e.to);
        for (const auto& [to, p] : children) {
            if (!child_ids.count(to)) {
                add("unknown_edge", "measure entry for nonexistent edge to " + std::to_string(to),
                    from);
                continue;
            }
            if (!std::isfinite(p) || p <= 0.0)
                add("non-positive probability",
                    "probability " + std::to_string(p) + " on edge to " + std::to_string(to),
                    from);
        }
    }

    for (std::size_t i = 0; i < lattice.size(); ++i) {
        const Node& node = lattice.node_at(i);
        if (lattice.terminal(node)) continue;

        auto it = rn.entries().find(node.id);
        bool covered = true;
        for (const Edge& e : node.edges)
            if (it == rn.entries().end() || !it->second.count(e.to)) {
                add("missing_edge", "no probability for edge to " + std::to_string(e.to), node.id);
                covered = false;
            }
        if (!covered) continue;

        double sum = 0.0, priced = 0.0;
        bool positive = true;
        for (const Edge& e : node.edges) {
            const double p = it->second.at(e.to);
            if (!std::isfinite(p) || p <= 0.0) positive = false;
            sum += p;
            priced += p * lattice.node(e.to).price;
        }
        if (!positive) continue;  // already reported above
        if (std::abs(sum - 1.0) > kRnSumTol)
            add("not_normalized", "probabilities sum to " + std::to_string(sum), node.id);
        const double residual = priced - node.price;
        if (std::abs(residual) > kRnMartingaleScale * node.price)
            add("martingale_violation",
                "sum p * child price - price = " + std::to_string(residual), node.id);
    }
    return report;
}

namespace {

void require_valid_rn(const MarketLattice& lattice, const RNMeasureSpec& rn) {
    ValidationReport report = validate_rn_measure(lattice, rn);
    if (!report.ok())
        throw ValidationError("invalid risk-neutral measure: " + report.issues.front().code +
                              " at node " + std::to_string(report.issues.front().node));
}

}  // namespace

OptimizationResult optimize_vo_naive(const MarketLattice& lattice, const PayoffSpec& payoff,
                                     std::uint64_t cap) {
    bool have_best = false;
    ExercisePolicy best = ExercisePolicy::never(lattice);
    Money best_value = 0.0;
    std::size_t best_count = 0;
    OptimizationDiagnostics diag;

    enumerate_policies(lattice, cap, [&](const ExercisePolicy& policy) {
        const HedgeCoefficients coeffs = compute_coefficients(lattice, payoff, policy);
        const Money value = optimal_initial_capital(lattice, coeffs);
        ++diag.policies_evaluated;
        const std::size_t count = policy.exercise_count();
        if (!have_best || value > best_value) {
            have_best = true;
            best = policy;
            best_value = value;
            best_count = count;
        } else if (value == best_value) {
            ++diag.ties;
            if (count < best_count) {
                best = policy;
                best_count = count;
            }
        }
    });

    OptimizationResult result{best, best_value, {}, diag};
    return result;
}

namespace {

// Single backward sweep: at each node the decision is subtree-local, so the
// stage-wise re-optimization at any node is exactly the sweep's decision
// there, before canonicalization.
struct TcSolve {
    std::vector<NodeCoefficients> table;
    std::vector<std::uint8_t> raw_decisions;  // by node index
    std::map<NodeId, Money> values;
    OptimizationDiagnostics diag;
};

TcSolve tc_solve(const MarketLattice& lattice, const PayoffSpec& payoff) {
    TcSolve out;
    out.table.resize(lattice.size());
    out.raw_decisions.assign(lattice.size(), 0);

    const Stage last = lattice.stage_count() - 1;
    for (Stage stage = last; stage >= 0; --stage) {
        for (std::size_t idx : lattice.stage_indices(stage)) {
            const Node& node = lattice.node_at(idx);
            const Money cash = payoff.cash_flow(node);
            ++out.diag.policies_evaluated;
            bool exercise;
            NodeCoefficients cont;
            if (stage == last) {
                exercise = cash > 0.0;  // continue on ties
            } else {
                cont = detail::step_continuation(lattice, idx, out.table, /*strict=*/true);
                exercise = cash > cont.b;
                if (cash == cont.b && cash > 0.0) ++out.diag.ties;
            }
            if (exercise)
                out.table[idx] = detail::stopped_coefficients(lattice, node, payoff, true);
            else if (stage == last)
                out.table[idx] = detail::stopped_coefficients(lattice, node, payoff, false);
            else
                out.table[idx] = cont;
            out.raw_decisions[idx] = exercise ? 1 : 0;
            out.values[node.id] = out.table[idx].b;
        }
    }
    return out;
}

}  // namespace

OptimizationResult optimize_vo_time_consistent(const MarketLattice& lattice,
                                               const PayoffSpec& payoff) {
    TcSolve solve = tc_solve(lattice, payoff);

    std::set<NodeId> ids;
    for (std::size_t i = 0; i < lattice.size(); ++i)
        if (solve.raw_decisions[i]) ids.insert(lattice.node_at(i).id);
    ExercisePolicy policy = canonicalize(ExercisePolicy(lattice, ids), lattice);
    const Money value = solve.table[lattice.root_index()].b;
    return OptimizationResult{policy, value, std::move(solve.values), solve.diag};
}

Money rn_policy_value(const MarketLattice& lattice, const PayoffSpec& payoff,
                      const ExercisePolicy& policy, const RNMeasureSpec& rn) {
    require_valid_rn(lattice, rn);
    const ExercisePolicy canon = canonicalize(policy, lattice);

    std::vector<Money> value(lattice.size(), 0.0);
    const Stage last = lattice.stage_count() - 1;
    for (Stage stage = last; stage >= 0; --stage) {
        for (std::size_t idx : lattice.stage_indices(stage)) {
            const Node& node = lattice.node_at(idx);
            if (canon.exercises_index(idx)) {
                value[idx] = payoff.cash_flow(node);
            } else if (stage == last) {
                value[idx] = 0.0;
            } else {
                Money expected = 0.0;
                for (const Edge& e : node.edges)
                    expected += rn.prob(node.id, e.to) * value[lattice.index(e.to)];
                value[idx] = lattice.discount(stage + 1) * expected;
            }
        }
    }
    return value[lattice.root_index()];
}

OptimizationResult optimize_risk_neutral(const MarketLattice& lattice, const PayoffSpec& payoff,
                                         const RNMeasureSpec& rn) {
    require_valid_rn(lattice, rn);

    std::vector<Money> value(lattice.size(), 0.0);
    std::vector<std::uint8_t> decisions(lattice.size(), 0);
    std::map<NodeId, Money> values;
    OptimizationDiagnostics diag;

    const Stage last = lattice.stage_count() - 1;
    for (Stage stage = last; stage >= 0; --stage) {
        for (std::size_t idx : lattice.stage_indices(stage)) {
            const Node& node = lattice.node_at(idx);
            const Money cash = payoff.cash_flow(node);
            ++diag.policies_evaluated;
            Money continuation = 0.0;
            if (stage != last) {
                for (const Edge& e : node.edges)
                    continuation += rn.prob(node.id, e.to) * value[lattice.index(e.to)];
                continuation *= lattice.discount(stage + 1);
            }
            const bool exercise = cash > continuation;  // continue on ties
            if (cash == continuation && cash > 0.0) ++diag.ties;
            decisions[idx] = exercise ? 1 : 0;
            value[idx] = exercise ? cash : continuation;
            values[node.id] = value[idx];
        }
    }

    std::set<NodeId> ids;
    for (std::size_t i = 0; i < lattice.size(); ++i)
        if (decisions[i]) ids.insert(lattice.node_at(i).id);
    ExercisePolicy policy = canonicalize(ExercisePolicy(lattice, ids), lattice);
    return OptimizationResult{policy, value[lattice.root_index()], std::move(values), diag};
}

std::vector<NodeId> tc_mismatches(const MarketLattice& lattice, const PayoffSpec& payoff,
                                  const ExercisePolicy& policy) {
    const ExercisePolicy canon = canonicalize(policy, lattice);
    const TcSolve solve = tc_solve(lattice, payoff);
    const std::vector<bool> alive = alive_reachable(lattice, canon);

    std::vector<NodeId> mismatches;
    for (Stage s = 0; s < lattice.stage_count(); ++s)
        for (std::size_t idx : lattice.stage_indices(s)) {
            if (!alive[idx]) continue;
            if (canon.exercises_index(idx) != (solve.raw_decisions[idx] != 0))
                mismatches.push_back(lattice.node_at(idx).id);
        }
    return mismatches;
}

}  // namespace quadhedge
