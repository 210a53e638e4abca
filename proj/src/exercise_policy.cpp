#include "quadhedge/exercise_policy.hpp"

#include <algorithm>
#include <fstream>

namespace quadhedge {

bool path_valid(const MarketLattice& lattice, const Path& path) {
    if (path.nodes.size() != static_cast<std::size_t>(lattice.stage_count())) return false;
    if (path.nodes.front() != lattice.root()) return false;
    for (std::size_t k = 0; k + 1 < path.nodes.size(); ++k) {
        if (!lattice.has_node(path.nodes[k])) return false;
        const Node& n = lattice.node(path.nodes[k]);
        bool linked = std::any_of(n.edges.begin(), n.edges.end(),
                                  [&](const Edge& e) { return e.to == path.nodes[k + 1]; });
        if (!linked) return false;
    }
    return lattice.has_node(path.nodes.back());
}

std::vector<Path> enumerate_paths(const MarketLattice& lattice) {
    std::vector<Path> paths;
    std::vector<NodeId> prefix;
    auto walk = [&](auto&& self, std::size_t idx) -> void {
        const Node& n = lattice.node_at(idx);
        prefix.push_back(n.id);
        if (lattice.terminal(n)) {
            paths.push_back({prefix});
        } else {
            for (const Edge& e : n.edges) self(self, lattice.index(e.to));
        }
        prefix.pop_back();
    };
    walk(walk, lattice.root_index());
    return paths;
}

ExercisePolicy::ExercisePolicy(const MarketLattice& lattice, const std::set<NodeId>& exercise_ids)
    : decisions_(lattice.size(), 0) {
    for (NodeId id : exercise_ids) decisions_[lattice.index(id)] = 1;
}

ExercisePolicy ExercisePolicy::never(const MarketLattice& lattice) {
    return ExercisePolicy(std::vector<std::uint8_t>(lattice.size(), 0));
}

bool ExercisePolicy::exercises(const MarketLattice& lattice, NodeId id) const {
    return exercises_index(lattice.index(id));
}

std::set<NodeId> ExercisePolicy::exercise_ids(const MarketLattice& lattice) const {
    std::set<NodeId> ids;
    for (std::size_t i = 0; i < decisions_.size(); ++i)
        if (decisions_[i]) ids.insert(lattice.node_at(i).id);
    return ids;
}

std::size_t ExercisePolicy::exercise_count() const {
    return static_cast<std::size_t>(std::count(decisions_.begin(), decisions_.end(), 1));
}

ExercisePolicy ExercisePolicy::from_json(const MarketLattice& lattice,
                                         const nlohmann::json& doc) {
    std::set<NodeId> ids;
    try {
        for (const auto& id : doc.at("exercise")) ids.insert(id.get<NodeId>());
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("malformed policy document: ") + e.what());
    }
    return ExercisePolicy(lattice, ids);
}

ExercisePolicy ExercisePolicy::load_file(const MarketLattice& lattice, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open policy file: " + path);
    try {
        return from_json(lattice, nlohmann::json::parse(in));
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("malformed policy document: ") + e.what());
    }
}

nlohmann::json ExercisePolicy::to_json(const MarketLattice& lattice) const {
    nlohmann::json ids = nlohmann::json::array();
    for (NodeId id : exercise_ids(lattice)) ids.push_back(id);
    return {{"exercise", ids}};
}

std::vector<bool> alive_reachable(const MarketLattice& lattice, const ExercisePolicy& policy) {
    if (policy.size() != lattice.size())
        throw ValidationError("policy does not match lattice node count");
    std::vector<bool> alive(lattice.size(), false);
    alive[lattice.root_index()] = true;
    for (Stage s = 0; s < lattice.stage_count(); ++s) {
        for (std::size_t idx : lattice.stage_indices(s)) {
            if (!alive[idx] || policy.exercises_index(idx)) continue;
            for (const Edge& e : lattice.node_at(idx).edges) alive[lattice.index(e.to)] = true;
        }
    }
    return alive;
}

ExercisePolicy canonicalize(const ExercisePolicy& policy, const MarketLattice& lattice) {
    std::vector<bool> alive = alive_reachable(lattice, policy);
    std::vector<std::uint8_t> decisions(policy.decisions_);
    for (std::size_t i = 0; i < decisions.size(); ++i)
        if (!alive[i]) decisions[i] = 0;
    return ExercisePolicy(std::move(decisions));
}

Stop stopping_stage(const ExercisePolicy& policy, const MarketLattice& lattice,
                    const Path& path) {
    for (std::size_t k = 0; k < path.nodes.size(); ++k)
        if (policy.exercises(lattice, path.nodes[k]))
            return {static_cast<Stage>(k), true};
    return {lattice.stage_count() - 1, false};
}

StopCash policy_cash_flow(const ExercisePolicy& policy, const MarketLattice& lattice,
                          const PayoffSpec& payoff, const Path& path) {
    Stop stop = stopping_stage(policy, lattice, path);
    if (!stop.exercised) return {stop.stage, 0.0};
    return {stop.stage, payoff.cash_flow(lattice.node(path.nodes[static_cast<std::size_t>(stop.stage)]))};
}

void enumerate_policies(const MarketLattice& lattice, std::uint64_t cap,
                        const std::function<void(const ExercisePolicy&)>& sink) {
    const std::size_t n = lattice.size();
    if (n >= 64 || (std::uint64_t{1} << n) > cap) throw CapacityError(n, cap);

    // Node positions in (stage, id) order; every parent precedes its children.
    std::vector<std::size_t> order;
    order.reserve(n);
    for (Stage s = 0; s < lattice.stage_count(); ++s)
        for (std::size_t idx : lattice.stage_indices(s)) order.push_back(idx);

    std::vector<std::uint8_t> bits(n, 0);
    std::vector<std::uint8_t> alive(n, 0);

    auto rec = [&](auto&& self, std::size_t k) -> void {
        if (k == n) {
            sink(ExercisePolicy(bits));
            return;
        }
        const std::size_t idx = order[k];
        bool is_alive = idx == lattice.root_index();
        for (std::size_t p : lattice.parents(idx))
            if (alive[p] && bits[p] == 0) is_alive = true;
        alive[idx] = is_alive ? 1 : 0;

        bits[idx] = 0;
        self(self, k + 1);
        if (is_alive) {
            bits[idx] = 1;
            self(self, k + 1);
            bits[idx] = 0;
        }
    };
    rec(rec, 0);
}

std::vector<ExercisePolicy> enumerate_policies(const MarketLattice& lattice, std::uint64_t cap) {
    std::vector<ExercisePolicy> out;
    enumerate_policies(lattice, cap, [&](const ExercisePolicy& p) { out.push_back(p); });
    return out;
}

}  // namespace quadhedge
