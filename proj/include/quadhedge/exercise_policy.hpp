#pragma once

#include <cstdint>
#include <functional>
#include <set>
#include <vector>

#include "json.hpp"

#include "quadhedge/market_model.hpp"

namespace quadhedge {

/// Root-to-terminal realization of the price process: one node id per stage.
struct Path {
    std::vector<NodeId> nodes;
};

bool path_valid(const MarketLattice& lattice, const Path& path);

/// All root-to-terminal paths, children visited in id order.
std::vector<Path> enumerate_paths(const MarketLattice& lattice);

/// Markov exercise rule: one binary decision per node. Canonical form keeps
/// zeros at every node that cannot be reached while the option is alive.
class ExercisePolicy {
public:
    ExercisePolicy(const MarketLattice& lattice, const std::set<NodeId>& exercise_ids);
    static ExercisePolicy never(const MarketLattice& lattice);

    static ExercisePolicy from_json(const MarketLattice& lattice, const nlohmann::json& doc);
    static ExercisePolicy load_file(const MarketLattice& lattice, const std::string& path);
    nlohmann::json to_json(const MarketLattice& lattice) const;

    bool exercises_index(std::size_t index) const { return decisions_[index] != 0; }
    bool exercises(const MarketLattice& lattice, NodeId id) const;
    std::size_t size() const { return decisions_.size(); }
    std::set<NodeId> exercise_ids(const MarketLattice& lattice) const;
    std::size_t exercise_count() const;

    bool operator==(const ExercisePolicy&) const = default;

private:
    friend ExercisePolicy canonicalize(const ExercisePolicy&, const MarketLattice&);
    friend void enumerate_policies(const MarketLattice&, std::uint64_t,
                                   const std::function<void(const ExercisePolicy&)>&);
    explicit ExercisePolicy(std::vector<std::uint8_t> decisions)
        : decisions_(std::move(decisions)) {}

    std::vector<std::uint8_t> decisions_;  // by lattice node index
};

/// Nodes reachable from the root before the option has been exercised,
/// by node index. Includes nodes where the policy exercises.
std::vector<bool> alive_reachable(const MarketLattice& lattice, const ExercisePolicy& policy);

/// Zeroes decisions at nodes unreachable while alive. Realized cash flows on
/// every path are unchanged.
ExercisePolicy canonicalize(const ExercisePolicy& policy, const MarketLattice& lattice);

struct Stop {
    Stage stage = 0;      // iota
    bool exercised = false;
};

/// First stage with decision 1 along the path; expiry at I-1 otherwise.
Stop stopping_stage(const ExercisePolicy& policy, const MarketLattice& lattice, const Path& path);

struct StopCash {
    Stage stage = 0;
    Money cash = 0.0;
};

/// (iota, C_iota) when exercised, (I-1, 0) on expiry.
StopCash policy_cash_flow(const ExercisePolicy& policy, const MarketLattice& lattice,
                          const PayoffSpec& payoff, const Path& path);

/// Streams every canonical policy exactly once, in lexicographic order over
/// node ids sorted by (stage, id) with 0 before 1. Throws CapacityError when
/// 2^(node count) exceeds cap.
void enumerate_policies(const MarketLattice& lattice, std::uint64_t cap,
                        const std::function<void(const ExercisePolicy&)>& sink);

std::vector<ExercisePolicy> enumerate_policies(const MarketLattice& lattice, std::uint64_t cap);

}  // namespace quadhedge
