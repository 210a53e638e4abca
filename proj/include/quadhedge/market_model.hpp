#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "quadhedge/errors.hpp"

namespace quadhedge {

using Money = double;
using Stage = int;

struct Edge {
    NodeId to = -1;
    double prob = 0.0;
};

struct Node {
    NodeId id = -1;
    Stage stage = 0;
    Money price = 0.0;
    std::vector<Edge> edges;  // kept sorted by child id once validated
};

/// Raw, possibly-invalid lattice contents as read from a file.
struct LatticeData {
    Stage stages = 0;                 // I
    std::vector<double> discounts;    // D_1 .. D_{I-1}
    std::vector<Node> nodes;
};

struct ValidationIssue {
    std::string code;
    std::string message;
    NodeId node = -1;
};

struct ValidationReport {
    std::vector<ValidationIssue> issues;

    bool ok() const { return issues.empty(); }
    std::string str() const;
};

ValidationReport validate_lattice(const LatticeData& data);

/// Stage-layered tree/DAG of futures prices under the statistical measure.
/// Immutable once constructed; construction rejects any invariant violation.
class MarketLattice {
public:
    explicit MarketLattice(LatticeData data);

    static MarketLattice load(std::istream& in);
    static MarketLattice load_file(const std::string& path);
    static MarketLattice from_json(const nlohmann::json& doc);
    nlohmann::json to_json() const;

    Stage stage_count() const { return data_.stages; }
    const std::vector<double>& discounts() const { return data_.discounts; }

    /// D_period, period in 1..I-1.
    double discount(Stage period) const;

    /// D_{i,j} = prod_{i'=i+1..j} D_{i'}; D_{i,i} = 1.
    double compound_discount(Stage i, Stage j) const;

    std::size_t size() const { return data_.nodes.size(); }
    NodeId root() const { return root_; }
    std::size_t root_index() const { return index(root_); }

    const Node& node(NodeId id) const { return data_.nodes[index(id)]; }
    const Node& node_at(std::size_t index) const { return data_.nodes[index]; }
    std::size_t index(NodeId id) const;
    bool has_node(NodeId id) const;
    bool terminal(const Node& n) const { return n.stage == data_.stages - 1; }

    /// Node indices at a stage, ordered by id.
    const std::vector<std::size_t>& stage_indices(Stage stage) const;
    /// Parent node indices, ordered.
    const std::vector<std::size_t>& parents(std::size_t index) const;

private:
    LatticeData data_;
    NodeId root_ = -1;
    std::map<NodeId, std::size_t> index_;
    std::vector<std::vector<std::size_t>> by_stage_;
    std::vector<std::vector<std::size_t>> parents_;
};

/// Parses the lattice document without validating model invariants.
LatticeData parse_lattice(std::istream& in);
LatticeData parse_lattice(const nlohmann::json& doc);

enum class PayoffKind { Call, Put, Table };

/// Exercise cash flow C_i(F_i) specification.
class PayoffSpec {
public:
    static PayoffSpec call(Money strike);
    static PayoffSpec put(Money strike);
    static PayoffSpec table(std::map<NodeId, Money> values);

    static PayoffSpec load(std::istream& in);
    static PayoffSpec load_file(const std::string& path);
    static PayoffSpec from_json(const nlohmann::json& doc);
    nlohmann::json to_json() const;

    PayoffKind kind() const { return kind_; }
    Money strike() const { return strike_; }
    const std::map<NodeId, Money>& values() const { return values_; }

    /// C_i(F_i) at the node; always >= 0 on valid inputs.
    Money cash_flow(const Node& node) const;

    /// Nonnegativity everywhere and, for tables, full node coverage.
    ValidationReport validate(const MarketLattice& lattice) const;

private:
    PayoffSpec() = default;

    PayoffKind kind_ = PayoffKind::Call;
    Money strike_ = 0.0;
    std::map<NodeId, Money> values_;
};

}  // namespace quadhedge
