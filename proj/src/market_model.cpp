#include "quadhedge/market_model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <fstream>
#include <set>
#include <sstream>

namespace quadhedge {

namespace {

constexpr double kProbSumTol = 1e-12;

std::string node_tag(NodeId id) { return "node " + std::to_string(id); }

}  // namespace

std::string ValidationReport::str() const {
    std::ostringstream os;
    for (const auto& issue : issues) {
        os << issue.code;
        if (issue.node >= 0) os << " at node " << issue.node;
        os << ": " << issue.message << "\n";
    }
    return os.str();
}

ValidationReport validate_lattice(const LatticeData& data) {
    ValidationReport report;
    auto add = [&](std::string code, std::string message, NodeId node = -1) {
        report.issues.push_back({std::move(code), std::move(message), node});
    };

    if (data.stages < 1) {
        add("bad_stages", "stage count must be >= 1, got " + std::to_string(data.stages));
        return report;
    }
    if (static_cast<Stage>(data.discounts.size()) != data.stages - 1) {
        add("bad_discounts", "expected " + std::to_string(data.stages - 1) +
                                 " discount factors, got " + std::to_string(data.discounts.size()));
    }
    for (std::size_t k = 0; k < data.discounts.size(); ++k) {
        const double d = data.discounts[k];
        if (!std::isfinite(d) || d <= 0.0 || d > 1.0)
            add("bad_discount", "discount D_" + std::to_string(k + 1) + " must lie in (0,1]");
    }

    std::map<NodeId, std::size_t> index;
    for (std::size_t i = 0; i < data.nodes.size(); ++i) {
        const Node& n = data.nodes[i];
        if (n.id < 0) add("bad_id", "node id must be >= 0", n.id);
        if (!index.emplace(n.id, i).second) add("duplicate_id", "duplicate node id", n.id);
        if (n.stage < 0 || n.stage >= data.stages)
            add("bad_stage", "stage " + std::to_string(n.stage) + " outside 0.." +
                                 std::to_string(data.stages - 1), n.id);
        if (!std::isfinite(n.price) || n.price < 0.0)
            add("price < 0", "price must be finite and >= 0", n.id);
    }

    std::size_t roots = 0;
    for (const Node& n : data.nodes)
        if (n.stage == 0) ++roots;
    if (roots != 1)
        add("bad_root", "expected exactly one node at stage 0, found " + std::to_string(roots));

    for (const Node& n : data.nodes) {
        const bool terminal = n.stage == data.stages - 1;
        if (terminal && !n.edges.empty())
            add("terminal_edges", "terminal node has outgoing edges", n.id);
        if (!terminal && n.edges.empty())
            add("missing_edges", "non-terminal node has no outgoing edges", n.id);

        double prob_sum = 0.0;
        std::set<NodeId> seen;
        bool edges_ok = !n.edges.empty();
        for (const Edge& e : n.edges) {
            auto it = index.find(e.to);
            if (it == index.end()) {
                add("unknown_child", "edge to unknown " + node_tag(e.to), n.id);
                edges_ok = false;
                continue;
            }
            if (!seen.insert(e.to).second)
                add("duplicate_edge", "duplicate edge to " + node_tag(e.to), n.id);
            if (data.nodes[it->second].stage != n.stage + 1) {
                add("bad_edge_stage", "edge to " + node_tag(e.to) + " is not one stage ahead", n.id);
                edges_ok = false;
            }
            if (!std::isfinite(e.prob) || e.prob <= 0.0 || e.prob > 1.0) {
                add("bad_probability", "edge probability must lie in (0,1]", n.id);
                edges_ok = false;
            }
            prob_sum += e.prob;
        }
        if (edges_ok && std::abs(prob_sum - 1.0) > kProbSumTol)
            add("probabilities do not sum to 1",
                "outgoing probabilities sum to " + std::to_string(prob_sum), n.id);
    }

    // Reachability from the root, following only well-formed edges.
    if (roots == 1 && report.issues.empty()) {
        std::set<NodeId> reachable;
        std::deque<NodeId> queue;
        for (const Node& n : data.nodes)
            if (n.stage == 0) queue.push_back(n.id);
        while (!queue.empty()) {
            NodeId id = queue.front();
            queue.pop_front();
            if (!reachable.insert(id).second) continue;
            for (const Edge& e : data.nodes[index.at(id)].edges) queue.push_back(e.to);
        }
        for (const Node& n : data.nodes)
            if (!reachable.count(n.id)) add("unreachable node", "not reachable from the root", n.id);
    }

    return report;
}

MarketLattice::MarketLattice(LatticeData data) : data_(std::move(data)) {
    ValidationReport report = validate_lattice(data_);
    if (!report.ok())
        throw ValidationError("invalid lattice: " + report.issues.front().code +
                              (report.issues.front().node >= 0
                                   ? " at node " + std::to_string(report.issues.front().node)
                                   : "") +
                              " (" + report.issues.front().message + ")");

    for (Node& n : data_.nodes)
        std::sort(n.edges.begin(), n.edges.end(),
                  [](const Edge& a, const Edge& b) { return a.to < b.to; });

    for (std::size_t i = 0; i < data_.nodes.size(); ++i) index_.emplace(data_.nodes[i].id, i);

    by_stage_.assign(static_cast<std::size_t>(data_.stages), {});
    for (const auto& [id, idx] : index_)  // map order => id order within each stage
        by_stage_[static_cast<std::size_t>(data_.nodes[idx].stage)].push_back(idx);

    parents_.assign(data_.nodes.size(), {});
    for (std::size_t i = 0; i < data_.nodes.size(); ++i)
        for (const Edge& e : data_.nodes[i].edges) parents_[index_.at(e.to)].push_back(i);

    root_ = data_.nodes[by_stage_[0].front()].id;
}

std::size_t MarketLattice::index(NodeId id) const {
    auto it = index_.find(id);
    if (it == index_.end()) throw IndexError("unknown node id " + std::to_string(id));
    return it->second;
}

bool MarketLattice::has_node(NodeId id) const { return index_.count(id) != 0; }

double MarketLattice::discount(Stage period) const {
    if (period < 1 || period >= data_.stages)
        throw IndexError("discount period " + std::to_string(period) + " outside 1.." +
                         std::to_string(data_.stages - 1));
    return data_.discounts[static_cast<std::size_t>(period - 1)];
}

double MarketLattice::compound_discount(Stage i, Stage j) const {
    if (i < 0 || i > j || j >= data_.stages)
        throw IndexError("compound_discount stages (" + std::to_string(i) + ", " +
                         std::to_string(j) + ") outside 0 <= i <= j <= " +
                         std::to_string(data_.stages - 1));
    double d = 1.0;
    for (Stage k = i + 1; k <= j; ++k) d *= data_.discounts[static_cast<std::size_t>(k - 1)];
    return d;
}

const std::vector<std::size_t>& MarketLattice::stage_indices(Stage stage) const {
    if (stage < 0 || stage >= data_.stages)
        throw IndexError("stage " + std::to_string(stage) + " outside lattice");
    return by_stage_[static_cast<std::size_t>(stage)];
}

const std::vector<std::size_t>& MarketLattice::parents(std::size_t index) const {
    return parents_.at(index);
}

LatticeData parse_lattice(const nlohmann::json& doc) {
    LatticeData data;
    try {
        data.stages = doc.at("stages").get<Stage>();
        data.discounts = doc.at("discounts").get<std::vector<double>>();
        for (const auto& jn : doc.at("nodes")) {
            Node n;
            n.id = jn.at("id").get<NodeId>();
            n.stage = jn.at("stage").get<Stage>();
            n.price = jn.at("price").get<double>();
            if (jn.contains("edges"))
                for (const auto& je : jn.at("edges"))
                    n.edges.push_back({je.at("to").get<NodeId>(), je.at("p").get<double>()});
            data.nodes.push_back(std::move(n));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("malformed lattice document: ") + e.what());
    }
    return data;
}

LatticeData parse_lattice(std::istream& in) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("malformed lattice document: ") + e.what());
    }
    return parse_lattice(doc);
}

MarketLattice MarketLattice::load(std::istream& in) { return MarketLattice(parse_lattice(in)); }

MarketLattice MarketLattice::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open lattice file: " + path);
    return load(in);
}

MarketLattice MarketLattice::from_json(const nlohmann::json& doc) {
    return MarketLattice(parse_lattice(doc));
}

nlohmann::json MarketLattice::to_json() const {
    nlohmann::json nodes = nlohmann::json::array();
    for (const Node& n : data_.nodes) {
        nlohmann::json edges = nlohmann::json::array();
        for (const Edge& e : n.edges) edges.push_back({{"to", e.to}, {"p", e.prob}});
        nodes.push_back({{"id", n.id}, {"stage", n.stage}, {"price", n.price}, {"edges", edges}});
    }
    return {{"stages", data_.stages}, {"discounts", data_.discounts}, {"nodes", nodes}};
}

PayoffSpec PayoffSpec::call(Money strike) {
    PayoffSpec p;
    p.kind_ = PayoffKind::Call;
    p.strike_ = strike;
    return p;
}

PayoffSpec PayoffSpec::put(Money strike) {
    PayoffSpec p;
    p.kind_ = PayoffKind::Put;
    p.strike_ = strike;
    return p;
}

PayoffSpec PayoffSpec::table(std::map<NodeId, Money> values) {
    PayoffSpec p;
    p.kind_ = PayoffKind::Table;
    p.values_ = std::move(values);
    return p;
}

Money PayoffSpec::cash_flow(const Node& node) const {
    switch (kind_) {
        case PayoffKind::Call:
            return std::max(node.price - strike_, 0.0);
        case PayoffKind::Put:
            return std::max(strike_ - node.price, 0.0);
        case PayoffKind::Table: {
            auto it = values_.find(node.id);
            if (it == values_.end())
                throw ValidationError("payoff table has no entry for node " +
                                      std::to_string(node.id));
            return it->second;
        }
    }
    throw Error("unreachable payoff kind");
}

ValidationReport PayoffSpec::validate(const MarketLattice& lattice) const {
    ValidationReport report;
    if (kind_ == PayoffKind::Table) {
        for (const auto& [id, v] : values_) {
            if (!lattice.has_node(id))
                report.issues.push_back({"unknown_node", "table entry for unknown node", id});
            else if (!std::isfinite(v) || v < 0.0)
                report.issues.push_back({"negative_cash_flow", "cash flow must be >= 0", id});
        }
        for (std::size_t i = 0; i < lattice.size(); ++i) {
            NodeId id = lattice.node_at(i).id;
            if (!values_.count(id))
                report.issues.push_back({"missing_entry", "table does not cover node", id});
        }
    } else if (!std::isfinite(strike_)) {
        report.issues.push_back({"bad_strike", "strike must be finite", -1});
    }
    return report;
}

PayoffSpec PayoffSpec::from_json(const nlohmann::json& doc) {
    try {
        const std::string kind = doc.at("kind").get<std::string>();
        if (kind == "call") return call(doc.at("strike").get<double>());
        if (kind == "put") return put(doc.at("strike").get<double>());
        if (kind == "table") {
            std::map<NodeId, Money> values;
            for (const auto& [key, value] : doc.at("values").items())
                values[std::stoll(key)] = value.get<double>();
            return table(std::move(values));
        }
        throw ParseError("unknown payoff kind: " + kind);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("malformed payoff document: ") + e.what());
    } catch (const std::invalid_argument&) {
        throw ParseError("payoff table keys must be node ids");
    }
}

nlohmann::json PayoffSpec::to_json() const {
    switch (kind_) {
        case PayoffKind::Call:
            return {{"kind", "call"}, {"strike", strike_}};
        case PayoffKind::Put:
            return {{"kind", "put"}, {"strike", strike_}};
        case PayoffKind::Table: {
            nlohmann::json values = nlohmann::json::object();
            for (const auto& [id, v] : values_) values[std::to_string(id)] = v;
            return {{"kind", "table"}, {"values", values}};
        }
    }
    throw Error("unreachable payoff kind");
}

PayoffSpec PayoffSpec::load(std::istream& in) {
    try {
        return from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("malformed payoff document: ") + e.what());
    }
}

PayoffSpec PayoffSpec::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open payoff file: " + path);
    return load(in);
}

}  // namespace quadhedge
