#include "quadhedge/vo_measure.hpp"

#include <cmath>
#include <string>

namespace quadhedge {

EdgeWeights one_step_weights(const MarketLattice& lattice, const HedgeCoefficients& coeffs,
                             NodeId node_id) {
    const std::size_t idx = lattice.index(node_id);
    if (!coeffs.alive_index(idx))
        throw IndexError("node " + std::to_string(node_id) + " is not alive under this policy");
    const NodeCoefficients& k = coeffs.at_index(idx);
    if (k.role != NodeRole::Continuation)
        throw IndexError("node " + std::to_string(node_id) + " is not a continuation node");

    const Node& node = lattice.node_at(idx);
    EdgeWeights out;
    out.node = node_id;
    double normalizer = 0.0;
    for (const Edge& e : node.edges) {
        const NodeCoefficients& child = coeffs.at_index(lattice.index(e.to));
        const double df = lattice.node(e.to).price - node.price;
        const double w = e.prob * child.a * (1.0 - k.q * df);
        out.weights.push_back({e.to, w});
        normalizer += w;
    }
    if (std::abs(normalizer) <= kMeasureNormalizerFloor)
        throw DegenerateMeasureError(node_id, "one-step measure normalizer vanished at node " +
                                                  std::to_string(node_id));
    for (EdgeWeight& w : out.weights) w.weight /= normalizer;
    return out;
}

SignedEdgeMeasure build_edge_measure(const MarketLattice& lattice,
                                     const HedgeCoefficients& coeffs) {
    SignedEdgeMeasure measure;
    for (Stage s = 0; s < lattice.stage_count(); ++s)
        for (std::size_t idx : lattice.stage_indices(s)) {
            if (!coeffs.alive_index(idx)) continue;
            if (coeffs.at_index(idx).role != NodeRole::Continuation) continue;
            measure.nodes.push_back(one_step_weights(lattice, coeffs, lattice.node_at(idx).id));
        }
    return measure;
}

SignedStoppedMeasure stopped_path_weights(const MarketLattice& lattice,
                                          const HedgeCoefficients& coeffs,
                                          const ExercisePolicy& policy, NodeId from) {
    const std::size_t from_idx = lattice.index(from);
    if (!coeffs.alive_index(from_idx))
        throw IndexError("node " + std::to_string(from) + " is not alive under this policy");
    if (policy.exercises_index(from_idx))
        throw IndexError("policy exercises at node " + std::to_string(from) +
                         "; the stopped measure needs iota > i");

    SignedStoppedMeasure measure;
    measure.from = from;
    measure.from_stage = lattice.node_at(from_idx).stage;

    std::vector<NodeId> prefix;
    auto walk = [&](auto&& self, std::size_t idx, double weight) -> void {
        const Node& node = lattice.node_at(idx);
        prefix.push_back(node.id);
        const bool exercised = policy.exercises_index(idx);
        if (exercised || lattice.terminal(node)) {
            measure.outcomes.push_back({prefix, node.id, node.stage, exercised, weight});
        } else {
            EdgeWeights ow = one_step_weights(lattice, coeffs, node.id);
            for (const EdgeWeight& w : ow.weights)
                self(self, lattice.index(w.child), weight * w.weight);
        }
        prefix.pop_back();
    };
    walk(walk, from_idx, 1.0);
    return measure;
}

Money vo_expected_value(const MarketLattice& lattice, const PayoffSpec& payoff,
                        const ExercisePolicy& policy, const HedgeCoefficients& coeffs,
                        NodeId from) {
    const std::size_t from_idx = lattice.index(from);
    if (policy.exercises_index(from_idx)) return payoff.cash_flow(lattice.node_at(from_idx));
    const Node& from_node = lattice.node_at(from_idx);
    if (lattice.terminal(from_node)) return 0.0;  // expires here

    const SignedStoppedMeasure measure = stopped_path_weights(lattice, coeffs, policy, from);
    Money total = 0.0;
    for (const StoppedOutcome& o : measure.outcomes) {
        if (!o.exercised) continue;  // expiry contributes 0
        const double d = lattice.compound_discount(from_node.stage, o.stop_stage);
        total += o.weight * d * payoff.cash_flow(lattice.node(o.stop));
    }
    return total;
}

Money vo_expected_value(const MarketLattice& lattice, const PayoffSpec& payoff,
                        const ExercisePolicy& policy, NodeId from) {
    const ExercisePolicy canon = canonicalize(policy, lattice);
    const HedgeCoefficients coeffs = compute_coefficients(lattice, payoff, canon);
    return vo_expected_value(lattice, payoff, canon, coeffs, from);
}

EquivalenceResult is_equivalent_measure(const SignedStoppedMeasure& measure) {
    EquivalenceResult result;
    for (std::size_t i = 0; i < measure.outcomes.size(); ++i)
        if (measure.outcomes[i].weight <= kEquivalenceEps) result.offending.push_back(i);
    result.equivalent = result.offending.empty();
    return result;
}

double check_stopped_martingale(const MarketLattice& lattice, const SignedStoppedMeasure& measure,
                                Stage j) {
    if (j <= measure.from_stage || j > lattice.stage_count() - 1)
        throw IndexError("horizon j must satisfy from_stage < j <= I-1");
    double expectation = 0.0;
    for (const StoppedOutcome& o : measure.outcomes) {
        const Stage cut = std::min(o.stop_stage, j);
        const NodeId at = o.prefix[static_cast<std::size_t>(cut - measure.from_stage)];
        expectation += o.weight * lattice.node(at).price;
    }
    return expectation - lattice.node(measure.from).price;
}

}  // namespace quadhedge
