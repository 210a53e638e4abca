#include "quadhedge/hedging_engine.hpp"

#include <cmath>
#include <string>

namespace quadhedge {

namespace detail {

NodeCoefficients stopped_coefficients(const MarketLattice& lattice, const Node& node,
                                      const PayoffSpec& payoff, bool exercised) {
    NodeCoefficients out;
    const double dinv = 1.0 / lattice.compound_discount(node.stage, lattice.stage_count() - 1);
    out.a = dinv * dinv;
    out.b = exercised ? payoff.cash_flow(node) : 0.0;
    out.c = 0.0;
    out.role = exercised ? NodeRole::Exercised : NodeRole::AbandonedTerminal;
    out.has_trade = false;
    return out;
}

NodeCoefficients step_continuation(const MarketLattice& lattice, std::size_t node_index,
                                   const std::vector<NodeCoefficients>& coeffs, bool strict) {
    const Node& node = lattice.node_at(node_index);
    const double d = lattice.discount(node.stage + 1);

    double e_a_df = 0.0, e_a_df2 = 0.0, e_ab_df = 0.0, e_c = 0.0;
    for (const Edge& e : node.edges) {
        const std::size_t child = lattice.index(e.to);
        const double df = lattice.node_at(child).price - node.price;
        const double w = e.prob * coeffs[child].a;
        e_a_df += w * df;
        e_a_df2 += w * df * df;
        e_ab_df += w * coeffs[child].b * df;
        e_c += e.prob * coeffs[child].c;
    }

    NodeCoefficients out;
    out.role = NodeRole::Continuation;
    const double eps_sing = kSingularityScale * node.price * node.price;
    if (e_a_df2 <= eps_sing) {
        if (strict)
            throw SingularityError(node.id, "E[a' dF^2] = " + std::to_string(e_a_df2) +
                                                " at node " + std::to_string(node.id) +
                                                ": next-step price is deterministic");
        out.q = 0.0;
        out.p = 0.0;
    } else {
        out.q = e_a_df / e_a_df2;
        out.p = e_ab_df / e_a_df2;
    }

    double e_a_1q2 = 0.0, e_a_r_1q = 0.0, e_a_r2 = 0.0;
    for (const Edge& e : node.edges) {
        const std::size_t child = lattice.index(e.to);
        const double df = lattice.node_at(child).price - node.price;
        const double one_q = 1.0 - out.q * df;
        const double r = coeffs[child].b - out.p * df;
        const double w = e.prob * coeffs[child].a;
        e_a_1q2 += w * one_q * one_q;
        e_a_r_1q += w * r * one_q;
        e_a_r2 += w * r * r;
    }

    out.a = e_a_1q2 / (d * d);
    if (out.a <= kDegenerateWeight) {
        if (strict)
            throw DegenerateWeightError(node.id, "quadratic weight a collapsed at node " +
                                                     std::to_string(node.id));
        out.b = 0.0;
        out.c = 0.0;
        out.has_trade = true;
        return out;
    }
    out.b = e_a_r_1q / (out.a * d);
    out.c = e_c + e_a_r2 - out.a * out.b * out.b;
    out.has_trade = true;
    return out;
}

}  // namespace detail

HedgeCoefficients compute_coefficients(const MarketLattice& lattice, const PayoffSpec& payoff,
                                       const ExercisePolicy& policy) {
    const ExercisePolicy canon = canonicalize(policy, lattice);
    const std::vector<bool> alive = alive_reachable(lattice, canon);
    std::vector<NodeCoefficients> table(lattice.size());

    const Stage last = lattice.stage_count() - 1;
    for (Stage stage = last; stage >= 0; --stage) {
        for (std::size_t idx : lattice.stage_indices(stage)) {
            const Node& node = lattice.node_at(idx);
            if (canon.exercises_index(idx)) {
                table[idx] = detail::stopped_coefficients(lattice, node, payoff, true);
            } else if (stage == last) {
                table[idx] = detail::stopped_coefficients(lattice, node, payoff, false);
            } else {
                table[idx] = detail::step_continuation(lattice, idx, table, alive[idx]);
            }
        }
    }
    return HedgeCoefficients(std::move(table), std::move(alive));
}

Money optimal_initial_capital(const MarketLattice& lattice, const HedgeCoefficients& coeffs) {
    return coeffs.at_index(lattice.root_index()).b;
}

double evaluate_value_function(const MarketLattice& lattice, const HedgeCoefficients& coeffs,
                               NodeId node, Money value) {
    if (!coeffs.alive(lattice, node))
        throw IndexError("node " + std::to_string(node) + " is not alive under this policy");
    const NodeCoefficients& k = coeffs.at(lattice, node);
    const double gap = k.b - value;
    return k.a * gap * gap + k.c;
}

double trade_decision(const MarketLattice& lattice, const HedgeCoefficients& coeffs, NodeId node,
                      Money value) {
    if (!coeffs.alive(lattice, node))
        throw IndexError("node " + std::to_string(node) + " is not alive under this policy");
    const NodeCoefficients& k = coeffs.at(lattice, node);
    if (k.role != NodeRole::Continuation || !k.has_trade)
        throw IndexError("node " + std::to_string(node) + " is exercised or terminal");
    const double d = lattice.discount(lattice.node(node).stage + 1);
    return k.p - k.q * value / d;
}

double anchored_objective(const MarketLattice& lattice, const HedgeCoefficients& coeffs,
                          Money v0) {
    const NodeCoefficients& k = coeffs.at_index(lattice.root_index());
    const double gap = k.b - v0;
    return k.a * gap * gap + k.c;
}

}  // namespace quadhedge
