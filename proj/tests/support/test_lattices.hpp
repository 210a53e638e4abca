#pragma once

#include <map>
#include <random>

#include "quadhedge/exercise_policy.hpp"
#include "quadhedge/market_model.hpp"
#include "quadhedge/optimizers.hpp"

namespace quadhedge::testsupport {

using Rng = std::mt19937_64;

/// Recombining-free binomial tree: F * u^(ups) * d^(downs), equal stage
/// structure, one up/down branch per node.
MarketLattice binomial_tree(Stage stages, Money root_price, double up, double down,
                            double prob_up, double discount_per_period);

/// Single-branch chain: one child per stage, prices strictly no-arbitrage
/// (child price = parent price), used for degenerate-path tests.
MarketLattice chain(Stage stages, Money price);

struct RandomTreeOptions {
    Stage min_stages = 2;
    Stage max_stages = 4;
    int min_children = 2;
    int max_children = 4;
    bool straddle = false;  // children bracket the parent price (RN measures exist)
};

MarketLattice random_tree(Rng& rng, const RandomTreeOptions& options = {});

/// Random binomial (2 children everywhere, straddling): complete market.
MarketLattice random_binomial(Rng& rng);

/// Table payoff with i.i.d. uniform values in [lo, hi] at every node.
PayoffSpec random_table_payoff(Rng& rng, const MarketLattice& lattice, double lo = 0.0,
                               double hi = 5.0);

/// Random canonical policy; each node exercises with probability p.
ExercisePolicy random_canonical_policy(Rng& rng, const MarketLattice& lattice, double p = 0.35);

/// Random equivalent martingale measure on a straddling lattice: a strictly
/// positive convex mix of the per-node straddling-pair distributions.
RNMeasureSpec random_rn_measure(Rng& rng, const MarketLattice& lattice);

/// The lattice's raw contents, for mutation tests.
LatticeData lattice_data(const MarketLattice& lattice);

/// Sub-lattice rooted at `root_id` with stages renumbered from 0.
MarketLattice subtree(const MarketLattice& lattice, NodeId root_id);

}  // namespace quadhedge::testsupport
