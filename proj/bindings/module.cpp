#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "quadhedge/arbitrage_bounds.hpp"
#include "quadhedge/examples.hpp"
#include "quadhedge/hedging_engine.hpp"
#include "quadhedge/market_model.hpp"
#include "quadhedge/optimizers.hpp"
#include "quadhedge/simulation.hpp"
#include "quadhedge/vo_measure.hpp"

namespace py = pybind11;
using namespace quadhedge;

namespace {

MarketLattice lattice_from_string(const std::string& text) {
    std::istringstream in(text);
    return MarketLattice::load(in);
}

py::dict coefficients_dict(const MarketLattice& lattice, const HedgeCoefficients& coeffs) {
    py::dict out;
    for (std::size_t i = 0; i < lattice.size(); ++i) {
        const NodeCoefficients& k = coeffs.at_index(i);
        py::dict entry;
        entry["a"] = k.a;
        entry["b"] = k.b;
        entry["c"] = k.c;
        if (k.has_trade) {
            entry["p"] = k.p;
            entry["q"] = k.q;
        }
        out[py::int_(lattice.node_at(i).id)] = entry;
    }
    return out;
}

py::dict result_dict(const MarketLattice& lattice, const OptimizationResult& result) {
    py::dict out;
    out["exercise"] = result.policy.exercise_ids(lattice);
    out["value"] = result.value;
    if (!result.per_node_values.empty()) out["per_node_values"] = result.per_node_values;
    out["policies_evaluated"] = result.diagnostics.policies_evaluated;
    out["ties"] = result.diagnostics.ties;
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Quadratic hedging of exercise policies on futures-price lattices";

    py::register_exception<Error>(m, "QuadhedgeError");

    py::class_<MarketLattice>(m, "MarketLattice")
        .def_static("from_string", &lattice_from_string, py::arg("text"))
        .def_static("from_file", &MarketLattice::load_file, py::arg("path"))
        .def_property_readonly("stage_count", &MarketLattice::stage_count)
        .def_property_readonly("root", &MarketLattice::root)
        .def("__len__", &MarketLattice::size)
        .def("price", [](const MarketLattice& l, NodeId id) { return l.node(id).price; })
        .def("stage", [](const MarketLattice& l, NodeId id) { return l.node(id).stage; })
        .def("compound_discount", &MarketLattice::compound_discount, py::arg("i"), py::arg("j"))
        .def("to_json", [](const MarketLattice& l) { return l.to_json().dump(); });

    py::class_<PayoffSpec>(m, "PayoffSpec")
        .def_static("call", &PayoffSpec::call, py::arg("strike"))
        .def_static("put", &PayoffSpec::put, py::arg("strike"))
        .def_static("table", &PayoffSpec::table, py::arg("values"))
        .def("cash_flow", [](const PayoffSpec& p, const MarketLattice& l, NodeId id) {
            return p.cash_flow(l.node(id));
        });

    py::class_<ExercisePolicy>(m, "ExercisePolicy")
        .def(py::init([](const MarketLattice& lattice, const std::set<NodeId>& ids) {
                 return canonicalize(ExercisePolicy(lattice, ids), lattice);
             }),
             py::arg("lattice"), py::arg("exercise"))
        .def("exercise_ids", &ExercisePolicy::exercise_ids)
        .def("exercises", &ExercisePolicy::exercises, py::arg("lattice"), py::arg("node"));

    py::class_<HedgeCoefficients>(m, "HedgeCoefficients");

    py::class_<RNMeasureSpec>(m, "RNMeasureSpec")
        .def(py::init<std::map<NodeId, std::map<NodeId, double>>>(), py::arg("entries"))
        .def("entries", &RNMeasureSpec::entries);

    m.def("validate_lattice_text", [](const std::string& text) {
        std::istringstream in(text);
        ValidationReport report = validate_lattice(parse_lattice(in));
        std::vector<std::string> issues;
        for (const auto& issue : report.issues)
            issues.push_back(issue.code + " at node " + std::to_string(issue.node));
        return issues;
    });

    m.def("compute_coefficients", &compute_coefficients, py::arg("lattice"), py::arg("payoff"),
          py::arg("policy"));
    m.def("coefficients_table", &coefficients_dict, py::arg("lattice"), py::arg("coefficients"));
    m.def("optimal_initial_capital", &optimal_initial_capital, py::arg("lattice"),
          py::arg("coefficients"));
    m.def("evaluate_value_function", &evaluate_value_function, py::arg("lattice"),
          py::arg("coefficients"), py::arg("node"), py::arg("value"));
    m.def("trade_decision", &trade_decision, py::arg("lattice"), py::arg("coefficients"),
          py::arg("node"), py::arg("value"));
    m.def("anchored_objective", &anchored_objective, py::arg("lattice"), py::arg("coefficients"),
          py::arg("v0"));

    m.def(
        "one_step_weights",
        [](const MarketLattice& lattice, const HedgeCoefficients& coeffs, NodeId node) {
            std::map<NodeId, double> out;
            for (const EdgeWeight& w : one_step_weights(lattice, coeffs, node).weights)
                out[w.child] = w.weight;
            return out;
        },
        py::arg("lattice"), py::arg("coefficients"), py::arg("node"));

    m.def(
        "stopped_weights",
        [](const MarketLattice& lattice, const HedgeCoefficients& coeffs,
           const ExercisePolicy& policy, NodeId from) {
            py::list out;
            for (const StoppedOutcome& o :
                 stopped_path_weights(lattice, coeffs, policy, from).outcomes) {
                py::dict entry;
                entry["prefix"] = o.prefix;
                entry["stop"] = o.stop;
                entry["stop_stage"] = o.stop_stage;
                entry["exercised"] = o.exercised;
                entry["weight"] = o.weight;
                out.append(entry);
            }
            return out;
        },
        py::arg("lattice"), py::arg("coefficients"), py::arg("policy"), py::arg("from_node"));

    m.def(
        "vo_expected_value",
        [](const MarketLattice& lattice, const PayoffSpec& payoff, const ExercisePolicy& policy,
           NodeId from) { return vo_expected_value(lattice, payoff, policy, from); },
        py::arg("lattice"), py::arg("payoff"), py::arg("policy"), py::arg("from_node"));

    m.def(
        "is_equivalent_measure",
        [](const MarketLattice& lattice, const PayoffSpec& payoff, const ExercisePolicy& policy) {
            HedgeCoefficients coeffs = compute_coefficients(lattice, payoff, policy);
            SignedStoppedMeasure measure =
                stopped_path_weights(lattice, coeffs, policy, lattice.root());
            EquivalenceResult eq = is_equivalent_measure(measure);
            std::vector<NodeId> offending;
            for (std::size_t i : eq.offending) offending.push_back(measure.outcomes[i].stop);
            return py::make_tuple(eq.equivalent, offending);
        },
        py::arg("lattice"), py::arg("payoff"), py::arg("policy"));

    m.def(
        "optimize_vo_naive",
        [](const MarketLattice& lattice, const PayoffSpec& payoff, std::uint64_t cap) {
            return result_dict(lattice, optimize_vo_naive(lattice, payoff, cap));
        },
        py::arg("lattice"), py::arg("payoff"), py::arg("cap") = kDefaultPolicyCap);
    m.def(
        "optimize_vo_time_consistent",
        [](const MarketLattice& lattice, const PayoffSpec& payoff) {
            return result_dict(lattice, optimize_vo_time_consistent(lattice, payoff));
        },
        py::arg("lattice"), py::arg("payoff"));
    m.def(
        "optimize_risk_neutral",
        [](const MarketLattice& lattice, const PayoffSpec& payoff, const RNMeasureSpec& rn) {
            return result_dict(lattice, optimize_risk_neutral(lattice, payoff, rn));
        },
        py::arg("lattice"), py::arg("payoff"), py::arg("measure"));
    m.def("rn_policy_value", &rn_policy_value, py::arg("lattice"), py::arg("payoff"),
          py::arg("policy"), py::arg("measure"));
    m.def("tc_mismatches", &tc_mismatches, py::arg("lattice"), py::arg("payoff"),
          py::arg("policy"));

    m.def(
        "value_bounds",
        [](const MarketLattice& lattice, const PayoffSpec& payoff, const ExercisePolicy& policy) {
            const ValueInterval interval = value_bounds(lattice, payoff, policy);
            py::dict out;
            out["lo"] = interval.lo;
            out["hi"] = interval.hi;
            out["open_lo"] = interval.open_lo;
            out["open_hi"] = interval.open_hi;
            return out;
        },
        py::arg("lattice"), py::arg("payoff"), py::arg("policy"));
    m.def(
        "interval_contains",
        [](double lo, double hi, bool open_lo, bool open_hi, double x) {
            return contains(ValueInterval{lo, hi, open_lo, open_hi}, x);
        },
        py::arg("lo"), py::arg("hi"), py::arg("open_lo"), py::arg("open_hi"), py::arg("x"));

    m.def(
        "run_hedge",
        [](const MarketLattice& lattice, const PayoffSpec& payoff, const ExercisePolicy& policy,
           std::uint64_t paths, std::uint64_t seed, std::optional<double> v0, int threads) {
            HedgeCoefficients coeffs = compute_coefficients(lattice, payoff, policy);
            SimulationConfig config;
            config.path_count = paths;
            config.seed = seed;
            config.initial_capital = v0 ? *v0 : optimal_initial_capital(lattice, coeffs);
            config.threads = threads;
            PnlStats stats = run_hedge(lattice, payoff, policy, coeffs, config);
            py::dict out;
            out["mean_error"] = stats.mean_error;
            out["mean_squared_error"] = stats.mean_squared_error;
            out["unhedged_second_moment"] = stats.unhedged_second_moment;
            out["se_mean"] = stats.se_mean;
            out["se_mse"] = stats.se_mse;
            out["se_unhedged"] = stats.se_unhedged;
            out["path_count"] = stats.path_count;
            out["initial_capital"] = config.initial_capital;
            out["predicted_mse"] = anchored_objective(lattice, coeffs, config.initial_capital);
            return out;
        },
        py::arg("lattice"), py::arg("payoff"), py::arg("policy"), py::arg("paths"),
        py::arg("seed") = 0, py::arg("v0") = std::nullopt, py::arg("threads") = 1);

    auto ex = m.def_submodule("examples", "built-in two-date reference market");
    ex.def("two_date_market", &examples::two_date_market);
    ex.def("call_strike_3", &examples::call_strike_3);
    ex.def("call_strike_7", &examples::call_strike_7);
    ex.def("rn_family", &examples::rn_family, py::arg("r"));
}
