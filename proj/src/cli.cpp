#include "quadhedge/cli.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "quadhedge/arbitrage_bounds.hpp"
#include "quadhedge/examples.hpp"
#include "quadhedge/hedging_engine.hpp"
#include "quadhedge/market_model.hpp"
#include "quadhedge/optimizers.hpp"
#include "quadhedge/simulation.hpp"
#include "quadhedge/vo_measure.hpp"

namespace quadhedge::cli {

namespace {

std::string digits17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

struct CommonInputs {
    std::string model_path;
    std::string payoff_path;
    std::string policy_path;
    std::string measure_path;
};

void emit(const nlohmann::json& doc, bool json_flag, const std::string& out_path,
          std::ostream& out) {
    if (!out_path.empty()) {
        std::ofstream file(out_path);
        if (!file) throw UsageError("cannot open output file: " + out_path);
        file << doc.dump(2) << "\n";
    }
    if (json_flag) out << doc.dump(2) << "\n";
}

nlohmann::json report_json(const ValidationReport& report) {
    nlohmann::json issues = nlohmann::json::array();
    for (const ValidationIssue& issue : report.issues)
        issues.push_back({{"code", issue.code}, {"message", issue.message}, {"node", issue.node}});
    return issues;
}

int cmd_validate(const CommonInputs& in, bool json_flag, const std::string& out_path,
                 std::ostream& out) {
    nlohmann::json doc;
    ValidationReport report;

    LatticeData data;
    {
        std::ifstream file(in.model_path);
        if (!file) throw UsageError("cannot open lattice file: " + in.model_path);
        data = parse_lattice(file);
    }
    report = validate_lattice(data);

    std::optional<MarketLattice> lattice;
    if (report.ok()) {
        lattice.emplace(std::move(data));
        if (!in.payoff_path.empty()) {
            ValidationReport pr = PayoffSpec::load_file(in.payoff_path).validate(*lattice);
            report.issues.insert(report.issues.end(), pr.issues.begin(), pr.issues.end());
        }
        if (!in.measure_path.empty()) {
            ValidationReport mr =
                validate_rn_measure(*lattice, RNMeasureSpec::load_file(in.measure_path));
            report.issues.insert(report.issues.end(), mr.issues.begin(), mr.issues.end());
        }
    }

    doc["ok"] = report.ok();
    doc["issues"] = report_json(report);
    emit(doc, json_flag, out_path, out);
    if (!json_flag) {
        if (report.ok())
            out << "OK\n";
        else
            out << report.str();
    }
    return report.ok() ? 0 : 1;
}

struct LoadedProblem {
    MarketLattice lattice;
    PayoffSpec payoff;
    ExercisePolicy policy;
};

LoadedProblem load_problem(const CommonInputs& in, bool need_policy) {
    MarketLattice lattice = MarketLattice::load_file(in.model_path);
    PayoffSpec payoff = PayoffSpec::load_file(in.payoff_path);
    ValidationReport pr = payoff.validate(lattice);
    if (!pr.ok()) throw ValidationError("invalid payoff: " + pr.str());
    ExercisePolicy policy = ExercisePolicy::never(lattice);
    if (need_policy) {
        if (in.policy_path.empty()) throw UsageError("--policy is required for this command");
        policy = canonicalize(ExercisePolicy::load_file(lattice, in.policy_path), lattice);
    }
    return {std::move(lattice), std::move(payoff), std::move(policy)};
}

Money resolve_v0(const MarketLattice& lattice, const PayoffSpec& payoff,
                 const ExercisePolicy& policy, const HedgeCoefficients& coeffs,
                 std::optional<double> v0, const std::string& anchor,
                 const std::string& measure_path) {
    if (v0 && !anchor.empty()) throw UsageError("--v0 and --anchor are mutually exclusive");
    if (v0) return *v0;
    if (anchor.empty()) return optimal_initial_capital(lattice, coeffs);
    if (anchor != "rn") throw UsageError("unknown anchor: " + anchor);
    if (measure_path.empty()) throw UsageError("--anchor rn requires --measure");
    return rn_policy_value(lattice, payoff, policy, RNMeasureSpec::load_file(measure_path));
}

// Coefficient dump with 17-significant-digit numbers.
std::string coefficients_json(const MarketLattice& lattice, const HedgeCoefficients& coeffs) {
    std::ostringstream os;
    os << "{\n";
    bool first = true;
    for (Stage s = 0; s < lattice.stage_count(); ++s)
        for (std::size_t idx : lattice.stage_indices(s)) {
            const Node& node = lattice.node_at(idx);
            const NodeCoefficients& k = coeffs.at_index(idx);
            if (!first) os << ",\n";
            first = false;
            os << "  \"" << node.id << "\": {\"a\": " << digits17(k.a)
               << ", \"b\": " << digits17(k.b) << ", \"c\": " << digits17(k.c);
            if (k.has_trade)
                os << ", \"p\": " << digits17(k.p) << ", \"q\": " << digits17(k.q);
            os << "}";
        }
    os << "\n}\n";
    return os.str();
}

int cmd_hedge(const CommonInputs& in, std::optional<double> v0, const std::string& anchor,
              bool json_flag, const std::string& out_path, std::ostream& out) {
    LoadedProblem problem = load_problem(in, true);
    HedgeCoefficients coeffs =
        compute_coefficients(problem.lattice, problem.payoff, problem.policy);
    const Money capital = resolve_v0(problem.lattice, problem.payoff, problem.policy, coeffs, v0,
                                     anchor, in.measure_path);
    const double objective = anchored_objective(problem.lattice, coeffs, capital);

    const std::string dump = coefficients_json(problem.lattice, coeffs);
    if (!out_path.empty()) {
        std::ofstream file(out_path);
        if (!file) throw UsageError("cannot open output file: " + out_path);
        file << dump;
    }
    if (json_flag) {
        out << dump;
        return 0;
    }

    out << "optimal initial capital b0 = " << std::setprecision(10)
        << optimal_initial_capital(problem.lattice, coeffs) << "\n";
    out << "initial capital V0        = " << capital << "\n";
    out << "objective J0(V0)          = " << objective << "\n\n";
    out << std::left << std::setw(8) << "node" << std::setw(16) << "a" << std::setw(16) << "b"
        << std::setw(16) << "c" << std::setw(16) << "p" << std::setw(16) << "q" << "\n";
    for (Stage s = 0; s < problem.lattice.stage_count(); ++s)
        for (std::size_t idx : problem.lattice.stage_indices(s)) {
            const Node& node = problem.lattice.node_at(idx);
            const NodeCoefficients& k = coeffs.at_index(idx);
            out << std::left << std::setw(8) << node.id << std::setprecision(8) << std::setw(16)
                << k.a << std::setw(16) << k.b << std::setw(16) << k.c;
            if (k.has_trade)
                out << std::setw(16) << k.p << std::setw(16) << k.q;
            out << "\n";
        }
    return 0;
}

int cmd_measure(const CommonInputs& in, bool json_flag, const std::string& out_path,
                std::ostream& out) {
    LoadedProblem problem = load_problem(in, true);
    const MarketLattice& lattice = problem.lattice;
    HedgeCoefficients coeffs = compute_coefficients(lattice, problem.payoff, problem.policy);
    const SignedEdgeMeasure edge_measure = build_edge_measure(lattice, coeffs);

    nlohmann::json doc;
    nlohmann::json weights_doc = nlohmann::json::object();
    for (const EdgeWeights& ew : edge_measure.nodes) {
        nlohmann::json entry = nlohmann::json::object();
        for (const EdgeWeight& w : ew.weights) entry[std::to_string(w.child)] = w.weight;
        weights_doc[std::to_string(ew.node)] = entry;
    }
    doc["one_step_weights"] = weights_doc;

    const bool root_exercised = problem.policy.exercises(lattice, lattice.root());
    if (!root_exercised) {
        const SignedStoppedMeasure stopped =
            stopped_path_weights(lattice, coeffs, problem.policy, lattice.root());
        const EquivalenceResult eq = is_equivalent_measure(stopped);
        doc["equivalent"] = eq.equivalent;
        nlohmann::json offending = nlohmann::json::array();
        for (std::size_t i : eq.offending)
            offending.push_back({{"stop_node", stopped.outcomes[i].stop},
                                 {"weight", stopped.outcomes[i].weight}});
        doc["offending_outcomes"] = offending;

        nlohmann::json residuals = nlohmann::json::array();
        for (Stage j = 1; j < lattice.stage_count(); ++j)
            residuals.push_back({{"horizon", j},
                                 {"residual", check_stopped_martingale(lattice, stopped, j)}});
        doc["stopped_martingale_residuals"] = residuals;
    } else {
        doc["equivalent"] = nullptr;
        doc["note"] = "policy exercises at the root; no stopped measure";
    }

    emit(doc, json_flag, out_path, out);
    if (!json_flag) {
        out << "one-step variance-optimal weights\n";
        for (const EdgeWeights& ew : edge_measure.nodes) {
            out << "  node " << ew.node << ":";
            for (const EdgeWeight& w : ew.weights)
                out << "  " << w.child << " -> " << std::setprecision(8) << w.weight;
            out << "\n";
        }
        if (!root_exercised) {
            out << "equivalent: " << (doc["equivalent"].get<bool>() ? "yes" : "no") << "\n";
            for (const auto& o : doc["offending_outcomes"])
                out << "  offending stop node " << o["stop_node"] << " weight "
                    << o["weight"].get<double>() << "\n";
            for (const auto& r : doc["stopped_martingale_residuals"])
                out << "  martingale residual at horizon " << r["horizon"] << ": "
                    << r["residual"].get<double>() << "\n";
        }
    }
    return 0;
}

int cmd_optimize(const CommonInputs& in, const std::string& method, std::uint64_t cap,
                 bool json_flag, const std::string& out_path, std::ostream& out) {
    LoadedProblem problem = load_problem(in, false);
    OptimizationResult result{ExercisePolicy::never(problem.lattice), 0.0, {}, {}};
    if (method == "vo") {
        result = optimize_vo_naive(problem.lattice, problem.payoff, cap);
    } else if (method == "tc") {
        result = optimize_vo_time_consistent(problem.lattice, problem.payoff);
    } else if (method == "rn") {
        if (in.measure_path.empty()) throw UsageError("--method rn requires --measure");
        result = optimize_risk_neutral(problem.lattice, problem.payoff,
                                       RNMeasureSpec::load_file(in.measure_path));
    } else {
        throw UsageError("unknown method: " + method);
    }

    nlohmann::json doc;
    doc["policy"] = result.policy.to_json(problem.lattice);
    doc["value"] = result.value;
    if (!result.per_node_values.empty()) {
        nlohmann::json values = nlohmann::json::object();
        for (const auto& [id, v] : result.per_node_values) values[std::to_string(id)] = v;
        doc["per_node_values"] = values;
    }
    doc["diagnostics"] = {{"policies_evaluated", result.diagnostics.policies_evaluated},
                          {"ties", result.diagnostics.ties}};

    emit(doc, json_flag, out_path, out);
    if (!json_flag) {
        out << "method " << method << "\n";
        out << "policy exercises at: ";
        bool first = true;
        for (NodeId id : result.policy.exercise_ids(problem.lattice)) {
            out << (first ? "" : ", ") << id;
            first = false;
        }
        if (result.policy.exercise_ids(problem.lattice).empty()) out << "(never)";
        out << "\nvalue = " << std::setprecision(10) << result.value << "\n";
    }
    return 0;
}

int cmd_bounds(const CommonInputs& in, const std::vector<double>& checks, bool json_flag,
               const std::string& out_path, std::ostream& out) {
    LoadedProblem problem = load_problem(in, true);
    const ValueInterval interval = value_bounds(problem.lattice, problem.payoff, problem.policy);

    nlohmann::json doc;
    doc["lo"] = interval.lo;
    doc["hi"] = interval.hi;
    doc["open_lo"] = interval.open_lo;
    doc["open_hi"] = interval.open_hi;
    nlohmann::json verdicts = nlohmann::json::array();
    for (double x : checks)
        verdicts.push_back({{"value", x}, {"contained", contains(interval, x)}});
    doc["checks"] = verdicts;

    emit(doc, json_flag, out_path, out);
    if (!json_flag) {
        out << "no-arbitrage interval " << (interval.open_lo ? "(" : "[")
            << std::setprecision(10) << interval.lo << ", " << interval.hi
            << (interval.open_hi ? ")" : "]") << "\n";
        for (double x : checks)
            out << "  " << x << (contains(interval, x) ? " inside" : " outside") << "\n";
    }
    return 0;
}

int cmd_simulate(const CommonInputs& in, std::uint64_t paths, std::uint64_t seed,
                 std::optional<double> v0, const std::string& anchor, bool json_flag,
                 const std::string& out_path, std::ostream& out) {
    LoadedProblem problem = load_problem(in, true);
    HedgeCoefficients coeffs =
        compute_coefficients(problem.lattice, problem.payoff, problem.policy);
    SimulationConfig config;
    config.path_count = paths;
    config.seed = seed;
    config.initial_capital = resolve_v0(problem.lattice, problem.payoff, problem.policy, coeffs,
                                        v0, anchor, in.measure_path);

    PnlStats stats;
    if (!out_path.empty()) {
        std::ofstream csv(out_path);
        if (!csv) throw UsageError("cannot open output file: " + out_path);
        csv << "path_id,iota,cashflow,terminal_wealth,error\n";
        stats = run_hedge(problem.lattice, problem.payoff, problem.policy, coeffs, config,
                          [&](const PathRecord& rec) {
                              csv << rec.path_id << "," << rec.iota << ","
                                  << digits17(rec.cashflow) << "," << digits17(rec.terminal_wealth)
                                  << "," << digits17(rec.error) << "\n";
                          });
    } else {
        stats = run_hedge(problem.lattice, problem.payoff, problem.policy, coeffs, config);
    }

    const double predicted = anchored_objective(problem.lattice, coeffs, config.initial_capital);
    const HedgeSummary summary = summarize(stats, predicted);

    nlohmann::json doc;
    doc["paths"] = stats.path_count;
    doc["seed"] = seed;
    doc["initial_capital"] = config.initial_capital;
    doc["mean_error"] = stats.mean_error;
    doc["se_mean"] = stats.se_mean;
    doc["mean_squared_error"] = stats.mean_squared_error;
    doc["se_mse"] = stats.se_mse;
    doc["unhedged_second_moment"] = stats.unhedged_second_moment;
    doc["se_unhedged"] = stats.se_unhedged;
    doc["predicted_mse"] = predicted;
    doc["z"] = summary.z;
    doc["pass"] = summary.pass;

    if (json_flag) out << doc.dump(2) << "\n";
    if (!json_flag) {
        out << std::setprecision(8);
        out << "paths                   " << stats.path_count << "\n";
        out << "initial capital V0      " << config.initial_capital << "\n";
        out << "mean error              " << stats.mean_error << " (se " << stats.se_mean << ")\n";
        out << "mean squared error      " << stats.mean_squared_error << " (se " << stats.se_mse
            << ")\n";
        out << "unhedged second moment  " << stats.unhedged_second_moment << " (se "
            << stats.se_unhedged << ")\n";
        out << "predicted J0(V0)        " << predicted << "\n";
        out << "z                       " << summary.z << (summary.pass ? "  pass" : "  FAIL")
            << "\n";
    }
    return summary.pass ? 0 : 1;
}

int cmd_examples(bool json_flag, const std::string& out_path, std::ostream& out) {
    const std::vector<examples::ReferenceRow> rows = examples::reproduce_reference_examples();

    bool all_pass = true;
    nlohmann::json doc;
    nlohmann::json jrows = nlohmann::json::array();
    for (const auto& row : rows) {
        if (!row.informational && !row.pass) all_pass = false;
        jrows.push_back({{"quantity", row.quantity},
                         {"reference", row.expected},
                         {"computed", row.computed},
                         {"delta", row.delta},
                         {"tolerance", row.tolerance},
                         {"pass", row.pass},
                         {"informational", row.informational}});
    }
    doc["rows"] = jrows;
    doc["pass"] = all_pass;

    emit(doc, json_flag, out_path, out);
    if (!json_flag) {
        out << std::left << std::setw(58) << "quantity" << std::setw(14) << "reference"
            << std::setw(14) << "computed" << std::setw(12) << "|delta|" << std::setw(10)
            << "tol" << "status\n";
        for (const auto& row : rows) {
            out << std::left << std::setw(58) << row.quantity << std::setw(14) << row.expected
                << std::setw(14) << row.computed;
            if (row.tolerance > 0.0 || row.delta > 0.0)
                out << std::setw(12) << std::setprecision(3) << row.delta << std::setw(10)
                    << row.tolerance;
            else
                out << std::setw(12) << "-" << std::setw(10) << "-";
            out << (row.informational ? "note" : (row.pass ? "pass" : "FAIL")) << "\n";
        }
        out << (all_pass ? "all rows pass\n" : "FAILURES present\n");
    }
    return all_pass ? 0 : 1;
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"quadratic hedging and exercise-policy analysis on futures-price lattices"};
    app.require_subcommand(1);

    CommonInputs inputs;
    bool json_flag = false;
    std::string out_path;
    std::string method = "vo";
    std::uint64_t cap = kDefaultPolicyCap;
    std::vector<double> checks;
    std::uint64_t paths = 100000;
    std::uint64_t seed = 0;
    std::optional<double> v0;
    std::string anchor;

    auto add_common = [&](CLI::App* cmd, bool model, bool payoff) {
        if (model) cmd->add_option("--model", inputs.model_path, "lattice file")->required();
        if (payoff) cmd->add_option("--payoff", inputs.payoff_path, "payoff file")->required();
        cmd->add_flag("--json", json_flag, "emit a machine-readable document");
        cmd->add_option("--out", out_path, "write the output document to a file");
    };

    CLI::App* validate = app.add_subcommand("validate", "check model file invariants");
    add_common(validate, true, false);
    validate->add_option("--payoff", inputs.payoff_path, "payoff file to validate");
    validate->add_option("--measure", inputs.measure_path, "risk-neutral measure file to validate");

    CLI::App* hedge = app.add_subcommand("hedge", "hedging coefficients for a policy");
    add_common(hedge, true, true);
    hedge->add_option("--policy", inputs.policy_path, "exercise policy file");
    hedge->add_option("--v0", v0, "fix the initial capital");
    hedge->add_option("--anchor", anchor, "anchor the initial capital ('rn')");
    hedge->add_option("--measure", inputs.measure_path, "risk-neutral measure for --anchor rn");

    CLI::App* measure = app.add_subcommand("measure", "variance-optimal measure diagnostics");
    add_common(measure, true, true);
    measure->add_option("--policy", inputs.policy_path, "exercise policy file");

    CLI::App* optimize = app.add_subcommand("optimize", "optimize the exercise policy");
    add_common(optimize, true, true);
    optimize->add_option("--method", method, "vo | tc | rn")->required();
    optimize->add_option("--cap", cap, "enumeration cap for --method vo");
    optimize->add_option("--measure", inputs.measure_path, "risk-neutral measure for --method rn");

    CLI::App* bounds = app.add_subcommand("bounds", "no-arbitrage value interval of a policy");
    add_common(bounds, true, true);
    bounds->add_option("--policy", inputs.policy_path, "exercise policy file");
    bounds->add_option("--check", checks, "values to test for membership");

    CLI::App* simulate = app.add_subcommand("simulate", "Monte Carlo check of the hedge");
    add_common(simulate, true, true);
    simulate->add_option("--policy", inputs.policy_path, "exercise policy file");
    simulate->add_option("--paths", paths, "number of paths");
    simulate->add_option("--seed", seed, "random seed");
    simulate->add_option("--v0", v0, "fix the initial capital");
    simulate->add_option("--anchor", anchor, "anchor the initial capital ('rn')");
    simulate->add_option("--measure", inputs.measure_path, "risk-neutral measure for --anchor rn");

    CLI::App* ex = app.add_subcommand("examples", "run the built-in reference examples");
    ex->add_flag("--json", json_flag, "emit a machine-readable document");
    ex->add_option("--out", out_path, "write the output document to a file");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {  // --help
            out << app.help();
            return 0;
        }
        err << "usage error: " << e.what() << "\n";
        return 2;
    }

    try {
        if (validate->parsed()) return cmd_validate(inputs, json_flag, out_path, out);
        if (hedge->parsed()) return cmd_hedge(inputs, v0, anchor, json_flag, out_path, out);
        if (measure->parsed()) return cmd_measure(inputs, json_flag, out_path, out);
        if (optimize->parsed())
            return cmd_optimize(inputs, method, cap, json_flag, out_path, out);
        if (bounds->parsed()) return cmd_bounds(inputs, checks, json_flag, out_path, out);
        if (simulate->parsed())
            return cmd_simulate(inputs, paths, seed, v0, anchor, json_flag, out_path, out);
        if (ex->parsed()) return cmd_examples(json_flag, out_path, out);
        err << "usage error: no subcommand\n";
        return 2;
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace quadhedge::cli
