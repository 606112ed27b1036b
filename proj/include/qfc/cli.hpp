#pragma once

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "qfc/io.hpp"

namespace qfc::cli {

using io::json;

inline constexpr int kExitOk = 0;
inline constexpr int kExitParse = 2;
inline constexpr int kExitInvariant = 3;
inline constexpr const char* kToleranceEnv = "QFC_TOLERANCES";

struct Options {
    std::string task;
    std::string preset = "two-state";
    double alpha = 0.25;
    double p = 0.2;
    double mu = 2.0;
    std::size_t horizon = 2;
    std::string model_path;
    std::string cost_path;
    std::string initial_path;
    std::optional<json> initial_inline; // scenario files may embed the matrix
    std::string format = "pretty";
    std::string out;
    std::uint64_t seed = 42;
    std::size_t samples = 0;
    std::string controller = "rs";
    std::vector<double> alpha_true{0.15, 0.20, 0.25, 0.30, 0.35};
    std::vector<double> mu_grid;
    std::vector<double> p_grid;
};

struct Report {
    json data;
    std::string csv;
    std::string pretty;
};

namespace detail {

struct Problem {
    std::unique_ptr<TransferModel> model;
    std::unique_ptr<CostModel> cost;
    std::unique_ptr<OperatorValuedCost> rcost;
    std::unique_ptr<DensityState> initial;
    bool preset = false;
};

inline Problem load_problem(const Options& o) {
    Problem pr;
    if (!o.model_path.empty()) {
        pr.model = std::make_unique<TransferModel>(io::model_from_json(io::load_file(o.model_path)));
    } else if (o.preset == "two-state") {
        pr.model = std::make_unique<TransferModel>(twostate::build_two_state_model(o.alpha));
        pr.preset = true;
    } else {
        throw ParseError("unknown preset '" + o.preset + "' and no --model given");
    }
    if (!o.cost_path.empty()) {
        auto cf = io::cost_from_json(io::load_file(o.cost_path), pr.model->controls());
        pr.cost = std::make_unique<CostModel>(std::move(cf.cost));
        pr.rcost = std::make_unique<OperatorValuedCost>(std::move(cf.rcost));
    } else if (pr.preset) {
        pr.cost = std::make_unique<CostModel>(twostate::build_two_state_costs(o.p, o.mu));
        pr.rcost = std::make_unique<OperatorValuedCost>(OperatorValuedCost::risk_sensitive(*pr.cost));
    } else {
        throw ParseError("a cost file is required with --model");
    }
    if (pr.cost->dim() != pr.model->dim() || pr.cost->num_controls() != pr.model->num_controls())
        throw DimensionMismatch("cost does not match the model");
    if (o.initial_inline)
        pr.initial = std::make_unique<DensityState>(io::matrix_from_json(*o.initial_inline));
    else if (!o.initial_path.empty())
        pr.initial = std::make_unique<DensityState>(io::matrix_from_json(io::load_file(o.initial_path)));
    else if (pr.preset)
        pr.initial = std::make_unique<DensityState>(twostate::initial_state());
    else
        pr.initial = std::make_unique<DensityState>(maximally_mixed(pr.model->dim()));
    if (pr.initial->dim() != pr.model->dim())
        throw DimensionMismatch("initial state does not match the model");
    return pr;
}

inline void require_preset(const Problem& pr, const char* task) {
    if (!pr.preset)
        throw ParseError(std::string(task) + " needs --preset two-state");
}

inline json parameters(const Options& o, const Problem& pr) {
    json j;
    if (pr.preset) {
        j["preset"] = o.preset;
        j["alpha"] = io::round9(o.alpha);
    } else {
        j["model"] = std::filesystem::path(o.model_path).filename().string();
    }
    if (!o.cost_path.empty())
        j["cost"] = std::filesystem::path(o.cost_path).filename().string();
    else
        j["p"] = io::round9(o.p);
    j["mu"] = io::round9(pr.cost->mu());
    j["horizon"] = o.horizon;
    j["initial_state"] = io::to_json(*pr.initial);
    return j;
}

inline std::string csv_history(const History& h, const LabelSet& outcomes) {
    return h.empty() ? std::string("root") : io::history_string(h, outcomes);
}

inline double relative_gap(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

inline json model_check(const TransferModel& model) {
    const auto r = check_model_invariants(model, 100);
    return {{"samples", r.samples},
            {"max_normalization_error", io::round9(r.max_normalization_error)},
            {"min_eigenvalue", io::round9(r.min_eigenvalue)},
            {"ok", r.ok()}};
}

inline void policy_tables(const PolicyTree& tree, const TransferModel& model, Report& r) {
    std::ostringstream csv;
    csv << "history,control,value";
    for (const auto& u : model.controls().labels())
        csv << ",value_u" << u;
    for (const auto& y : model.outcomes().labels())
        csv << ",prob_y" << y;
    csv << "\n";
    std::ostringstream pretty;
    for (const auto& [h, node] : tree.nodes()) {
        csv << csv_history(h, model.outcomes()) << ',' << (node.control ? model.controls()[*node.control] : "")
            << ',' << io::fmt9(node.value);
        for (std::size_t u = 0; u < model.num_controls(); ++u)
            csv << ',' << (u < node.comparands.size() ? io::fmt9(node.comparands[u]) : "");
        for (std::size_t y = 0; y < model.num_outcomes(); ++y)
            csv << ',' << (y < node.branch_probs.size() ? io::fmt9(node.branch_probs[y]) : "");
        csv << "\n";

        pretty << "  [" << io::history_string(h, model.outcomes()) << "]";
        if (node.control)
            pretty << " u = " << model.controls()[*node.control];
        pretty << "  value " << io::fmt9(node.value) << "  state " << io::pretty(node.state);
        if (!node.comparands.empty()) {
            pretty << "  (";
            for (std::size_t u = 0; u < node.comparands.size(); ++u)
                pretty << (u ? ", " : "") << model.controls()[u] << ": " << io::fmt9(node.comparands[u]);
            pretty << ")";
        }
        pretty << "\n";
    }
    r.csv = csv.str();
    r.pretty += "policy tree:\n" + pretty.str();
}

inline Report solve(const Options& o, bool risk_sensitive) {
    const Problem pr = load_problem(o);
    Report r;
    PolicyTree tree;
    double achieved = 0.0;
    if (risk_sensitive) {
        tree = solve_risk_sensitive(*pr.model, *pr.rcost, pr.cost->terminal_mult(), o.horizon, *pr.initial);
        achieved = eval_multiplicative(*pr.model, *pr.rcost, pr.cost->terminal_mult(), Controller::from_tree(tree),
                                       *pr.initial, o.horizon);
    } else {
        const DensityState w0 = pr.initial->normalized();
        tree = solve_risk_neutral(*pr.model, *pr.cost, o.horizon, w0);
        achieved = eval_risk_neutral(*pr.model, *pr.cost, Controller::from_tree(tree), w0, o.horizon);
    }
    const bool attains = relative_gap(achieved, tree.root_value()) <= 1e-9;
    r.data["task"] = o.task;
    r.data["parameters"] = parameters(o, pr);
    r.data["value"] = io::round9(tree.root_value());
    r.data["policy"] = io::policy_to_json(tree, *pr.model);
    r.data["checks"] = {{"model", model_check(*pr.model)},
                        {"policy_cost", io::round9(achieved)},
                        {"policy_attains_value", attains}};
    policy_tables(tree, *pr.model, r);
    r.pretty = o.task + "\n" + (risk_sensitive ? "W" : "V") + "(w0, 0) = " + io::fmt9(tree.root_value()) + "\n" +
               r.pretty + "policy cost " + io::fmt9(achieved) + (attains ? " (attains value)" : " (GAP)") + "\n";
    if (!attains)
        throw InvariantViolation("extracted policy does not attain the optimal value");
    return r;
}

inline Controller make_controller(const Options& o, const Problem& pr) {
    const std::string& c = o.controller;
    if (c == "rs")
        return Controller::from_tree(
            solve_risk_sensitive(*pr.model, *pr.rcost, pr.cost->terminal_mult(), o.horizon, *pr.initial));
    if (c == "rn")
        return Controller::from_tree(solve_risk_neutral(*pr.model, *pr.cost, o.horizon, pr.initial->normalized()));
    if (c == "reference") {
        require_preset(pr, "--controller reference");
        return twostate::reference_controller();
    }
    if (c.rfind("constant:", 0) == 0)
        return Controller::constant(pr.model->control_index(c.substr(9)));
    if (c.rfind("random:", 0) == 0)
        return Controller::random(std::stoull(c.substr(7)), pr.model->num_controls());
    throw ParseError("unknown controller '" + c + "'");
}

inline double path_cost(const Trajectory& t, const CostModel& cost) {
    double c = value(t.states.back(), cost.terminal());
    for (std::size_t i = 0; i < t.controls.size(); ++i)
        c += value(t.states[i], cost.stage(t.controls[i]));
    return c;
}

inline Report simulate(const Options& o) {
    const Problem pr = load_problem(o);
    const Controller k = make_controller(o, pr);
    const auto cl = enumerate_closed_loop(*pr.model, k, *pr.initial, o.horizon);
    const double expected = closed_loop_expectation(cl, [&](const Trajectory& t) { return path_cost(t, *pr.cost); });

    Report r;
    r.data["task"] = o.task;
    r.data["parameters"] = parameters(o, pr);
    r.data["parameters"]["controller"] = o.controller;
    json paths = json::array();
    for (const auto& t : cl.trajectories)
        paths.push_back(io::trajectory_to_json(t, *pr.model));
    r.data["trajectories"] = std::move(paths);
    r.data["expected_cost"] = io::round9(expected);

    // Average terminal state, i.e. the master-equation evolution under K.
    HermitianMatrix rho = HermitianMatrix::zero(pr.model->dim());
    for (const auto& t : cl.trajectories)
        rho += t.states.back().hermitian() * t.probability;
    r.data["terminal_average_state"] = io::to_json(rho);

    std::ostringstream csv;
    csv << "kind,outcomes,controls,probability,cost\n";
    std::ostringstream pretty;
    pretty << o.task << " (controller " << o.controller << ")\n";
    for (const auto& t : cl.trajectories) {
        std::string controls;
        for (std::size_t i = 0; i < t.controls.size(); ++i)
            controls += (i ? " " : "") + pr.model->controls()[t.controls[i]];
        csv << "exact," << io::history_string(t.outcomes, pr.model->outcomes()) << ',' << controls << ','
            << io::fmt9(t.probability) << ',' << io::fmt9(path_cost(t, *pr.cost)) << "\n";
        pretty << "  y = [" << io::history_string(t.outcomes, pr.model->outcomes()) << "]  u = [" << controls
               << "]  prob " << io::fmt9(t.probability) << "  final " << io::pretty(t.states.back()) << "\n";
    }
    pretty << "expected cost " << io::fmt9(expected) << "\n";
    pretty << "average terminal state " << io::pretty(rho) << "\n";

    if (o.samples > 0) {
        double sum = 0.0, sum_sq = 0.0;
        std::map<History, std::size_t> counts;
        for (std::size_t i = 0; i < o.samples; ++i) {
            const auto t = sample_trajectory(*pr.model, k, *pr.initial, o.horizon, SplitMix64::stream(o.seed, i).next());
            const double c = path_cost(t, *pr.cost);
            sum += c;
            sum_sq += c * c;
            ++counts[t.outcomes];
        }
        const double n = static_cast<double>(o.samples);
        const double mean = sum / n;
        const double var = o.samples > 1 ? std::max(0.0, (sum_sq - n * mean * mean) / (n - 1.0)) : 0.0;
        const double se = std::sqrt(var / n);
        json freq = json::object();
        for (const auto& [h, c] : counts) {
            freq[io::history_string(h, pr.model->outcomes())] = io::round9(static_cast<double>(c) / n);
            csv << "sampled," << io::history_string(h, pr.model->outcomes()) << ",," << io::fmt9(static_cast<double>(c) / n)
                << ",\n";
        }
        r.data["monte_carlo"] = {{"seed", o.seed},
                                 {"samples", o.samples},
                                 {"mean_cost", io::round9(mean)},
                                 {"standard_error", io::round9(se)},
                                 {"frequencies", std::move(freq)}};
        pretty << "monte carlo (" << o.samples << " samples, seed " << o.seed << "): mean cost " << io::fmt9(mean)
               << " +- " << io::fmt9(se) << "\n";
    }
    r.csv = csv.str();
    r.pretty = pretty.str();
    return r;
}

inline Report robustness(const Options& o) {
    const Problem pr = load_problem(o);
    require_preset(pr, "robustness");
    const std::vector<double> mus = o.mu_grid.empty() ? std::vector<double>{0.5, 1.0, 2.0, 4.0} : o.mu_grid;
    Report r;
    r.data["task"] = o.task;
    r.data["parameters"] = parameters(o, pr);
    json rows = json::array();
    std::ostringstream csv;
    csv << "alpha_true,mu,lhs,rs_term,re_term,rhs,holds\n";
    std::ostringstream pretty;
    pretty << o.task << " (alpha nominal " << io::fmt9(o.alpha) << ", p " << io::fmt9(o.p) << ")\n";
    bool all = true;
    for (double at : o.alpha_true) {
        const TransferModel true_model = twostate::build_two_state_model(at);
        for (double mu : mus) {
            const auto b = robustness_bound({*pr.model, true_model}, pr.cost->with_mu(mu), *pr.initial, o.horizon);
            all = all && b.holds;
            rows.push_back({{"alpha_true", io::round9(at)},
                            {"mu", io::round9(mu)},
                            {"lhs", io::round9(b.lhs)},
                            {"rs_term", io::round9(b.rs_term)},
                            {"re_term", io::round9(b.re_term)},
                            {"rhs", io::round9(b.rhs)},
                            {"holds", b.holds}});
            csv << io::fmt9(at) << ',' << io::fmt9(mu) << ',' << io::fmt9(b.lhs) << ',' << io::fmt9(b.rs_term) << ','
                << io::fmt9(b.re_term) << ',' << io::fmt9(b.rhs) << ',' << (b.holds ? "true" : "false") << "\n";
            pretty << "  alpha_true " << io::fmt9(at) << "  mu " << io::fmt9(mu) << "  lhs " << io::fmt9(b.lhs)
                   << " <= " << io::fmt9(b.rhs) << " (rs " << io::fmt9(b.rs_term) << " + re " << io::fmt9(b.re_term)
                   << ")  " << (b.holds ? "holds" : "VIOLATED") << "\n";
        }
    }
    r.data["rows"] = std::move(rows);
    r.data["all_hold"] = all;
    r.csv = csv.str();
    r.pretty = pretty.str();
    if (!all)
        throw InvariantViolation("robustness bound violated");
    return r;
}

inline Report mu_limit(const Options& o) {
    const Problem pr = load_problem(o);
    const std::vector<double> mus = o.mu_grid.empty() ? std::vector<double>{1e-1, 1e-2, 1e-3} : o.mu_grid;
    const auto lim = small_mu_limit(*pr.model, pr.cost->stages(), pr.cost->terminal(), *pr.initial, o.horizon, mus);
    Report r;
    r.data["task"] = o.task;
    r.data["parameters"] = parameters(o, pr);
    r.data["risk_neutral_value"] = io::round9(lim.risk_neutral_value);
    json rows = json::array();
    std::ostringstream csv;
    csv << "mu,log_value,risk_neutral_value,gap\n";
    std::ostringstream pretty;
    pretty << o.task << "\nV(w0, 0) = " << io::fmt9(lim.risk_neutral_value) << "\n";
    for (const auto& pt : lim.points) {
        const double gap = pt.log_value - lim.risk_neutral_value;
        rows.push_back({{"mu", io::round9(pt.mu)}, {"log_value", io::round9(pt.log_value)}, {"gap", io::round9(gap)}});
        csv << io::fmt9(pt.mu) << ',' << io::fmt9(pt.log_value) << ',' << io::fmt9(lim.risk_neutral_value) << ','
            << io::fmt9(gap) << "\n";
        pretty << "  mu " << io::fmt9(pt.mu) << "  (1/mu) log W = " << io::fmt9(pt.log_value) << "  gap "
               << io::fmt9(gap) << "\n";
    }
    r.data["points"] = std::move(rows);
    r.csv = csv.str();
    r.pretty = pretty.str();
    return r;
}

inline Report threshold(const Options& o) {
    const Problem pr = load_problem(o);
    require_preset(pr, "threshold-scan");
    std::vector<double> grid = o.p_grid;
    if (grid.empty())
        for (int i = 0; i <= 100; ++i)
            grid.push_back(i / 100.0);
    const auto scan = twostate::threshold_scan(o.alpha, o.mu, grid);
    Report r;
    r.data["task"] = o.task;
    r.data["parameters"] = {{"preset", o.preset}, {"alpha", io::round9(o.alpha)}, {"mu", io::round9(o.mu)}};
    json rows = json::array();
    std::ostringstream csv;
    csv << "p,risk_neutral_control,risk_sensitive_control\n";
    std::ostringstream pretty;
    pretty << o.task << " (node after u0 = 0, y1 = -1)\n";
    for (const auto& row : scan.rows) {
        rows.push_back({{"p", io::round9(row.p)},
                        {"risk_neutral", pr.model->controls()[row.risk_neutral]},
                        {"risk_sensitive", pr.model->controls()[row.risk_sensitive]}});
        csv << io::fmt9(row.p) << ',' << pr.model->controls()[row.risk_neutral] << ','
            << pr.model->controls()[row.risk_sensitive] << "\n";
        pretty << "  p " << io::fmt9(row.p) << "  rn " << pr.model->controls()[row.risk_neutral] << "  rs "
               << pr.model->controls()[row.risk_sensitive] << "\n";
    }
    auto last = [](const std::optional<double>& v) { return v ? json(io::round9(*v)) : json(nullptr); };
    r.data["rows"] = std::move(rows);
    r.data["risk_neutral_last_active"] = last(scan.risk_neutral_last_active);
    r.data["risk_sensitive_last_active"] = last(scan.risk_sensitive_last_active);
    auto last_text = [](const std::optional<double>& v) { return v ? io::fmt9(*v) : std::string("none"); };
    pretty << "largest p with control 1: risk-neutral " << last_text(scan.risk_neutral_last_active)
           << ", risk-sensitive " << last_text(scan.risk_sensitive_last_active) << "\n";
    r.csv = csv.str();
    r.pretty = pretty.str();
    return r;
}

inline Report dispatch(const Options& o) {
    if (o.horizon == 0)
        throw ParseError("horizon must be positive");
    if (o.task == "solve-rn")
        return solve(o, false);
    if (o.task == "solve-rs")
        return solve(o, true);
    if (o.task == "simulate")
        return simulate(o);
    if (o.task == "robustness")
        return robustness(o);
    if (o.task == "mu-limit")
        return mu_limit(o);
    if (o.task == "threshold-scan")
        return threshold(o);
    throw ParseError("unknown task '" + o.task + "'");
}

// Scenario file: the same fields as the flags, plus "task". Relative paths
// resolve against the scenario's directory; "initial" may be a matrix.
inline Options options_from_scenario(const std::string& path, Options o) {
    const json j = io::load_file(path);
    if (!j.is_object())
        throw ParseError("scenario: expected an object");
    const auto base = std::filesystem::path(path).parent_path();
    auto resolve = [&](const std::string& p) {
        const std::filesystem::path fp(p);
        return fp.is_absolute() ? p : (base / fp).string();
    };
    try {
        o.task = j.at("task").get<std::string>();
        o.preset = j.value("preset", o.preset);
        o.alpha = j.value("alpha", o.alpha);
        o.p = j.value("p", o.p);
        o.mu = j.value("mu", o.mu);
        o.horizon = j.value("horizon", o.horizon);
        if (j.contains("model"))
            o.model_path = resolve(j.at("model").get<std::string>());
        if (j.contains("cost"))
            o.cost_path = resolve(j.at("cost").get<std::string>());
        if (j.contains("initial")) {
            if (j.at("initial").is_string())
                o.initial_path = resolve(j.at("initial").get<std::string>());
            else
                o.initial_inline = j.at("initial");
        }
        if (j.contains("format"))
            o.format = j.at("format").get<std::string>();
        o.seed = j.value("seed", o.seed);
        o.samples = j.value("samples", o.samples);
        o.controller = j.value("controller", o.controller);
        o.alpha_true = j.value("alpha_true", o.alpha_true);
        o.mu_grid = j.value("mu_grid", o.mu_grid);
        o.p_grid = j.value("p_grid", o.p_grid);
    } catch (const json::exception& e) {
        throw ParseError(std::string("scenario: ") + e.what());
    }
    return o;
}

inline std::string render(const Report& r, const std::string& format) {
    if (format == "json")
        return r.data.dump(2) + "\n";
    if (format == "csv")
        return r.csv;
    if (format == "pretty")
        return r.pretty;
    throw ParseError("unknown format '" + format + "'");
}

inline void add_common(CLI::App& sub, Options& o) {
    sub.add_option("--preset", o.preset, "built-in scenario (two-state)");
    sub.add_option("--alpha", o.alpha, "measurement error probability");
    sub.add_option("--p", o.p, "extra cost of the flip control");
    sub.add_option("--mu", o.mu, "risk parameter");
    sub.add_option("--horizon", o.horizon, "number of control steps M");
    sub.add_option("--model", o.model_path, "model file")->check(CLI::ExistingFile);
    sub.add_option("--cost", o.cost_path, "cost file")->check(CLI::ExistingFile);
    sub.add_option("--initial", o.initial_path, "initial state matrix file")->check(CLI::ExistingFile);
    sub.add_option("--format", o.format, "json | csv | pretty")
        ->check(CLI::IsMember({"json", "csv", "pretty"}));
    sub.add_option("--out", o.out, "write the report here instead of stdout");
    sub.add_option("--seed", o.seed, "Monte Carlo seed");
    sub.add_option("--samples", o.samples, "Monte Carlo sample count");
    sub.add_option("--controller", o.controller, "rs | rn | reference | constant:<label> | random:<seed>");
    sub.add_option("--alpha-true", o.alpha_true, "true-model alphas for robustness");
    sub.add_option("--mu-grid", o.mu_grid, "mu values");
    sub.add_option("--p-grid", o.p_grid, "p values for threshold-scan");
}

} // namespace detail

// Entry point shared by the tool and the tests.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Measurement-feedback control of finite quantum systems"};
    app.require_subcommand(1);
    Options opts;
    std::string scenario;
    const std::pair<const char*, const char*> tasks[] = {
        {"solve-rn", "optimal risk-neutral policy tree"},
        {"solve-rs", "optimal risk-sensitive policy tree"},
        {"simulate", "closed-loop paths, expected cost and optional Monte Carlo"},
        {"robustness", "robustness bound over a grid of true models and mu"},
        {"mu-limit", "log risk-sensitive value as mu decreases"},
        {"threshold-scan", "control after y1 = -1 as the flip cost p varies"}};
    for (const auto& [name, help] : tasks) {
        auto* sub = app.add_subcommand(name, help);
        detail::add_common(*sub, opts);
        sub->callback([&opts, name] { opts.task = name; });
    }
    auto* run_cmd = app.add_subcommand("run", "run a scenario file");
    run_cmd->add_option("scenario", scenario, "scenario file")->required();
    run_cmd->add_option("--format", opts.format, "override the scenario's format")
        ->check(CLI::IsMember({"json", "csv", "pretty"}));
    run_cmd->add_option("--out", opts.out, "write the report here instead of stdout");
    run_cmd->callback([&opts] { opts.task = "run"; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitParse;
    }

    try {
        if (const char* profile = std::getenv(kToleranceEnv))
            tolerances() = tolerance_profile(profile);
        if (opts.task == "run") {
            const std::string format_override = run_cmd->count("--format") ? opts.format : "";
            const std::string out_path = opts.out;
            opts = detail::options_from_scenario(scenario, Options{});
            if (!format_override.empty())
                opts.format = format_override;
            opts.out = out_path;
        }
        const std::string text = detail::render(detail::dispatch(opts), opts.format);
        if (opts.out.empty()) {
            out << text;
        } else {
            std::ofstream f(opts.out, std::ios::binary);
            if (!f)
                throw ParseError("cannot write " + opts.out);
            f << text;
        }
        return kExitOk;
    } catch (const ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kExitParse;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kExitInvariant;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitInvariant;
    }
}

} // namespace qfc::cli
