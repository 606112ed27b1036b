#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "support.hpp"

#include "qfc/cli.hpp"

using namespace qfc;
using qt::diag2;
using qt::mat2;
namespace ts = qfc::twostate;

namespace {

struct CliResult {
    int code;
    std::string out;
    std::string err;
};

CliResult run_cli(std::vector<std::string> args) {
    args.insert(args.begin(), "qfc");
    std::vector<const char*> argv;
    for (const auto& a : args)
        argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::string scenario(const std::string& name) { return std::string(QFC_SCENARIO_DIR) + "/" + name; }

std::filesystem::path temp_file(const std::string& name, const std::string& text) {
    const auto path = std::filesystem::temp_directory_path() / name;
    std::ofstream(path) << text;
    return path;
}

} // namespace

TEST(Io, Fmt9) {
    EXPECT_EQ(io::fmt9(3.14592653589), "3.14592654");
    EXPECT_EQ(io::fmt9(0.0), "0");
    EXPECT_EQ(io::round9(1.0 / 3.0), 0.333333333);
}

TEST(Io, MatrixRoundTrip) {
    const Matrix m = mat2(0.5, Complex(0.25, -0.125), Complex(0.25, 0.125), 0.5);
    const auto j = io::to_json(m);
    EXPECT_EQ(j.dump(), "[[[0.5,0.0],[0.25,-0.125]],[[0.25,0.125],[0.5,0.0]]]");
    EXPECT_LT(qt::max_diff(io::matrix_from_json(j), m), 1e-15);
    EXPECT_LT(qt::max_diff(io::matrix_from_json(io::json::parse("[[1, 0], [0, 2]]")), diag2(1, 2)), 1e-15);
    EXPECT_THROW(io::matrix_from_json(io::json::parse("[[1, 0], [0]]")), ParseError);
    EXPECT_THROW(io::matrix_from_json(io::json::parse("[[\"a\"]]")), ParseError);
}

TEST(Io, ModelFileMatchesPreset) {
    const auto file = io::model_from_json(io::load_file(scenario("two_state_model.json")));
    const auto preset = ts::build_two_state_model(0.25);
    auto g = qt::rng(81);
    for (int i = 0; i < 20; ++i) {
        const auto w = random_density(2, g);
        for (ControlIndex u = 0; u < 2; ++u)
            for (OutcomeIndex y = 0; y < 2; ++y)
                EXPECT_LT(qt::max_diff(file.apply(u, y, w.hermitian()).matrix(), preset.apply(u, y, w.hermitian()).matrix()),
                          1e-15);
    }
}

TEST(Io, StructuralModelRoundTrip) {
    const auto preset = ts::build_two_state_model(0.3);
    const auto back = io::model_from_json(io::model_to_json(preset));
    EXPECT_TRUE(back.is_structural());
    const auto w = DensityState(mat2(0.6, 0.2, 0.2, 0.4));
    for (ControlIndex u = 0; u < 2; ++u)
        for (OutcomeIndex y = 0; y < 2; ++y)
            EXPECT_LT(qt::max_diff(back.apply(u, y, w.hermitian()).matrix(), preset.apply(u, y, w.hermitian()).matrix()),
                      1e-9);
}

TEST(Io, CostFile) {
    const auto model = ts::build_two_state_model(0.25);
    const auto cf = io::cost_from_json(io::load_file(scenario("two_state_cost.json")), model.controls());
    const auto preset = ts::build_two_state_costs(0.2, 2.0);
    EXPECT_LT(qt::max_diff(cf.cost.stage(1).matrix(), preset.stage(1).matrix()), 1e-15);
    EXPECT_LT(qt::max_diff(cf.cost.terminal_mult().matrix(), preset.terminal_mult().matrix()), 1e-12);
    EXPECT_FALSE(cf.rcost.is_linear());
    const auto bad = io::json::parse(R"({"stage": {"0": [[1]]}, "terminal": [[1]]})");
    EXPECT_THROW(io::cost_from_json(bad, model.controls()), ParseError);
}

TEST(Io, PolicyTreeJson) {
    const auto m = ts::build_two_state_model(0.0);
    const auto tree = solve_risk_neutral(m, ts::build_two_state_costs(0.0, 1.0), 2, DensityState(mat2(0.5, 0.5, 0.5, 0.5)));
    const auto j = io::policy_to_json(tree, m);
    EXPECT_EQ(j["control"], "0");
    EXPECT_EQ(j["children"]["-1"]["control"], "1");
    EXPECT_EQ(j["children"]["1"]["control"], "0");
    EXPECT_EQ(j["children"]["-1"]["history"], io::json::parse(R"(["-1"])"));
    EXPECT_EQ(j["branch_probabilities"]["-1"], 0.5);
    EXPECT_TRUE(j["children"]["-1"]["children"]["1"]["control"].is_null());
}

TEST(Cli, SolveRiskSensitivePreset) {
    const auto r = run_cli({"solve-rs", "--preset", "two-state", "--alpha", "0.25", "--mu", "2", "--p", "0.2",
                            "--horizon", "2", "--format", "json"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto j = io::json::parse(r.out);
    EXPECT_EQ(j["policy"]["control"], "0");
    const Matrix w1 = io::matrix_from_json(j["policy"]["children"]["-1"]["state"]);
    EXPECT_LT(qt::max_diff(w1, diag2(3.1459, 1.04863)), 2e-3);
    EXPECT_TRUE(j["checks"]["policy_attains_value"].get<bool>());
}

TEST(Cli, SolveRiskNeutralPerfectMeasurement) {
    const auto r = run_cli({"solve-rn", "--preset", "two-state", "--alpha", "0", "--p", "0", "--horizon", "2",
                            "--format", "csv"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("\n-1,1,"), std::string::npos) << r.out;
    EXPECT_NE(r.out.find("\n1,0,"), std::string::npos) << r.out;
    EXPECT_NE(r.out.find("\nroot,0,1,"), std::string::npos) << r.out;
}

TEST(Cli, PrettyRendersMatricesInline) {
    const auto r = run_cli({"solve-rs", "--alpha", "0.25", "--mu", "2", "--p", "0.2"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("[-1] u = 1"), std::string::npos) << r.out;
    EXPECT_NE(r.out.find("[[3.14589"), std::string::npos) << r.out;
}

TEST(Cli, SimulateIsDeterministic) {
    const std::vector<std::string> args{"simulate", "--alpha", "0.25", "--seed", "42", "--samples", "2000",
                                        "--controller", "reference", "--format", "json"};
    const auto a = run_cli(args);
    const auto b = run_cli(args);
    ASSERT_EQ(a.code, 0) << a.err;
    EXPECT_EQ(a.out, b.out);
    const auto c = run_cli({"simulate", "--alpha", "0.25", "--seed", "43", "--samples", "2000", "--controller",
                            "reference", "--format", "json"});
    EXPECT_NE(a.out, c.out);
}

TEST(Cli, ScenarioReplayMatchesFlags) {
    const auto from_file = run_cli({"run", scenario("two_state_solve_rs.json")});
    const auto from_flags = run_cli({"solve-rs", "--preset", "two-state", "--alpha", "0.25", "--p", "0.2", "--mu", "2",
                                     "--horizon", "2", "--format", "json"});
    ASSERT_EQ(from_file.code, 0) << from_file.err;
    EXPECT_EQ(from_file.out, from_flags.out);
    EXPECT_EQ(run_cli({"run", scenario("two_state_solve_rs.json")}).out, from_file.out);
}

TEST(Cli, FileBasedScenarioAgreesWithPreset) {
    const auto files = run_cli({"run", scenario("two_state_from_files.json")});
    ASSERT_EQ(files.code, 0) << files.err;
    const auto preset = run_cli({"run", scenario("two_state_solve_rs.json")});
    EXPECT_EQ(io::json::parse(files.out)["value"], io::json::parse(preset.out)["value"]);
    EXPECT_EQ(io::json::parse(files.out)["policy"]["children"], io::json::parse(preset.out)["policy"]["children"]);
}

TEST(Cli, ShippedScenariosRun) {
    for (const char* name : {"two_state_perfect.json", "threshold_scan.json", "robustness_sweep.json", "simulate.json"}) {
        const auto r = run_cli({"run", scenario(name)});
        EXPECT_EQ(r.code, 0) << name << ": " << r.err;
        EXPECT_FALSE(r.out.empty());
    }
}

TEST(Cli, RobustnessCsvColumns) {
    const auto r = run_cli({"robustness", "--alpha", "0.25", "--p", "0.2", "--alpha-true", "0.15", "0.35", "--mu-grid",
                            "2", "--format", "csv"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(r.out.substr(0, r.out.find('\n')), "alpha_true,mu,lhs,rs_term,re_term,rhs,holds");
    EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 3);
    EXPECT_EQ(r.out.find("false"), std::string::npos);
}

TEST(Cli, MuLimitAndThresholdScan) {
    const auto lim = run_cli({"mu-limit", "--alpha", "0.25", "--p", "0.2", "--format", "json"});
    ASSERT_EQ(lim.code, 0) << lim.err;
    const auto j = io::json::parse(lim.out);
    EXPECT_LT(std::abs(j["points"].back()["gap"].get<double>()), 5e-3);
    const auto scan = run_cli({"threshold-scan", "--alpha", "0.25", "--mu", "2", "--p-grid", "0.39", "0.41", "--format",
                               "json"});
    ASSERT_EQ(scan.code, 0) << scan.err;
    EXPECT_EQ(io::json::parse(scan.out)["risk_sensitive_last_active"], 0.39);
}

TEST(Cli, OutFile) {
    const auto path = std::filesystem::temp_directory_path() / "qfc_cli_out.json";
    std::filesystem::remove(path);
    const auto r = run_cli({"solve-rn", "--alpha", "0.25", "--format", "json", "--out", path.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_TRUE(r.out.empty());
    EXPECT_NO_THROW(io::load_file(path.string()));
}

TEST(Cli, ParseErrorsExitTwo) {
    EXPECT_EQ(run_cli({"solve-rs", "--format", "xml"}).code, cli::kExitParse);
    EXPECT_EQ(run_cli({"bogus"}).code, cli::kExitParse);
    EXPECT_EQ(run_cli({"solve-rs", "--alpha", "abc"}).code, cli::kExitParse);
    const auto broken = temp_file("qfc_broken.json", "{ not json");
    EXPECT_EQ(run_cli({"run", broken.string()}).code, cli::kExitParse);
    const auto no_cost = temp_file("qfc_no_cost.json", R"({"task": "solve-rn", "model": ")" +
                                                           scenario("two_state_model.json") + R"("})");
    EXPECT_EQ(run_cli({"run", no_cost.string()}).code, cli::kExitParse);
}

TEST(Cli, InvariantViolationsExitThree) {
    EXPECT_EQ(run_cli({"solve-rs", "--alpha", "1.5"}).code, cli::kExitInvariant);
    EXPECT_EQ(run_cli({"solve-rn", "--p", "-1"}).code, cli::kExitInvariant);
    const auto leaky = temp_file("qfc_leaky_model.json", R"({
        "dimension": 2, "controls": ["0"], "outcomes": ["a", "b"],
        "kraus_families": [[ [[0.9, 0], [0, 0.9]] ]],
        "projectors": [ [[1, 0], [0, 0]], [[0, 0], [0, 1]] ],
        "kernel": [[1, 0], [0, 1]]})");
    const auto r = run_cli({"solve-rn", "--model", leaky.string(), "--cost", scenario("two_state_cost.json")});
    EXPECT_EQ(r.code, cli::kExitInvariant) << r.err;
    EXPECT_NE(r.err.find("error:"), std::string::npos);
}

TEST(Cli, ToleranceProfileFromEnvironment) {
    ::setenv(cli::kToleranceEnv, "bogus", 1);
    EXPECT_EQ(run_cli({"solve-rn"}).code, cli::kExitParse);
    ::setenv(cli::kToleranceEnv, "strict", 1);
    EXPECT_EQ(run_cli({"solve-rn"}).code, 0);
    ::unsetenv(cli::kToleranceEnv);
    tolerances() = tolerance_profile("default");
}
