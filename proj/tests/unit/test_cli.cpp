#include <gtest/gtest.h>

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "bbo/error.hpp"
#include "bbo/landscapes.hpp"
#include "bbo/metaheuristics.hpp"
#include "commands.hpp"
#include "config.hpp"
#include "evaluator_bridge.hpp"
#include "output.hpp"

using namespace bbo;
using namespace bbo::cli;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::string kCli = BBO_CLI_PATH;
const std::string kData = BBO_TEST_DATA_DIR;

/// Fresh scratch directory per test.
class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        dir_ = fs::temp_directory_path() / ("bbo_cli_" + std::string(info->name()) + "_" + std::to_string(::getpid()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    fs::path path(const std::string& name) const { return dir_ / name; }

    /// Runs the CLI with stdout and stderr captured; returns its exit status.
    int run(const std::string& args) {
        const std::string cmd = kCli + " " + args + " > " + path("stdout.txt").string() + " 2>&1";
        const int status = std::system(cmd.c_str());
        return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    }

    std::string output() const { return slurp(path("stdout.txt")); }

    static std::string slurp(const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        std::stringstream s;
        s << in.rdbuf();
        return s.str();
    }

    static json read_json(const fs::path& p) { return json::parse(slurp(p)); }

    fs::path dir_;
};

template <class F>
ErrorCode code_of(F&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no bbo::Error thrown";
    return ErrorCode::InternalConsistency;
}

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);) {
        out.push_back(line);
    }
    return out;
}

std::string py(const std::string& script) { return "python3 " + kData + "/" + script; }

} // namespace

// ---------------------------------------------------------------------------
// Configuration round trips

TEST(Config, DefaultsRoundTrip) {
    EXPECT_EQ(nflt_config_from_json(to_json(NfltConfig{})), NfltConfig{});
    EXPECT_EQ(optimize_config_from_json(to_json(OptimizeConfig{})), OptimizeConfig{});
    EXPECT_EQ(bench_config_from_json(to_json(BenchConfig{})), BenchConfig{});
    EXPECT_EQ(gp_plot_config_from_json(to_json(GpPlotConfig{})), GpPlotConfig{});
}

TEST(Config, CustomValuesRoundTrip) {
    NfltConfig n;
    n.common = {UINT64_C(18446744073709551615), "somewhere/else", 3};
    n.m = 6;
    n.r = 4;
    n.k = 2;
    n.function_class = "monotone";
    n.policies = {"reverse", "hill-climb"};
    n.cap = 1234;
    EXPECT_EQ(nflt_config_from_json(to_json(n)), n);

    OptimizeConfig o;
    o.algorithm = "es";
    o.budget = 77;
    o.landscape.reset();
    o.evaluator = EvaluatorSpec{{"python3", "x.py"}, {-1.0, 0.5}, {1.0, 2.25}, 0.75};
    o.settings.es_lambda = 8;
    o.settings.es_mu = 3;
    o.settings.es_initial_sigma = 0.1;
    o.settings.sa.cooling_rate = 0.95;
    o.settings.ga.population = 30;
    o.settings.bo.xi = 0.01;
    o.settings.bo.acquisition = bayesopt::Acquisition::UpperConfidenceBound;
    o.settings.bo_init_design_size = 7;
    EXPECT_EQ(optimize_config_from_json(to_json(o)), o);

    BenchConfig b;
    b.algorithms = {"ga", "sa", "random"};
    b.landscapes = {LandscapeSpec{"needle", 3, 0.25}, LandscapeSpec{"step", 1, std::nullopt}};
    b.runs = 3;
    b.budget = 999;
    b.stop_at_known_best = false;
    b.comparisons = {{"ga", "random"}, {"sa", "ga"}};
    EXPECT_EQ(bench_config_from_json(to_json(b)), b);

    GpPlotConfig g;
    g.x = {0.0, 0.1, 0.3};
    g.y = {1.0, -2.0, 0.1 + 0.2};
    g.lower = -1.0;
    g.upper = 2.0;
    g.grid = 11;
    g.xi = 0.05;
    g.noise_variance.reset();
    EXPECT_EQ(gp_plot_config_from_json(to_json(g)), g);
    GpPlotConfig file;
    file.data_file = "points.txt";
    EXPECT_EQ(gp_plot_config_from_json(to_json(file)), file);
}

TEST(Properties, OptimizeConfigRoundTripOnRandomValues) {
    RngStream rng(1);
    const char* algos[] = {"random", "sa", "ga", "es", "bo"};
    const char* lands[] = {"sphere", "rastrigin", "needle", "step"};
    for (int rep = 0; rep < 200; ++rep) {
        OptimizeConfig c;
        c.common.seed = rng.next_u64();
        c.common.jobs = 1 + rng.uniform_index(8);
        c.algorithm = algos[rng.uniform_index(5)];
        c.budget = 1 + rng.uniform_index(10000);
        c.landscape = LandscapeSpec{lands[rng.uniform_index(4)], 1 + rng.uniform_index(16), std::nullopt};
        if (c.landscape->name == "needle" && rng.uniform() < 0.5) {
            c.landscape->width = rng.uniform(0.01, 1.9);
        }
        c.settings.sa.initial_temp = rng.uniform(0.01, 100.0);
        c.settings.ga.mutation_sigma = rng.uniform(1e-6, 1.0);
        c.settings.es_learning_rate = rng.uniform(0.01, 1.0);
        c.settings.bo.ucb_beta = rng.uniform(0.1, 10.0);
        ASSERT_EQ(optimize_config_from_json(to_json(c)), c);
        ASSERT_EQ(optimize_config_from_json(json::parse(to_json(c).dump())), c);
    }
}

TEST(Config, RejectsUnknownKeysAndWrongTypes) {
    json j = to_json(BenchConfig{});
    j["bugdet"] = 10;
    EXPECT_THROW(bench_config_from_json(j), ConfigError);

    j = to_json(BenchConfig{});
    j["budget"] = "sixty";
    EXPECT_THROW(bench_config_from_json(j), ConfigError);

    j = to_json(NfltConfig{});
    j["m"] = -3;
    EXPECT_THROW(nflt_config_from_json(j), ConfigError);

    j = to_json(OptimizeConfig{});
    j["settings"]["sa"]["temperature"] = 1.0;
    EXPECT_THROW(optimize_config_from_json(j), ConfigError);

    EXPECT_THROW(optimize_config_from_json(json::array()), ConfigError);
}

TEST(Config, GpNeedsOneDimensionalInputs) {
    json j = to_json(GpPlotConfig{});
    j["x"] = json::array({json::array({0.0, 1.0}), json::array({1.0, 2.0})});
    j["y"] = json::array({0.0, 1.0});
    try {
        gp_plot_config_from_json(j);
        FAIL() << "accepted 2-D inputs";
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("1-D"), std::string::npos);
    }
    j["x"] = json::array({json::array({0.0}), json::array({1.0})});
    EXPECT_EQ(gp_plot_config_from_json(j).x, (std::vector<double>{0.0, 1.0}));
}

TEST(Config, FactoriesRejectUnknownNames) {
    EXPECT_THROW(make_algorithm("pso", AlgorithmSettings{}), ConfigError);
    EXPECT_THROW(make_landscape(LandscapeSpec{"ackley", 2, std::nullopt}), ConfigError);
    EXPECT_EQ(make_algorithm("es", AlgorithmSettings{}).name, "es");
}

TEST(Output, RealsRoundTrip) {
    for (double v : {0.1, -1.0 / 3.0, 1e-300, 6.02214076e23, 0.0}) {
        EXPECT_EQ(std::stod(format_real(v)), v);
    }
}

// ---------------------------------------------------------------------------
// nflt-verify

TEST_F(CliTest, NfltDefaultIsEqual) {
    ASSERT_EQ(run("nflt-verify --out " + dir_.string()), 0) << output();
    const json report = read_json(path("nflt_report.json"));
    EXPECT_EQ(report["verdict"], "EQUAL");
    EXPECT_EQ(report["class_size"], 243);
    EXPECT_EQ(report["steps"].size(), 5u);
    EXPECT_TRUE(fs::exists(path("nflt_success.csv")));
    NfltConfig expected;
    expected.common.out = dir_.string();
    EXPECT_EQ(nflt_config_from_json(read_json(path("config.json"))), expected);
}

TEST_F(CliTest, NfltMonotoneClassIsNotEqual) {
    ASSERT_EQ(run("nflt-verify --class monotone --m 6 --r 4 --k 3 --policy reverse --policy lexicographic --out " +
                  dir_.string()),
              1)
        << output();
    const json report = read_json(path("nflt_report.json"));
    EXPECT_EQ(report["verdict"], "NOT_EQUAL");
    EXPECT_EQ(report["class_size"], 84);
    ASSERT_TRUE(report["counterexample"].is_object());
    EXPECT_EQ(report["success"][0]["successes"][0], 84);
    EXPECT_EQ(report["success"][1]["successes"][0], 4);
    EXPECT_DOUBLE_EQ(report["success"][1]["fractions"][0].get<double>(), 4.0 / 84.0);
}

TEST_F(CliTest, NfltClassTooLargeIsConfigError) {
    EXPECT_EQ(run("nflt-verify --m 30 --r 3 --k 2 --out " + dir_.string()), 2);
    EXPECT_NE(output().find("ClassTooLarge"), std::string::npos) << output();
}

// ---------------------------------------------------------------------------
// optimize

TEST_F(CliTest, OptimizeWritesFilesAndReruns) {
    const std::string args = "optimize --algorithm bo --landscape sphere --dimension 2 --budget 40 --seed 5 --out ";
    ASSERT_EQ(run(args + path("a").string()), 0) << output();
    ASSERT_EQ(run(args + path("b").string()), 0) << output();
    const std::string trace = slurp(path("a/trace.csv"));
    EXPECT_EQ(trace, slurp(path("b/trace.csv")));
    const auto rows = lines_of(trace);
    ASSERT_EQ(rows.size(), 41u);
    EXPECT_EQ(rows[0], "iteration,x0,x1,y,best_so_far");

    const json summary = read_json(path("a/summary.json"));
    EXPECT_EQ(summary["evaluations"], 40);
    EXPECT_EQ(summary["seed"], 5);
    EXPECT_EQ(summary["algorithm"], "bo");
    EXPECT_LE(summary["best"].get<double>(), 0.0);

    // The echoed config reproduces the run.
    const json echoed = read_json(path("a/config.json"));
    json again = echoed;
    again["common"]["out"] = path("c").string();
    {
        std::ofstream(path("c.json")) << again.dump(2);
    }
    ASSERT_EQ(run("optimize --config " + path("c.json").string()), 0) << output();
    EXPECT_EQ(slurp(path("c/trace.csv")), trace);
    EXPECT_EQ(fs::exists(path("a/trace.csv.tmp")), false);
}

TEST_F(CliTest, OptimizeErrorsAreConfigErrors) {
    EXPECT_EQ(run("optimize --algorithm pso --out " + dir_.string()), 2);
    EXPECT_EQ(run("optimize --landscape ackley --out " + dir_.string()), 2);
    EXPECT_EQ(run("optimize --bogus-flag --out " + dir_.string()), 2);
    EXPECT_EQ(run("optimize --config " + path("missing.json").string()), 2);
    {
        std::ofstream(path("bad.json")) << "{\"command\": \"optimize\", \"budget\": \"many\"}";
    }
    EXPECT_EQ(run("optimize --config " + path("bad.json").string()), 2);
    EXPECT_EQ(run("--help"), 0);
}

TEST_F(CliTest, OptimizeWithExternalSphereMatchesBuiltIn) {
    const std::string common = "optimize --algorithm sa --budget 60 --seed 9 ";
    ASSERT_EQ(run(common + "--landscape sphere --dimension 2 --out " + path("builtin").string()), 0) << output();
    ASSERT_EQ(run(common + "--evaluator '" + py("sphere_eval.py") +
                  "' --lower -5 --lower -5 --upper 5 --upper 5 --out " + path("external").string()),
              0)
        << output();
    EXPECT_EQ(slurp(path("builtin/trace.csv")), slurp(path("external/trace.csv")));
}

TEST_F(CliTest, OptimizeEvaluatorFailuresExitThree) {
    EXPECT_EQ(run("optimize --algorithm random --budget 5 --evaluator '" + py("nan_eval.py") +
                  "' --lower 0 --upper 1 --out " + dir_.string()),
              3);
    EXPECT_NE(output().find("EvaluatorProtocol"), std::string::npos) << output();
    const auto start = std::chrono::steady_clock::now();
    EXPECT_EQ(run("optimize --algorithm random --budget 5 --evaluator '" + py("slow_eval.py") +
                  "' --lower 0 --upper 1 --timeout 0.5 --out " + dir_.string()),
              3);
    EXPECT_NE(output().find("EvaluatorTimeout"), std::string::npos) << output();
    EXPECT_LT(std::chrono::steady_clock::now() - start, std::chrono::seconds(10));
    EXPECT_EQ(run("optimize --algorithm random --budget 5 --evaluator /nonexistent/evaluator --lower 0 --upper 1 --out " +
                  dir_.string()),
              3);
}

// ---------------------------------------------------------------------------
// bench

TEST_F(CliTest, BenchGridAndSummary) {
    const std::string args =
        "bench --algorithm random --algorithm sa --landscape sphere:2 --landscape needle:1 --runs 5 --budget 50 --out ";
    ASSERT_EQ(run(args + path("a").string()), 0) << output();
    const auto rows = lines_of(slurp(path("a/results.csv")));
    ASSERT_EQ(rows.size(), 21u);
    EXPECT_EQ(rows[0], "algorithm,landscape,dimension,seed,evals_to_threshold,final_best");
    const json summary = read_json(path("a/summary.json"));
    ASSERT_EQ(summary["cells"].size(), 4u);
    for (const auto& cell : summary["cells"]) {
        EXPECT_TRUE(cell.contains("median_evals_to_threshold"));
        EXPECT_EQ(cell["runs"], 5);
        EXPECT_TRUE(cell["status"] == "ok" || cell["status"] == "DNF-majority");
    }
    EXPECT_FALSE(summary["comparisons"].empty());

    ASSERT_EQ(run(args + path("b").string() + " --jobs 3"), 0) << output();
    EXPECT_EQ(slurp(path("a/results.csv")), slurp(path("b/results.csv")));
}

TEST_F(CliTest, BenchRejectsDuplicateCells) {
    EXPECT_EQ(run("bench --algorithm random --landscape sphere:2 --landscape sphere:2 --runs 2 --out " + dir_.string()), 2);
    EXPECT_EQ(run("bench --algorithm random --landscape sphere:x --runs 2 --out " + dir_.string()), 2);
}

TEST_F(CliTest, InterruptedBenchLeavesNoPartialFiles) {
    const std::string cmd = "timeout -s KILL 2 " + kCli +
                            " bench --algorithm bo --landscape sphere:4 --runs 50 --budget 200 --out " +
                            dir_.string() + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    ASSERT_TRUE(WIFEXITED(status));
    ASSERT_EQ(WEXITSTATUS(status), 128 + 9) << "run finished before the kill";
    EXPECT_FALSE(fs::exists(path("results.csv")));
    EXPECT_FALSE(fs::exists(path("summary.json")));
    for (const auto& entry : fs::directory_iterator(dir_)) {
        EXPECT_EQ(entry.path().filename().string().find(".tmp"), std::string::npos) << entry.path();
    }
}

TEST_F(CliTest, AtomicWriteReplacesWholeFile) {
    write_file_atomic(path("nested/dir/file.txt"), "first version, rather long\n");
    write_file_atomic(path("nested/dir/file.txt"), "second\n");
    EXPECT_EQ(slurp(path("nested/dir/file.txt")), "second\n");
    std::size_t entries = 0;
    for ([[maybe_unused]] const auto& e : fs::directory_iterator(path("nested/dir"))) {
        ++entries;
    }
    EXPECT_EQ(entries, 1u);
}

// ---------------------------------------------------------------------------
// gp-plotdata

TEST_F(CliTest, GpPlotDataFormat) {
    {
        std::ofstream data(path("points.txt"));
        data << "# x y\n";
        for (double x : {0.0, 0.25, 0.5, 0.75, 1.0}) {
            data << x << ' ' << std::sin(6.0 * x) << '\n';
        }
    }
    ASSERT_EQ(run("gp-plotdata --data " + path("points.txt").string() + " --grid 201 --out " + dir_.string()), 0)
        << output();
    const auto lines = lines_of(slurp(path("gp_plot.dat")));
    std::vector<std::vector<double>> rows;
    bool marked = false;
    for (const auto& line : lines) {
        if (line.rfind("# x_star ", 0) == 0) {
            marked = true;
            continue;
        }
        if (line.empty() || line[0] == '#') {
            continue;
        }
        std::istringstream in(line);
        std::vector<double> row;
        for (double v; in >> v;) {
            row.push_back(v);
        }
        ASSERT_EQ(row.size(), 5u) << line;
        rows.push_back(row);
    }
    EXPECT_TRUE(marked);
    ASSERT_EQ(rows.size(), 201u);
    const std::vector<double> data_x{0.0, 0.25, 0.5, 0.75, 1.0};
    for (const auto& row : rows) {
        EXPECT_GE(row[4], 0.0);
        EXPECT_LE(row[2], row[1]);
        EXPECT_GE(row[3], row[1]);
        for (double x : data_x) {
            if (std::abs(row[0] - x) < 1e-12) {
                EXPECT_LT(row[3] - row[2], 1e-3) << "x " << x;
            }
        }
    }
    EXPECT_TRUE(fs::exists(path("gp_model.json")));
    EXPECT_EQ(read_json(path("gp_model.json"))["hyperparameters"]["noise_variance"], 0.0);

    // Letting the fit choose the noise still gives a usable file.
    ASSERT_EQ(run("gp-plotdata --fit-noise --data " + path("points.txt").string() + " --out " + path("fitted").string()), 0)
        << output();
    EXPECT_TRUE(read_json(path("fitted/config.json"))["noise_variance"].is_null());
    EXPECT_EQ(run("gp-plotdata --noise -1 --data " + path("points.txt").string() + " --out " + path("neg").string()), 2);
}

TEST_F(CliTest, GpPlotDataRejectsMultiDimensionalInput) {
    {
        std::ofstream data(path("points.txt"));
        data << "0 0 1\n1 1 2\n2 0 0\n";
    }
    EXPECT_EQ(run("gp-plotdata --data " + path("points.txt").string() + " --out " + dir_.string()), 2);
    EXPECT_NE(output().find("1-D"), std::string::npos) << output();
    {
        std::ofstream cfg(path("cfg.json"));
        cfg << R"({"command": "gp-plotdata", "x": [[0, 1], [1, 0]], "y": [0, 1]})";
    }
    EXPECT_EQ(run("gp-plotdata --config " + path("cfg.json").string() + " --out " + dir_.string()), 2);
}

// ---------------------------------------------------------------------------
// Evaluator bridge through the API

TEST(Bridge, SphereScriptMatchesBuiltInTrace) {
    const bench::Landscape s = bench::sphere(2);
    EvaluatorSpec spec{{"python3", kData + "/sphere_eval.py"}, {-5.0, -5.0}, {5.0, 5.0}, 10.0};
    FitnessFunction external = make_external_fitness(spec);
    FitnessFunction builtin = s.fitness();
    RngStream a(3);
    RngStream b(3);
    const RunTrace te = meta::random_search(external, s.domain, 25, a);
    const RunTrace tb = meta::random_search(builtin, s.domain, 25, b);
    EXPECT_EQ(te, tb);
    EXPECT_EQ(external.call_count(), 25u);
}

TEST(Bridge, NanReplyIsProtocolError) {
    EvaluatorProcess p({"python3", kData + "/nan_eval.py"}, std::chrono::milliseconds(5000));
    const double x[] = {0.5};
    EXPECT_EQ(code_of([&] { p.evaluate(x); }), ErrorCode::EvaluatorProtocol);
}

TEST(Bridge, SlowReplyIsTimeout) {
    EvaluatorProcess p({"python3", kData + "/slow_eval.py"}, std::chrono::milliseconds(300));
    const double x[] = {0.5};
    const auto start = std::chrono::steady_clock::now();
    EXPECT_EQ(code_of([&] { p.evaluate(x); }), ErrorCode::EvaluatorTimeout);
    EXPECT_LT(std::chrono::steady_clock::now() - start, std::chrono::seconds(5));
}

TEST(Bridge, ExitedChildIsProtocolError) {
    EvaluatorProcess p({"true"}, std::chrono::milliseconds(2000));
    const double x[] = {0.5};
    EXPECT_EQ(code_of([&] {
                  for (int i = 0; i < 3; ++i) {
                      p.evaluate(x);
                  }
              }),
              ErrorCode::EvaluatorProtocol);
}

TEST(Bridge, GuardMapsExitCodes) {
    std::ostringstream err;
    EXPECT_EQ(run_guarded([] { return 0; }, err), 0);
    EXPECT_EQ(run_guarded([]() -> int { throw ConfigError("bad"); }, err), 2);
    EXPECT_EQ(run_guarded([]() -> int { fail(ErrorCode::EvaluatorTimeout, "slow"); }, err), 3);
    EXPECT_EQ(run_guarded([]() -> int { fail(ErrorCode::EvaluatorProtocol, "junk"); }, err), 3);
    EXPECT_EQ(run_guarded([]() -> int { fail(ErrorCode::ClassTooLarge, "big"); }, err), 2);
    EXPECT_EQ(run_guarded([]() -> int { fail(ErrorCode::InternalConsistency, "oops"); }, err), 4);
    EXPECT_NE(err.str().find("error: "), std::string::npos);
}
