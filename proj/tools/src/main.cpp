#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "commands.hpp"
#include "config.hpp"

using namespace bbo::cli;

namespace {

struct CommonFlags {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<std::size_t> jobs;

    void add(CLI::App* app) {
        app->add_option("--config", config, "JSON config file");
        app->add_option("--seed", seed, "Master seed");
        app->add_option("--out", out, "Output directory");
        app->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);
    }

    void apply(CommonSettings& c) const {
        if (seed) {
            c.seed = *seed;
        }
        if (out) {
            c.out = *out;
        }
        if (jobs) {
            c.jobs = *jobs;
        }
    }
};

/// Starts from the file (or defaults), applies flag overrides, then re-parses
/// the result so overrides go through the same validation as files.
template <class Config, class Parse, class Override>
Config effective(const CommonFlags& flags, Parse parse, Override override_fields) {
    Config c = flags.config.empty() ? parse(to_json(Config{})) : parse(load_json_file(flags.config));
    flags.apply(c.common);
    override_fields(c);
    return parse(to_json(c));
}

std::vector<std::string> split_words(const std::string& s) {
    std::istringstream in(s);
    std::vector<std::string> words;
    for (std::string w; in >> w;) {
        words.push_back(w);
    }
    return words;
}

/// "name" or "name:dimension".
LandscapeSpec parse_landscape_flag(const std::string& s, std::size_t default_dimension) {
    LandscapeSpec l;
    const auto colon = s.find(':');
    l.name = s.substr(0, colon);
    l.dimension = default_dimension;
    if (colon != std::string::npos) {
        try {
            l.dimension = std::stoul(s.substr(colon + 1));
        } catch (const std::exception&) {
            throw ConfigError("bad landscape '" + s + "' (expected name:dimension)");
        }
    }
    return l;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Black-box optimization toolkit"};
    app.require_subcommand(1);

    // nflt-verify
    CommonFlags nflt_flags;
    std::optional<std::size_t> nflt_m, nflt_r, nflt_k;
    std::optional<std::string> nflt_class;
    std::vector<std::string> nflt_policies;
    std::optional<std::uint64_t> nflt_cap;
    CLI::App* nflt = app.add_subcommand("nflt-verify", "Exhaustive No-Free-Lunch check on a finite class");
    nflt_flags.add(nflt);
    nflt->add_option("--m", nflt_m, "Size of the search space");
    nflt->add_option("--r", nflt_r, "Number of fitness values");
    nflt->add_option("--k", nflt_k, "Steps per trace");
    nflt->add_option("--class", nflt_class, "full or monotone");
    nflt->add_option("--policy", nflt_policies, "Policy name (repeatable)");
    nflt->add_option("--cap", nflt_cap, "Largest class to enumerate");

    // optimize
    CommonFlags opt_flags;
    std::optional<std::string> opt_algorithm, opt_landscape, opt_evaluator;
    std::optional<std::size_t> opt_budget, opt_dimension;
    std::optional<double> opt_width, opt_timeout;
    std::vector<double> opt_lower, opt_upper;
    CLI::App* optimize = app.add_subcommand("optimize", "Run one algorithm on one problem");
    opt_flags.add(optimize);
    optimize->add_option("--algorithm", opt_algorithm, "random, sa, ga, es or bo");
    optimize->add_option("--budget", opt_budget, "Fitness evaluations");
    optimize->add_option("--landscape", opt_landscape, "sphere, rastrigin, needle or step");
    optimize->add_option("--dimension", opt_dimension, "Landscape dimension");
    optimize->add_option("--width", opt_width, "Needle half-width");
    optimize->add_option("--evaluator", opt_evaluator, "External evaluator command line");
    optimize->add_option("--lower", opt_lower, "Evaluator box lower bounds");
    optimize->add_option("--upper", opt_upper, "Evaluator box upper bounds");
    optimize->add_option("--timeout", opt_timeout, "Evaluator timeout in seconds");

    // bench
    CommonFlags bench_flags;
    std::vector<std::string> bench_algorithms, bench_landscapes;
    std::optional<std::size_t> bench_runs, bench_budget;
    bool bench_no_early_stop = false;
    CLI::App* bench = app.add_subcommand("bench", "Algorithms x landscapes x seeds experiment");
    bench_flags.add(bench);
    bench->add_option("--algorithm", bench_algorithms, "Algorithm (repeatable)");
    bench->add_option("--landscape", bench_landscapes, "name[:dimension] (repeatable)");
    bench->add_option("--runs", bench_runs, "Seeds per cell");
    bench->add_option("--budget", bench_budget, "Evaluations per run");
    bench->add_flag("--no-early-stop", bench_no_early_stop, "Always spend the full budget");

    // gp-plotdata
    CommonFlags gp_flags;
    std::optional<std::string> gp_data;
    std::optional<std::size_t> gp_grid;
    std::optional<double> gp_lower, gp_upper, gp_xi, gp_noise;
    bool gp_fit_noise = false;
    CLI::App* gpplot = app.add_subcommand("gp-plotdata", "GP posterior bands and EI on a 1-D grid");
    gp_flags.add(gpplot);
    gpplot->add_option("--data", gp_data, "Rows of 'x y'");
    gpplot->add_option("--grid", gp_grid, "Grid points");
    gpplot->add_option("--lower", gp_lower, "Plot range start");
    gpplot->add_option("--upper", gp_upper, "Plot range end");
    gpplot->add_option("--xi", gp_xi, "EI offset");
    gpplot->add_option("--noise", gp_noise, "Fixed noise variance (default 0)");
    gpplot->add_flag("--fit-noise", gp_fit_noise, "Fit the noise variance as well")->excludes("--noise");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    return run_guarded(
        [&]() -> int {
            if (*nflt) {
                const auto c = effective<NfltConfig>(nflt_flags, nflt_config_from_json, [&](NfltConfig& c) {
                    if (nflt_m) c.m = *nflt_m;
                    if (nflt_r) c.r = *nflt_r;
                    if (nflt_k) c.k = *nflt_k;
                    if (nflt_class) c.function_class = *nflt_class;
                    if (!nflt_policies.empty()) c.policies = nflt_policies;
                    if (nflt_cap) c.cap = *nflt_cap;
                });
                return cmd_nflt_verify(c, std::cout);
            }
            if (*optimize) {
                const auto c = effective<OptimizeConfig>(opt_flags, optimize_config_from_json, [&](OptimizeConfig& c) {
                    if (opt_algorithm) c.algorithm = *opt_algorithm;
                    if (opt_budget) c.budget = *opt_budget;
                    if (opt_landscape) {
                        c.landscape = LandscapeSpec{*opt_landscape, c.landscape ? c.landscape->dimension : 2, std::nullopt};
                        c.evaluator.reset();
                    }
                    if (opt_evaluator) {
                        c.evaluator = c.evaluator.value_or(EvaluatorSpec{});
                        c.evaluator->command = split_words(*opt_evaluator);
                        c.landscape.reset();
                    }
                    if (c.landscape) {
                        if (opt_dimension) c.landscape->dimension = *opt_dimension;
                        if (opt_width) c.landscape->width = *opt_width;
                    }
                    if (c.evaluator) {
                        if (!opt_lower.empty()) c.evaluator->lower = opt_lower;
                        if (!opt_upper.empty()) c.evaluator->upper = opt_upper;
                        if (opt_timeout) c.evaluator->timeout_seconds = *opt_timeout;
                    }
                });
                return cmd_optimize(c, std::cout);
            }
            if (*bench) {
                const auto c = effective<BenchConfig>(bench_flags, bench_config_from_json, [&](BenchConfig& c) {
                    if (!bench_algorithms.empty()) {
                        c.algorithms = bench_algorithms;
                        c.comparisons.clear();
                    }
                    if (!bench_landscapes.empty()) {
                        c.landscapes.clear();
                        for (const auto& l : bench_landscapes) {
                            c.landscapes.push_back(parse_landscape_flag(l, 2));
                        }
                    }
                    if (bench_runs) c.runs = *bench_runs;
                    if (bench_budget) c.budget = *bench_budget;
                    if (bench_no_early_stop) c.stop_at_known_best = false;
                });
                return cmd_bench(c, std::cout);
            }
            const auto c = effective<GpPlotConfig>(gp_flags, gp_plot_config_from_json, [&](GpPlotConfig& c) {
                if (gp_data) c.data_file = *gp_data;
                if (gp_grid) c.grid = *gp_grid;
                if (gp_lower) c.lower = *gp_lower;
                if (gp_upper) c.upper = *gp_upper;
                if (gp_xi) c.xi = *gp_xi;
                if (gp_noise) c.noise_variance = *gp_noise;
                if (gp_fit_noise) c.noise_variance.reset();
            });
            return cmd_gp_plotdata(c, std::cout);
        },
        std::cerr);
}
