#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "bbo/bayesopt.hpp"
#include "bbo/experiment.hpp"
#include "bbo/landscapes.hpp"
#include "bbo/metaheuristics.hpp"

namespace bbo::cli {

/// Invalid or inconsistent configuration (exit code 2).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Settings shared by every command.
struct CommonSettings {
    std::uint64_t seed = 1;
    std::string out = "bbo_out";
    std::size_t jobs = 1;

    friend bool operator==(const CommonSettings&, const CommonSettings&) = default;
};

/// Per-algorithm knobs. Unset fields are derived from the problem dimension.
struct AlgorithmSettings {
    /// Initial design size for bo; unset means 2d + 1 (at most budget - 1).
    std::optional<std::size_t> bo_init_design_size;
    /// iterations is ignored: bo spends whatever budget the design leaves.
    bayesopt::BoConfig bo;
    meta::SaConfig sa;
    meta::GaConfig ga;
    /// lambda and mu; unset means EsConfig::defaults_for(d).
    std::optional<std::size_t> es_lambda;
    std::optional<std::size_t> es_mu;
    double es_initial_sigma = 0.3;
    double es_learning_rate = 0.2;

    friend bool operator==(const AlgorithmSettings&, const AlgorithmSettings&) = default;
};

/// Builds an algorithm recipe: random, sa, ga, es or bo. Throws ConfigError.
bench::AlgorithmSpec make_algorithm(const std::string& name, const AlgorithmSettings& settings);

struct LandscapeSpec {
    std::string name = "sphere";
    std::size_t dimension = 2;
    /// Needle half-width; unset means 0.05 of the side.
    std::optional<double> width;

    friend bool operator==(const LandscapeSpec&, const LandscapeSpec&) = default;
};

/// Throws ConfigError.
bench::Landscape make_landscape(const LandscapeSpec& spec);

/// An external program that reads one point per line and answers one number.
struct EvaluatorSpec {
    std::vector<std::string> command;
    std::vector<double> lower;
    std::vector<double> upper;
    double timeout_seconds = 10.0;

    friend bool operator==(const EvaluatorSpec&, const EvaluatorSpec&) = default;
};

struct NfltConfig {
    CommonSettings common;
    std::size_t m = 5;
    std::size_t r = 3;
    std::size_t k = 5;
    /// "full" or "monotone".
    std::string function_class = "full";
    std::vector<std::string> policies{"lexicographic", "reverse", "shuffle"};
    std::uint64_t cap = 10'000'000;

    friend bool operator==(const NfltConfig&, const NfltConfig&) = default;
};

struct OptimizeConfig {
    CommonSettings common;
    std::string algorithm = "bo";
    std::size_t budget = 40;
    /// Exactly one of landscape and evaluator is set.
    std::optional<LandscapeSpec> landscape = LandscapeSpec{};
    std::optional<EvaluatorSpec> evaluator;
    AlgorithmSettings settings;

    friend bool operator==(const OptimizeConfig&, const OptimizeConfig&) = default;
};

struct BenchConfig {
    CommonSettings common;
    std::vector<std::string> algorithms{"bo", "random"};
    std::vector<LandscapeSpec> landscapes{LandscapeSpec{"sphere", 2, std::nullopt},
                                          LandscapeSpec{"needle", 2, std::nullopt}};
    /// Number of seeds; run i uses derive_seed(seed, i).
    std::size_t runs = 20;
    std::size_t budget = 60;
    bool stop_at_known_best = true;
    /// Pairs for sign tests; empty means every algorithm against random (or all
    /// pairs when random is absent).
    std::vector<std::pair<std::string, std::string>> comparisons;
    AlgorithmSettings settings;

    friend bool operator==(const BenchConfig&, const BenchConfig&) = default;
};

struct GpPlotConfig {
    CommonSettings common;
    std::vector<double> x;
    std::vector<double> y;
    /// Whitespace-separated "x y" rows; '#' starts a comment. Replaces x and y.
    std::optional<std::string> data_file;
    /// Plot range; unset means the data range.
    std::optional<double> lower;
    std::optional<double> upper;
    std::size_t grid = 201;
    std::optional<double> xi;
    /// Noise variance held fixed during the fit; null in JSON means fit it too.
    std::optional<double> noise_variance = 0.0;
    std::size_t fit_multistarts = 8;
    std::size_t fit_max_iterations = 40;

    friend bool operator==(const GpPlotConfig&, const GpPlotConfig&) = default;
};

nlohmann::json to_json(const NfltConfig& c);
nlohmann::json to_json(const OptimizeConfig& c);
nlohmann::json to_json(const BenchConfig& c);
nlohmann::json to_json(const GpPlotConfig& c);

/// Strict parsers: unknown keys and wrong types raise ConfigError. Missing keys
/// keep their defaults.
NfltConfig nflt_config_from_json(const nlohmann::json& j);
OptimizeConfig optimize_config_from_json(const nlohmann::json& j);
BenchConfig bench_config_from_json(const nlohmann::json& j);
GpPlotConfig gp_plot_config_from_json(const nlohmann::json& j);

/// Reads a JSON file; ConfigError on I/O or syntax errors.
nlohmann::json load_json_file(const std::string& path);

} // namespace bbo::cli
