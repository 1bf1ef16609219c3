#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bbo/landscapes.hpp"
#include "bbo/sampler.hpp"

namespace bbo::bench {

/// A named recipe building a fresh sampler for a (landscape, budget) pair.
struct AlgorithmSpec {
    std::string name;
    std::function<std::unique_ptr<Sampler>(const Landscape&, std::size_t budget)> make;
};

/// Built-ins with default settings: random, sa, ga, es, bo. The bo recipe uses
/// an initial design of 2d + 1 points (at most budget - 1) and spends the rest
/// of the budget on infills.
AlgorithmSpec algorithm_by_name(std::string_view name);

struct ExperimentOptions {
    std::size_t budget = 100;
    /// Worker threads; results do not depend on it.
    std::size_t jobs = 1;
    /// End a run once the landscape's known optimum is reached. This cannot
    /// change evaluations-to-threshold or the final best.
    bool stop_at_known_best = true;
};

struct RunResult {
    std::string algorithm;
    std::string landscape;
    std::size_t dimension = 0;
    std::uint64_t seed = 0;
    /// nullopt means did-not-finish within the budget.
    std::optional<std::size_t> evals_to_threshold;
    double final_best = 0.0;
    std::size_t evaluations = 0;
    std::size_t clamped = 0;

    friend bool operator==(const RunResult&, const RunResult&) = default;
};

/// One run with RngStream(seed).
RunResult run_single(const AlgorithmSpec& algorithm, const Landscape& landscape,
                     std::uint64_t seed, const ExperimentOptions& options);

/// Full cross product, sorted by (algorithm, landscape, dimension, seed).
std::vector<RunResult> run_experiment(std::span<const AlgorithmSpec> algorithms,
                                      std::span<const Landscape> landscapes,
                                      std::span<const std::uint64_t> seeds,
                                      const ExperimentOptions& options);

/// evals_to_threshold with DNF mapped to budget + 1.
double evals_or_penalty(const RunResult& r, std::size_t budget);

struct MedianSummary {
    double median = 0.0;
    std::size_t runs = 0;
    std::size_t successes = 0;
    /// True unless more than half of the runs reached the threshold.
    bool dnf_majority = false;
};

/// Median over runs with DNF counted as budget + 1.
MedianSummary median_evaluations(std::span<const RunResult> runs, std::size_t budget);

struct CellSummary {
    std::string algorithm;
    std::string landscape;
    std::size_t dimension = 0;
    MedianSummary evals;
    double median_final_best = 0.0;
};

/// One cell per (algorithm, landscape, dimension), in result order.
std::vector<CellSummary> summarize(std::span<const RunResult> results, std::size_t budget);

/// Exact two-sided sign test on paired costs (lower is better); ties dropped.
struct SignTest {
    std::size_t a_better = 0;
    std::size_t b_better = 0;
    std::size_t ties = 0;
    double p_value = 1.0;
};

SignTest sign_test(std::span<const double> a, std::span<const double> b);

/// True when `a` beats `b` significantly: p <= alpha and a wins more pairs.
bool significantly_better(const SignTest& t, double alpha = 0.05);

struct SweepRow {
    std::size_t dimension = 0;
    MedianSummary evals;
};

/// Median evaluations-to-threshold per dimension (DNF counted at budget + 1
/// and flagged through dnf_majority).
std::vector<SweepRow> dimensionality_sweep(const AlgorithmSpec& algorithm,
                                           const std::function<Landscape(std::size_t)>& family,
                                           std::span<const std::size_t> dims,
                                           std::span<const std::uint64_t> seeds,
                                           const ExperimentOptions& options);

/// Median of Geometric(p) on {1, 2, ...}: the smallest n with 1 - (1 - p)^n >= 1/2.
double geometric_median(double p);

} // namespace bbo::bench
