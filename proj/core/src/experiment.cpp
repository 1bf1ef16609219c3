#include "bbo/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <map>
#include <mutex>
#include <thread>
#include <tuple>

#include "bbo/bayesopt.hpp"
#include "bbo/error.hpp"
#include "bbo/metaheuristics.hpp"

namespace bbo::bench {

AlgorithmSpec algorithm_by_name(std::string_view name) {
    if (name == "random") {
        return {"random", [](const Landscape&, std::size_t) {
                    return std::make_unique<meta::RandomSearchSampler>();
                }};
    }
    if (name == "sa") {
        return {"sa", [](const Landscape&, std::size_t) {
                    return std::make_unique<meta::SimulatedAnnealingSampler>(meta::SaConfig{});
                }};
    }
    if (name == "ga") {
        return {"ga", [](const Landscape&, std::size_t) {
                    return std::make_unique<meta::GeneticAlgorithmSampler>(meta::GaConfig{});
                }};
    }
    if (name == "es") {
        return {"es", [](const Landscape& l, std::size_t) {
                    return std::make_unique<meta::EvolutionStrategySampler>(
                        meta::EsConfig::defaults_for(l.dimension));
                }};
    }
    if (name == "bo") {
        return {"bo", [](const Landscape& l, std::size_t budget) {
                    if (budget < 3) {
                        fail(ErrorCode::InvalidArgument, "bo needs a budget of at least 3");
                    }
                    bayesopt::BoConfig c;
                    c.init_design_size = std::min(2 * l.dimension + 1, budget - 1);
                    c.iterations = budget - c.init_design_size;
                    return std::make_unique<bayesopt::BayesOptSampler>(c);
                }};
    }
    fail(ErrorCode::InvalidArgument, "unknown algorithm '" + std::string(name) + "'");
}

RunResult run_single(const AlgorithmSpec& algorithm, const Landscape& landscape,
                     std::uint64_t seed, const ExperimentOptions& options) {
    std::unique_ptr<Sampler> sampler = algorithm.make(landscape, options.budget);
    FitnessFunction f = landscape.fitness(options.budget);
    RngStream rng(seed);
    RunOptions run{options.budget, std::nullopt};
    if (options.stop_at_known_best) {
        run.stop_at = landscape.known_best;
    }
    const RunTrace trace = run_sampler(*sampler, f, rng, run);
    RunResult r;
    r.algorithm = algorithm.name;
    r.landscape = landscape.name;
    r.dimension = landscape.dimension;
    r.seed = seed;
    r.evals_to_threshold = trace.evaluations_to(landscape.threshold);
    r.final_best = trace.best();
    r.evaluations = trace.size();
    r.clamped = trace.clamped_proposals;
    return r;
}

namespace {

/// Runs task(i) for i in [0, count) on `jobs` threads; rethrows the first error.
void parallel_for(std::size_t count, std::size_t jobs, const std::function<void(std::size_t)>& task) {
    jobs = std::max<std::size_t>(1, std::min(jobs, count));
    if (jobs == 1) {
        for (std::size_t i = 0; i < count; ++i) {
            task(i);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> workers;
    for (std::size_t w = 0; w < jobs; ++w) {
        workers.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) {
                try {
                    task(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error) {
                        error = std::current_exception();
                    }
                }
            }
        });
    }
    for (auto& t : workers) {
        t.join();
    }
    if (error) {
        std::rethrow_exception(error);
    }
}

} // namespace

std::vector<RunResult> run_experiment(std::span<const AlgorithmSpec> algorithms,
                                      std::span<const Landscape> landscapes,
                                      std::span<const std::uint64_t> seeds,
                                      const ExperimentOptions& options) {
    if (algorithms.empty() || landscapes.empty() || seeds.empty()) {
        fail(ErrorCode::InvalidArgument, "algorithms, landscapes and seeds must be nonempty");
    }
    const std::size_t per_alg = landscapes.size() * seeds.size();
    std::vector<RunResult> results(algorithms.size() * per_alg);
    parallel_for(results.size(), options.jobs, [&](std::size_t i) {
        const std::size_t a = i / per_alg;
        const std::size_t l = (i % per_alg) / seeds.size();
        const std::size_t s = i % seeds.size();
        results[i] = run_single(algorithms[a], landscapes[l], seeds[s], options);
    });
    std::stable_sort(results.begin(), results.end(), [](const RunResult& x, const RunResult& y) {
        return std::tie(x.algorithm, x.landscape, x.dimension, x.seed) <
               std::tie(y.algorithm, y.landscape, y.dimension, y.seed);
    });
    return results;
}

double evals_or_penalty(const RunResult& r, std::size_t budget) {
    return r.evals_to_threshold ? static_cast<double>(*r.evals_to_threshold)
                                : static_cast<double>(budget + 1);
}

namespace {

double median_of(std::vector<double> v) {
    if (v.empty()) {
        return 0.0;
    }
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

} // namespace

MedianSummary median_evaluations(std::span<const RunResult> runs, std::size_t budget) {
    MedianSummary s;
    std::vector<double> values;
    for (const RunResult& r : runs) {
        values.push_back(evals_or_penalty(r, budget));
        if (r.evals_to_threshold) {
            ++s.successes;
        }
    }
    s.runs = runs.size();
    s.median = median_of(std::move(values));
    s.dnf_majority = !(2 * s.successes > s.runs);
    return s;
}

std::vector<CellSummary> summarize(std::span<const RunResult> results, std::size_t budget) {
    std::vector<CellSummary> cells;
    std::map<std::tuple<std::string, std::string, std::size_t>, std::vector<RunResult>> groups;
    std::vector<std::tuple<std::string, std::string, std::size_t>> order;
    for (const RunResult& r : results) {
        auto key = std::make_tuple(r.algorithm, r.landscape, r.dimension);
        auto [it, inserted] = groups.try_emplace(key);
        if (inserted) {
            order.push_back(key);
        }
        it->second.push_back(r);
    }
    for (const auto& key : order) {
        const auto& runs = groups[key];
        CellSummary c;
        std::tie(c.algorithm, c.landscape, c.dimension) = key;
        c.evals = median_evaluations(runs, budget);
        std::vector<double> finals;
        for (const auto& r : runs) {
            finals.push_back(r.final_best);
        }
        c.median_final_best = median_of(std::move(finals));
        cells.push_back(std::move(c));
    }
    return cells;
}

SignTest sign_test(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) {
        fail(ErrorCode::DimensionMismatch, "sign test needs paired samples");
    }
    SignTest t;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] < b[i]) {
            ++t.a_better;
        } else if (b[i] < a[i]) {
            ++t.b_better;
        } else {
            ++t.ties;
        }
    }
    const std::size_t n = t.a_better + t.b_better;
    if (n == 0) {
        t.p_value = 1.0;
        return t;
    }
    // P(X <= min(wins)) for X ~ Binomial(n, 1/2), summed in log space.
    const std::size_t k = std::min(t.a_better, t.b_better);
    double tail = 0.0;
    for (std::size_t i = 0; i <= k; ++i) {
        const double log_term = std::lgamma(static_cast<double>(n) + 1.0) -
                                std::lgamma(static_cast<double>(i) + 1.0) -
                                std::lgamma(static_cast<double>(n - i) + 1.0) -
                                static_cast<double>(n) * std::log(2.0);
        tail += std::exp(log_term);
    }
    t.p_value = std::min(1.0, 2.0 * tail);
    return t;
}

bool significantly_better(const SignTest& t, double alpha) {
    return t.p_value <= alpha && t.a_better > t.b_better;
}

std::vector<SweepRow> dimensionality_sweep(const AlgorithmSpec& algorithm,
                                           const std::function<Landscape(std::size_t)>& family,
                                           std::span<const std::size_t> dims,
                                           std::span<const std::uint64_t> seeds,
                                           const ExperimentOptions& options) {
    if (dims.empty() || seeds.empty()) {
        fail(ErrorCode::InvalidArgument, "dimensions and seeds must be nonempty");
    }
    for (std::size_t i = 1; i < dims.size(); ++i) {
        if (!(dims[i - 1] < dims[i])) {
            fail(ErrorCode::InvalidArgument, "dimensions must be strictly ascending");
        }
    }
    std::vector<SweepRow> rows;
    for (std::size_t d : dims) {
        const Landscape landscape = family(d);
        const std::vector<RunResult> results = run_experiment(
            std::span<const AlgorithmSpec>(&algorithm, 1), std::span<const Landscape>(&landscape, 1),
            seeds, options);
        rows.push_back(SweepRow{d, median_evaluations(results, options.budget)});
    }
    return rows;
}

double geometric_median(double p) {
    if (!(p > 0.0 && p <= 1.0)) {
        fail(ErrorCode::InvalidArgument, "success probability must lie in (0, 1]");
    }
    if (p == 1.0) {
        return 1.0;
    }
    return std::ceil(std::log(0.5) / std::log1p(-p));
}

} // namespace bbo::bench
