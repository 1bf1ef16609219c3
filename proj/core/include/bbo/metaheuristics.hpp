#pragma once

#include <cstddef>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

#include "bbo/core.hpp"
#include "bbo/linalg.hpp"
#include "bbo/rng.hpp"
#include "bbo/sampler.hpp"

/// Baseline samplers. Operator choices are simplified, not reference
/// implementations: each algorithm's configuration is the implicit prior it
/// places on the fitness. Defaults are conventional values, not tuned results.
namespace bbo::meta {

// ---------------------------------------------------------------------------
// Pure random search

/// One i.i.d. uniform point per step.
class RandomSearchSampler final : public Sampler {
public:
    [[nodiscard]] std::string_view name() const override { return "random"; }
    void initialize(const BoxDomain& domain) override { domain_ = domain; }
    std::vector<Point> step(const Dataset& data, RngStream& rng) override;

private:
    std::optional<BoxDomain> domain_;
};

RunTrace random_search(FitnessFunction& f, const BoxDomain& domain, std::size_t budget,
                       RngStream& rng);

// ---------------------------------------------------------------------------
// Simulated annealing

struct SaConfig {
    double initial_temp = 1.0;
    double cooling_rate = 0.99;
    /// Gaussian step standard deviation as a fraction of each domain width.
    double step_scale = 0.1;

    void validate() const;
    friend bool operator==(const SaConfig&, const SaConfig&) = default;
};

/// Metropolis rule for maximization: 1 when delta >= 0, exp(delta / T) otherwise.
double metropolis_acceptance(double delta, double temperature);

class SimulatedAnnealingSampler final : public Sampler {
public:
    explicit SimulatedAnnealingSampler(SaConfig config);

    [[nodiscard]] std::string_view name() const override { return "sa"; }
    void initialize(const BoxDomain& domain) override;
    std::vector<Point> step(const Dataset& data, RngStream& rng) override;

    [[nodiscard]] double temperature() const noexcept { return temperature_; }

private:
    SaConfig config_;
    std::optional<BoxDomain> domain_;
    std::optional<Observation> current_;
    double temperature_ = 0.0;
};

RunTrace simulated_annealing(FitnessFunction& f, const BoxDomain& domain, const SaConfig& config,
                             std::size_t budget, RngStream& rng);

// ---------------------------------------------------------------------------
// Genetic algorithm

struct GaConfig {
    std::size_t population = 20;
    double crossover_rate = 0.9;
    /// Per-gene mutation probability.
    double mutation_rate = 0.5;
    /// Mutation standard deviation as a fraction of each domain width.
    double mutation_sigma = 0.05;
    std::size_t elitism = 2;
    std::size_t tournament_size = 3;

    void validate() const;
    friend bool operator==(const GaConfig&, const GaConfig&) = default;
};

/// Each gene of the first child comes from `a` or `b` with probability 1/2;
/// the second child takes the complement.
std::pair<Point, Point> uniform_crossover(const Point& a, const Point& b, RngStream& rng);

/// Index of the tournament winner among `size` uniform draws (with
/// replacement). Larger fitness wins, lower index on ties.
std::size_t tournament_select(std::span<const double> fitness, std::size_t size, RngStream& rng);

/// Generational GA. Every step proposes a full population: the `elitism` best
/// of the previous generation unchanged, then offspring from tournament
/// selection, uniform crossover and per-gene Gaussian mutation, clamped into
/// the box. Elites are re-evaluated, so a deterministic fitness keeps the
/// per-generation best nondecreasing.
class GeneticAlgorithmSampler final : public Sampler {
public:
    explicit GeneticAlgorithmSampler(GaConfig config);

    [[nodiscard]] std::string_view name() const override { return "ga"; }
    void initialize(const BoxDomain& domain) override;
    std::vector<Point> step(const Dataset& data, RngStream& rng) override;

    [[nodiscard]] std::size_t generation() const noexcept { return generation_; }

private:
    GaConfig config_;
    std::optional<BoxDomain> domain_;
    std::size_t generation_ = 0;
};

RunTrace genetic_algorithm(FitnessFunction& f, const BoxDomain& domain, const GaConfig& config,
                           std::size_t budget, RngStream& rng);

// ---------------------------------------------------------------------------
// Evolution strategy ("CMA-ES-lite")

struct EsConfig {
    std::size_t lambda = 6;
    std::size_t mu = 3;
    /// Initial step size as a fraction of each domain width.
    double initial_sigma = 0.3;
    double covariance_learning_rate = 0.2;

    void validate() const;
    friend bool operator==(const EsConfig&, const EsConfig&) = default;

    /// lambda = 4 + floor(3 ln n), mu = lambda / 2.
    static EsConfig defaults_for(std::size_t dimension);
};

/// (mu, lambda)-ES with a learned covariance, CMA-ES-lite: no evolution paths
/// and no weighted recombination.
///
/// Works in unit-cube coordinates. Offspring are mean + sigma * A z with
/// A A^T = C. After each generation the mean becomes the average of the mu
/// best offspring, C <- (1 - lr) C + lr * (1/mu) sum y y^T over their steps
/// y = (x - old mean) / sigma, then C is rescaled to trace n. sigma follows a
/// success rule: with p the fraction of offspring strictly better than the
/// previous generation's best, sigma <- sigma * exp((p - 1/5) / (4/5)).
/// Selection and success counting only compare fitness values.
class EvolutionStrategySampler final : public Sampler {
public:
    explicit EvolutionStrategySampler(EsConfig config);

    [[nodiscard]] std::string_view name() const override { return "es"; }
    void initialize(const BoxDomain& domain) override;
    std::vector<Point> step(const Dataset& data, RngStream& rng) override;

    [[nodiscard]] const linalg::DenseMatrix& covariance() const noexcept { return covariance_; }
    [[nodiscard]] double sigma() const noexcept { return sigma_; }
    [[nodiscard]] const Point& mean_unit() const noexcept { return mean_; }
    [[nodiscard]] std::size_t generation() const noexcept { return generation_; }
    /// Ratio of largest to smallest eigenvalue of C.
    [[nodiscard]] double condition() const;
    /// Square root of condition(): ratio of the longest to shortest axis of the
    /// sampling ellipsoid.
    [[nodiscard]] double axis_ratio() const;

private:
    void adapt(const Dataset& data);

    EsConfig config_;
    std::optional<BoxDomain> domain_;
    Point mean_;
    double sigma_ = 0.0;
    linalg::DenseMatrix covariance_;
    std::optional<double> previous_best_;
    std::size_t generation_ = 0;
};

RunTrace evolution_strategy(FitnessFunction& f, const BoxDomain& domain, const EsConfig& config,
                            std::size_t budget, RngStream& rng);

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
std::vector<double> symmetric_eigenvalues(const linalg::DenseMatrix& a);

} // namespace bbo::meta
