#include <algorithm>
#include <numeric>
#include <string>

#include "bbo/error.hpp"
#include "bbo/metaheuristics.hpp"

namespace bbo::meta {

void GaConfig::validate() const {
    if (population < 2 || population % 2 != 0) {
        fail(ErrorCode::InvalidArgument, "population must be a positive even integer");
    }
    if (!(crossover_rate >= 0.0 && crossover_rate <= 1.0) ||
        !(mutation_rate >= 0.0 && mutation_rate <= 1.0)) {
        fail(ErrorCode::InvalidArgument, "crossover_rate and mutation_rate must lie in [0, 1]");
    }
    if (!(mutation_sigma > 0.0)) {
        fail(ErrorCode::InvalidArgument, "mutation_sigma must be positive");
    }
    if (elitism >= population) {
        fail(ErrorCode::InvalidArgument, "elitism must be smaller than the population");
    }
    if (tournament_size < 1 || tournament_size > population) {
        fail(ErrorCode::InvalidArgument, "tournament_size must lie in [1, population]");
    }
}

std::pair<Point, Point> uniform_crossover(const Point& a, const Point& b, RngStream& rng) {
    if (a.size() != b.size()) {
        fail(ErrorCode::DimensionMismatch, "crossover parents differ in dimension");
    }
    Point c1(a.size());
    Point c2(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (rng.uniform() < 0.5) {
            c1[i] = a[i];
            c2[i] = b[i];
        } else {
            c1[i] = b[i];
            c2[i] = a[i];
        }
    }
    return {std::move(c1), std::move(c2)};
}

std::size_t tournament_select(std::span<const double> fitness, std::size_t size, RngStream& rng) {
    if (fitness.empty() || size == 0) {
        fail(ErrorCode::InvalidArgument, "tournament needs a nonempty population and size >= 1");
    }
    std::size_t winner = rng.uniform_index(fitness.size());
    for (std::size_t k = 1; k < size; ++k) {
        const std::size_t c = rng.uniform_index(fitness.size());
        if (fitness[c] > fitness[winner] || (fitness[c] == fitness[winner] && c < winner)) {
            winner = c;
        }
    }
    return winner;
}

GeneticAlgorithmSampler::GeneticAlgorithmSampler(GaConfig config) : config_(config) {
    config_.validate();
}

void GeneticAlgorithmSampler::initialize(const BoxDomain& domain) {
    domain_ = domain;
    generation_ = 0;
}

std::vector<Point> GeneticAlgorithmSampler::step(const Dataset& data, RngStream& rng) {
    if (!domain_) {
        fail(ErrorCode::StateNotInitialized, "genetic algorithm stepped before initialize()");
    }
    const std::size_t pop = config_.population;
    std::vector<Point> next;
    next.reserve(pop);
    if (generation_ == 0) {
        for (std::size_t i = 0; i < pop; ++i) {
            next.push_back(domain_->sample_uniform(rng));
        }
        ++generation_;
        return next;
    }
    if (data.size() < pop) {
        fail(ErrorCode::InternalConsistency, "dataset is shorter than one generation");
    }
    const auto records = data.records().last(pop);
    std::vector<double> fitness(pop);
    for (std::size_t i = 0; i < pop; ++i) {
        fitness[i] = records[i].y;
    }
    std::vector<std::size_t> order(pop);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return fitness[a] > fitness[b]; });
    for (std::size_t e = 0; e < config_.elitism; ++e) {
        next.push_back(records[order[e]].x);
    }

    auto mutate = [&](Point& x) {
        for (std::size_t d = 0; d < x.size(); ++d) {
            if (rng.uniform() < config_.mutation_rate) {
                x[d] += rng.normal() * config_.mutation_sigma * domain_->width(d);
            }
        }
        domain_->clamp(x);
    };

    while (next.size() < pop) {
        const Point& a = records[tournament_select(fitness, config_.tournament_size, rng)].x;
        const Point& b = records[tournament_select(fitness, config_.tournament_size, rng)].x;
        auto [c1, c2] = rng.uniform() < config_.crossover_rate ? uniform_crossover(a, b, rng)
                                                               : std::pair<Point, Point>{a, b};
        mutate(c1);
        mutate(c2);
        next.push_back(std::move(c1));
        if (next.size() < pop) {
            next.push_back(std::move(c2));
        }
    }
    ++generation_;
    return next;
}

RunTrace genetic_algorithm(FitnessFunction& f, const BoxDomain& domain, const GaConfig& config,
                           std::size_t budget, RngStream& rng) {
    if (!(f.domain() == domain)) {
        fail(ErrorCode::DimensionMismatch, "fitness domain differs from the search domain");
    }
    if (budget < config.population) {
        fail(ErrorCode::InvalidArgument, "budget " + std::to_string(budget) +
                                             " is smaller than one population");
    }
    GeneticAlgorithmSampler sampler(config);
    return run_sampler(sampler, f, rng, RunOptions{budget, std::nullopt});
}

} // namespace bbo::meta
