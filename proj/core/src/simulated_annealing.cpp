#include <cmath>

#include "bbo/error.hpp"
#include "bbo/metaheuristics.hpp"

namespace bbo::meta {

void SaConfig::validate() const {
    if (!(initial_temp > 0.0)) {
        fail(ErrorCode::InvalidArgument, "initial_temp must be positive");
    }
    if (!(cooling_rate > 0.0 && cooling_rate < 1.0)) {
        fail(ErrorCode::InvalidArgument, "cooling_rate must lie in (0, 1)");
    }
    if (!(step_scale > 0.0)) {
        fail(ErrorCode::InvalidArgument, "step_scale must be positive");
    }
}

double metropolis_acceptance(double delta, double temperature) {
    if (delta >= 0.0) {
        return 1.0;
    }
    if (!(temperature > 0.0)) {
        return 0.0;
    }
    return std::exp(delta / temperature);
}

SimulatedAnnealingSampler::SimulatedAnnealingSampler(SaConfig config) : config_(config) {
    config_.validate();
}

void SimulatedAnnealingSampler::initialize(const BoxDomain& domain) {
    domain_ = domain;
    current_.reset();
    temperature_ = config_.initial_temp;
}

std::vector<Point> SimulatedAnnealingSampler::step(const Dataset& data, RngStream& rng) {
    if (!domain_) {
        fail(ErrorCode::StateNotInitialized, "simulated annealing stepped before initialize()");
    }
    if (data.empty()) {
        return {domain_->sample_uniform(rng)};
    }
    const Observation& candidate = data[data.size() - 1];
    if (!current_) {
        current_ = candidate;
    } else {
        const double p = metropolis_acceptance(candidate.y - current_->y, temperature_);
        // One uniform per step regardless of outcome keeps the stream aligned.
        if (rng.uniform() < p) {
            current_ = candidate;
        }
        temperature_ *= config_.cooling_rate;
    }
    Point x = current_->x;
    for (std::size_t d = 0; d < x.size(); ++d) {
        x[d] += rng.normal() * config_.step_scale * domain_->width(d);
    }
    return {std::move(x)};
}

RunTrace simulated_annealing(FitnessFunction& f, const BoxDomain& domain, const SaConfig& config,
                             std::size_t budget, RngStream& rng) {
    if (!(f.domain() == domain)) {
        fail(ErrorCode::DimensionMismatch, "fitness domain differs from the search domain");
    }
    SimulatedAnnealingSampler sampler(config);
    return run_sampler(sampler, f, rng, RunOptions{budget, std::nullopt});
}

} // namespace bbo::meta
