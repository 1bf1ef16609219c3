#include "bbo/error.hpp"
#include "bbo/metaheuristics.hpp"

namespace bbo::meta {

std::vector<Point> RandomSearchSampler::step(const Dataset& /*data*/, RngStream& rng) {
    if (!domain_) {
        fail(ErrorCode::StateNotInitialized, "random search stepped before initialize()");
    }
    return {domain_->sample_uniform(rng)};
}

RunTrace random_search(FitnessFunction& f, const BoxDomain& domain, std::size_t budget,
                       RngStream& rng) {
    if (!(f.domain() == domain)) {
        fail(ErrorCode::DimensionMismatch, "fitness domain differs from the search domain");
    }
    RandomSearchSampler sampler;
    return run_sampler(sampler, f, rng, RunOptions{budget, std::nullopt});
}

} // namespace bbo::meta
