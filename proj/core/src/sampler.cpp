#include "bbo/sampler.hpp"

#include "bbo/error.hpp"

namespace bbo {

RunTrace run_sampler(Sampler& sampler, FitnessFunction& f, RngStream& rng,
                     const RunOptions& options) {
    if (options.budget == 0) {
        fail(ErrorCode::InvalidArgument, "run budget must be positive");
    }
    const BoxDomain& domain = f.domain();
    sampler.initialize(domain);

    RunTrace trace;
    trace.seed = rng.seed();
    auto done = [&] {
        if (trace.size() >= options.budget) {
            return true;
        }
        return options.stop_at && !trace.best_so_far.empty() &&
               trace.best_so_far.back() >= *options.stop_at;
    };

    while (!done()) {
        std::vector<Point> proposals = sampler.step(trace.dataset, rng);
        if (proposals.empty()) {
            fail(ErrorCode::InternalConsistency,
                 std::string(sampler.name()) + " proposed an empty batch");
        }
        for (Point& x : proposals) {
            if (done()) {
                break;
            }
            if (domain.clamp(x)) {
                ++trace.clamped_proposals;
            }
            const double y = f.evaluate(x);
            trace.record(std::move(x), y);
        }
    }
    return trace;
}

} // namespace bbo
