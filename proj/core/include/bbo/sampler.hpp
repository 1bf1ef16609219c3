#pragma once

#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

#include "bbo/core.hpp"
#include "bbo/rng.hpp"

namespace bbo {

/// An optimizer seen as a sampling process: given everything evaluated so far,
/// propose the next batch of points. Batch size is algorithm-defined.
///
/// A sampler assumes the dataset it is stepped with is the one produced by
/// evaluating its own earlier proposals in order (the driver below guarantees
/// this). Proposals are deterministic given (state, dataset, rng position).
class Sampler {
public:
    virtual ~Sampler() = default;

    [[nodiscard]] virtual std::string_view name() const = 0;

    /// Resets all internal state for a run on `domain`.
    virtual void initialize(const BoxDomain& domain) = 0;

    /// Returns at least one point. Throws StateNotInitialized before initialize().
    virtual std::vector<Point> step(const Dataset& data, RngStream& rng) = 0;
};

struct RunOptions {
    /// Maximum number of evaluations in the run.
    std::size_t budget = 1;
    /// Stop early once best_so_far reaches this value. Only meaningful for a
    /// value that cannot be exceeded (a landscape's known optimum), where the
    /// early stop leaves evaluations-to-threshold and the final best unchanged.
    std::optional<double> stop_at;
};

/// Drives `sampler` against `f`: proposals are clamped into the box (and
/// counted), evaluated in order, and recorded, until `options.budget`
/// evaluations are done. Errors from `f` (including its own BudgetExhausted)
/// propagate.
RunTrace run_sampler(Sampler& sampler, FitnessFunction& f, RngStream& rng,
                     const RunOptions& options);

} // namespace bbo
