#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "bbo/rng.hpp"

namespace bbo {

using Point = std::vector<double>;

/// Axis-aligned box [lower, upper] in R^n. Immutable after construction.
class BoxDomain {
public:
    /// Throws DimensionMismatch (unequal or empty bounds) or EmptyInterval
    /// (lower[i] >= upper[i]).
    BoxDomain(std::vector<double> lower, std::vector<double> upper);

    /// The cube [lo, hi]^n.
    static BoxDomain cube(std::size_t n, double lo, double hi);

    [[nodiscard]] std::size_t dimension() const noexcept { return lower_.size(); }
    [[nodiscard]] std::span<const double> lower() const noexcept { return lower_; }
    [[nodiscard]] std::span<const double> upper() const noexcept { return upper_; }
    [[nodiscard]] double width(std::size_t i) const { return upper_[i] - lower_[i]; }

    [[nodiscard]] bool contains(std::span<const double> x) const noexcept;

    /// Projects x onto the box. Returns true when any coordinate moved.
    bool clamp(Point& x) const;

    [[nodiscard]] Point sample_uniform(RngStream& rng) const;

    /// Maps unit-cube coordinates to the box.
    [[nodiscard]] Point from_unit(std::span<const double> u) const;
    [[nodiscard]] Point to_unit(std::span<const double> x) const;

    friend bool operator==(const BoxDomain&, const BoxDomain&) = default;

private:
    std::vector<double> lower_;
    std::vector<double> upper_;
};

BoxDomain make_box_domain(std::vector<double> lower, std::vector<double> upper);

/// Black-box fitness with call accounting.
///
/// The call counter is not synchronized: one instance serves exactly one run.
/// Parallel runs each construct their own FitnessFunction.
class FitnessFunction {
public:
    using Evaluator = std::function<double(std::span<const double>)>;

    FitnessFunction(BoxDomain domain, Evaluator evaluator,
                    std::optional<std::size_t> budget = std::nullopt);

    /// Throws OutOfDomain, DimensionMismatch or BudgetExhausted. A failed call
    /// does not count.
    double evaluate(std::span<const double> x);

    [[nodiscard]] std::size_t call_count() const noexcept { return call_count_; }
    [[nodiscard]] std::optional<std::size_t> budget() const noexcept { return budget_; }
    [[nodiscard]] std::optional<std::size_t> remaining() const noexcept;
    [[nodiscard]] const BoxDomain& domain() const noexcept { return domain_; }

private:
    BoxDomain domain_;
    Evaluator evaluator_;
    std::optional<std::size_t> budget_;
    std::size_t call_count_ = 0;
};

double evaluate(FitnessFunction& f, std::span<const double> x);

struct Observation {
    Point x;
    double y = 0.0;

    friend bool operator==(const Observation&, const Observation&) = default;
};

/// Ordered sample D = {(x_i, f(x_i))}; the record index is the iteration counter.
class Dataset {
public:
    Dataset() = default;

    void append(Point x, double y);

    [[nodiscard]] std::size_t size() const noexcept { return records_.size(); }
    [[nodiscard]] bool empty() const noexcept { return records_.empty(); }
    [[nodiscard]] const Observation& operator[](std::size_t i) const { return records_[i]; }
    [[nodiscard]] std::span<const Observation> records() const noexcept { return records_; }
    [[nodiscard]] std::vector<Point> xs() const;
    [[nodiscard]] std::vector<double> ys() const;

    friend bool operator==(const Dataset&, const Dataset&) = default;

private:
    std::vector<Observation> records_;
};

Dataset append_observation(Dataset d, Point x, double y);

/// Evaluation history of one run, maximization convention.
struct RunTrace {
    Dataset dataset;
    std::vector<double> best_so_far;
    std::uint64_t seed = 0;
    /// Number of proposals the framework moved back into the box.
    std::size_t clamped_proposals = 0;

    void record(Point x, double y);

    [[nodiscard]] std::size_t size() const noexcept { return dataset.size(); }
    [[nodiscard]] double best() const;
    [[nodiscard]] const Observation& best_observation() const;
    /// 1-based number of evaluations until best_so_far first reaches
    /// `threshold`; nullopt when it never does.
    [[nodiscard]] std::optional<std::size_t> evaluations_to(double threshold) const;

    friend bool operator==(const RunTrace&, const RunTrace&) = default;
};

/// Running maximum of `ys`. NaN values never become the best.
std::vector<double> running_max(std::span<const double> ys);

} // namespace bbo
