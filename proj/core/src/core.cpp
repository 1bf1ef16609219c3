#include "bbo/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "bbo/error.hpp"

namespace bbo {

BoxDomain::BoxDomain(std::vector<double> lower, std::vector<double> upper)
    : lower_(std::move(lower)), upper_(std::move(upper)) {
    if (lower_.empty() || lower_.size() != upper_.size()) {
        fail(ErrorCode::DimensionMismatch, "box bounds must have equal nonzero length (got " +
                                               std::to_string(lower_.size()) + " and " +
                                               std::to_string(upper_.size()) + ")");
    }
    for (std::size_t i = 0; i < lower_.size(); ++i) {
        if (!(lower_[i] < upper_[i]) || !std::isfinite(lower_[i]) || !std::isfinite(upper_[i])) {
            fail(ErrorCode::EmptyInterval, "dimension " + std::to_string(i) + " has lower >= upper");
        }
    }
}

BoxDomain BoxDomain::cube(std::size_t n, double lo, double hi) {
    return BoxDomain(std::vector<double>(n, lo), std::vector<double>(n, hi));
}

bool BoxDomain::contains(std::span<const double> x) const noexcept {
    if (x.size() != lower_.size()) {
        return false;
    }
    for (std::size_t i = 0; i < x.size(); ++i) {
        // Negated form also rejects NaN.
        if (!(x[i] >= lower_[i] && x[i] <= upper_[i])) {
            return false;
        }
    }
    return true;
}

bool BoxDomain::clamp(Point& x) const {
    if (x.size() != lower_.size()) {
        fail(ErrorCode::DimensionMismatch, "point dimension does not match domain");
    }
    bool moved = false;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double v = x[i];
        if (std::isnan(v)) {
            v = 0.5 * (lower_[i] + upper_[i]);
        }
        v = std::clamp(v, lower_[i], upper_[i]);
        if (v != x[i]) {
            x[i] = v;
            moved = true;
        }
    }
    return moved;
}

Point BoxDomain::sample_uniform(RngStream& rng) const {
    Point x(lower_.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        x[i] = rng.uniform(lower_[i], upper_[i]);
    }
    return x;
}

Point BoxDomain::from_unit(std::span<const double> u) const {
    Point x(lower_.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        x[i] = std::clamp(lower_[i] + u[i] * (upper_[i] - lower_[i]), lower_[i], upper_[i]);
    }
    return x;
}

Point BoxDomain::to_unit(std::span<const double> x) const {
    Point u(lower_.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
        u[i] = (x[i] - lower_[i]) / (upper_[i] - lower_[i]);
    }
    return u;
}

BoxDomain make_box_domain(std::vector<double> lower, std::vector<double> upper) {
    return BoxDomain(std::move(lower), std::move(upper));
}

FitnessFunction::FitnessFunction(BoxDomain domain, Evaluator evaluator,
                                 std::optional<std::size_t> budget)
    : domain_(std::move(domain)), evaluator_(std::move(evaluator)), budget_(budget) {
    if (!evaluator_) {
        fail(ErrorCode::InvalidArgument, "fitness evaluator is empty");
    }
    if (budget_ && *budget_ == 0) {
        fail(ErrorCode::InvalidArgument, "budget must be positive");
    }
}

double FitnessFunction::evaluate(std::span<const double> x) {
    if (x.size() != domain_.dimension()) {
        fail(ErrorCode::DimensionMismatch, "point has dimension " + std::to_string(x.size()) +
                                               ", domain has " +
                                               std::to_string(domain_.dimension()));
    }
    if (!domain_.contains(x)) {
        fail(ErrorCode::OutOfDomain, "point lies outside the search box");
    }
    if (budget_ && call_count_ >= *budget_) {
        fail(ErrorCode::BudgetExhausted,
             "evaluation budget of " + std::to_string(*budget_) + " calls is spent");
    }
    const double y = evaluator_(x);
    ++call_count_;
    return y;
}

std::optional<std::size_t> FitnessFunction::remaining() const noexcept {
    if (!budget_) {
        return std::nullopt;
    }
    return *budget_ - call_count_;
}

double evaluate(FitnessFunction& f, std::span<const double> x) { return f.evaluate(x); }

void Dataset::append(Point x, double y) { records_.push_back(Observation{std::move(x), y}); }

std::vector<Point> Dataset::xs() const {
    std::vector<Point> out;
    out.reserve(records_.size());
    for (const auto& r : records_) {
        out.push_back(r.x);
    }
    return out;
}

std::vector<double> Dataset::ys() const {
    std::vector<double> out;
    out.reserve(records_.size());
    for (const auto& r : records_) {
        out.push_back(r.y);
    }
    return out;
}

Dataset append_observation(Dataset d, Point x, double y) {
    d.append(std::move(x), y);
    return d;
}

void RunTrace::record(Point x, double y) {
    double best = best_so_far.empty() ? -std::numeric_limits<double>::infinity() : best_so_far.back();
    if (y > best) {
        best = y;
    }
    dataset.append(std::move(x), y);
    best_so_far.push_back(best);
}

double RunTrace::best() const {
    if (best_so_far.empty()) {
        fail(ErrorCode::InsufficientData, "trace is empty");
    }
    return best_so_far.back();
}

const Observation& RunTrace::best_observation() const {
    if (dataset.empty()) {
        fail(ErrorCode::InsufficientData, "trace is empty");
    }
    std::size_t arg = 0;
    for (std::size_t i = 1; i < dataset.size(); ++i) {
        if (dataset[i].y > dataset[arg].y) {
            arg = i;
        }
    }
    return dataset[arg];
}

std::optional<std::size_t> RunTrace::evaluations_to(double threshold) const {
    for (std::size_t i = 0; i < best_so_far.size(); ++i) {
        if (best_so_far[i] >= threshold) {
            return i + 1;
        }
    }
    return std::nullopt;
}

std::vector<double> running_max(std::span<const double> ys) {
    std::vector<double> out;
    out.reserve(ys.size());
    double best = -std::numeric_limits<double>::infinity();
    for (double y : ys) {
        if (y > best) {
            best = y;
        }
        out.push_back(best);
    }
    return out;
}

} // namespace bbo
