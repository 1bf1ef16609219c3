#include "bbo/bayesopt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>

#include "bbo/error.hpp"

namespace bbo::bayesopt {

std::string_view to_string(Acquisition a) noexcept {
    switch (a) {
    case Acquisition::ExpectedImprovement: return "ei";
    case Acquisition::UpperConfidenceBound: return "ucb";
    }
    return "ei";
}

Acquisition acquisition_from_string(std::string_view name) {
    if (name == "ei" || name == "expected_improvement") {
        return Acquisition::ExpectedImprovement;
    }
    if (name == "ucb" || name == "upper_confidence_bound") {
        return Acquisition::UpperConfidenceBound;
    }
    fail(ErrorCode::InvalidArgument, "unknown acquisition '" + std::string(name) + "'");
}

void BoConfig::validate() const {
    if (init_design_size < 2) {
        fail(ErrorCode::InvalidArgument, "init_design_size must be at least 2");
    }
    if (iterations < 1) {
        fail(ErrorCode::InvalidArgument, "iterations must be at least 1");
    }
    if (xi && !(*xi >= 0.0)) {
        fail(ErrorCode::InvalidArgument, "xi must be nonnegative");
    }
    if (!(ucb_beta > 0.0)) {
        fail(ErrorCode::InvalidArgument, "ucb_beta must be positive");
    }
    if (acq_multistarts < 1 || acq_local_steps < 1 || refit_every < 1) {
        fail(ErrorCode::InvalidArgument,
             "acq_multistarts, acq_local_steps and refit_every must be positive");
    }
}

std::vector<Point> latin_hypercube(std::size_t n, const BoxDomain& domain, RngStream& rng) {
    if (n == 0) {
        fail(ErrorCode::InvalidArgument, "latin hypercube needs n >= 1");
    }
    const std::size_t dim = domain.dimension();
    std::vector<Point> points(n, Point(dim));
    std::vector<std::size_t> perm(n);
    for (std::size_t d = 0; d < dim; ++d) {
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        for (std::size_t i = n; i > 1; --i) {
            std::swap(perm[i - 1], perm[rng.uniform_index(i)]);
        }
        const double lo = domain.lower()[d];
        const double w = domain.width(d) / static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double stratum_lo = lo + static_cast<double>(perm[i]) * w;
            double x = stratum_lo + rng.uniform() * w;
            // Stay strictly inside the stratum after rounding.
            const double stratum_hi = lo + static_cast<double>(perm[i] + 1) * w;
            if (x >= stratum_hi) {
                x = std::nextafter(stratum_hi, stratum_lo);
            }
            points[i][d] = std::clamp(x, lo, domain.upper()[d]);
        }
    }
    return points;
}

double expected_improvement(double mean, double variance, double best, double xi) {
    const double delta = mean - best - xi;
    if (!(variance > 0.0)) {
        return std::max(delta, 0.0);
    }
    const double sigma = std::sqrt(variance);
    const double z = delta / sigma;
    const double cdf = 0.5 * std::erfc(-z / std::numbers::sqrt2);
    const double pdf = std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
    return std::max(delta * cdf + sigma * pdf, 0.0);
}

double upper_confidence_bound(double mean, double variance, double beta) {
    return mean + beta * std::sqrt(std::max(variance, 0.0));
}

namespace {

double effective_xi(const BoConfig& config, double best) {
    return config.xi.value_or(0.01 * std::abs(best));
}

double best_of(const gp::GpModel& model) {
    const auto& ys = model.train_y();
    return *std::max_element(ys.begin(), ys.end());
}

} // namespace

double acquisition_value(const gp::GpModel& model, std::span<const double> x,
                         const BoConfig& config, double best) {
    const gp::GpPrediction p = model.predict(x);
    switch (config.acquisition) {
    case Acquisition::ExpectedImprovement:
        return expected_improvement(p.mean, p.variance, best, effective_xi(config, best));
    case Acquisition::UpperConfidenceBound:
        return upper_confidence_bound(p.mean, p.variance, config.ucb_beta);
    }
    return 0.0;
}

AcquisitionMaximum maximize_acquisition_detailed(const gp::GpModel& model, const BoxDomain& domain,
                                                 const BoConfig& config, RngStream& rng) {
    if (model.dimension() != domain.dimension()) {
        fail(ErrorCode::DimensionMismatch, "model and domain differ in dimension");
    }
    const std::size_t dim = domain.dimension();
    const double best = best_of(model);

    AcquisitionMaximum result;
    result.value = -std::numeric_limits<double>::infinity();
    Point best_unit;
    auto probe = [&](const Point& u) {
        const double v = acquisition_value(model, domain.from_unit(u), config, best);
        ++result.probes;
        if (v > result.value) {
            result.value = v;
            best_unit = u;
        }
        return v;
    };

    for (std::size_t s = 0; s < config.acq_multistarts; ++s) {
        Point cur(dim);
        for (auto& c : cur) {
            c = rng.uniform();
        }
        double cur_value = probe(cur);
        double step = 0.1;
        for (std::size_t k = 0; k < config.acq_local_steps; ++k) {
            bool improved = false;
            for (std::size_t d = 0; d < dim; ++d) {
                for (const double sign : {1.0, -1.0}) {
                    Point cand = cur;
                    cand[d] = std::clamp(cur[d] + sign * step, 0.0, 1.0);
                    if (cand[d] == cur[d]) {
                        continue;
                    }
                    const double v = probe(cand);
                    if (v > cur_value) {
                        cur = std::move(cand);
                        cur_value = v;
                        improved = true;
                        break;
                    }
                }
            }
            if (!improved) {
                step *= 0.5;
            }
        }
    }
    result.x = domain.from_unit(best_unit);
    return result;
}

Point maximize_acquisition(const gp::GpModel& model, const BoxDomain& domain,
                           const BoConfig& config, RngStream& rng) {
    return maximize_acquisition_detailed(model, domain, config, rng).x;
}

BayesOptSampler::BayesOptSampler(BoConfig config) : config_(std::move(config)) {
    config_.validate();
}

void BayesOptSampler::initialize(const BoxDomain& domain) {
    domain_ = domain;
    hyper_.reset();
    model_.reset();
    infills_ = 0;
    last_acquisition_ = 0.0;
}

std::vector<Point> BayesOptSampler::step(const Dataset& data, RngStream& rng) {
    if (!domain_) {
        fail(ErrorCode::StateNotInitialized, "bo sampler stepped before initialize()");
    }
    if (data.empty()) {
        return latin_hypercube(config_.init_design_size, *domain_, rng);
    }
    if (!hyper_ || infills_ % config_.refit_every == 0) {
        gp::GpFitConfig fit = config_.fit;
        fit.widths.clear();
        for (std::size_t d = 0; d < domain_->dimension(); ++d) {
            fit.widths.push_back(domain_->width(d));
        }
        if (hyper_) {
            fit.warm_start = hyper_;
        }
        model_.emplace(gp::gp_fit(data, fit, rng));
        hyper_ = model_->hyper();
    } else {
        std::vector<double> ys = data.ys();
        gp::GpHyperparams h = *hyper_;
        h.prior_mean = std::accumulate(ys.begin(), ys.end(), 0.0) / static_cast<double>(ys.size());
        model_.emplace(data.xs(), std::move(ys), std::move(h), config_.fit.jitter);
    }
    AcquisitionMaximum best = maximize_acquisition_detailed(*model_, *domain_, config_, rng);
    last_acquisition_ = best.value;
    ++infills_;
    return {std::move(best.x)};
}

RunTrace bo_run(FitnessFunction& f, const BoxDomain& domain, const BoConfig& config,
                RngStream& rng) {
    if (!(f.domain() == domain)) {
        fail(ErrorCode::DimensionMismatch, "fitness domain differs from the optimization domain");
    }
    BayesOptSampler sampler(config);
    return run_sampler(sampler, f, rng,
                       RunOptions{config.init_design_size + config.iterations, std::nullopt});
}

} // namespace bbo::bayesopt
