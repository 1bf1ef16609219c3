#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "bbo/error.hpp"
#include "bbo/metaheuristics.hpp"

namespace bbo::meta {

using linalg::DenseMatrix;

void EsConfig::validate() const {
    if (lambda < 1 || mu < 1 || mu > lambda) {
        fail(ErrorCode::InvalidArgument, "need 1 <= mu <= lambda");
    }
    if (!(initial_sigma > 0.0)) {
        fail(ErrorCode::InvalidArgument, "initial_sigma must be positive");
    }
    if (!(covariance_learning_rate > 0.0 && covariance_learning_rate <= 1.0)) {
        fail(ErrorCode::InvalidArgument, "covariance_learning_rate must lie in (0, 1]");
    }
}

EsConfig EsConfig::defaults_for(std::size_t dimension) {
    EsConfig c;
    c.lambda = 4 + static_cast<std::size_t>(std::floor(3.0 * std::log(static_cast<double>(dimension))));
    c.mu = c.lambda / 2;
    return c;
}

std::vector<double> symmetric_eigenvalues(const DenseMatrix& a) {
    const std::size_t n = a.rows();
    if (n != a.cols()) {
        fail(ErrorCode::NotSquare, "eigenvalues need a square matrix");
    }
    DenseMatrix m = a;
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                off += m(i, j) * m(i, j);
            }
        }
        if (off < 1e-30) {
            break;
        }
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                if (m(p, q) == 0.0) {
                    continue;
                }
                const double theta = (m(q, q) - m(p, p)) / (2.0 * m(p, q));
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double mkp = m(k, p);
                    const double mkq = m(k, q);
                    m(k, p) = c * mkp - s * mkq;
                    m(k, q) = s * mkp + c * mkq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double mpk = m(p, k);
                    const double mqk = m(q, k);
                    m(p, k) = c * mpk - s * mqk;
                    m(q, k) = s * mpk + c * mqk;
                }
            }
        }
    }
    std::vector<double> eig(n);
    for (std::size_t i = 0; i < n; ++i) {
        eig[i] = m(i, i);
    }
    std::sort(eig.begin(), eig.end());
    return eig;
}

EvolutionStrategySampler::EvolutionStrategySampler(EsConfig config) : config_(config) {
    config_.validate();
}

void EvolutionStrategySampler::initialize(const BoxDomain& domain) {
    domain_ = domain;
    mean_.clear();
    sigma_ = config_.initial_sigma;
    covariance_ = DenseMatrix::identity(domain.dimension());
    previous_best_.reset();
    generation_ = 0;
}

double EvolutionStrategySampler::condition() const {
    const std::vector<double> eig = symmetric_eigenvalues(covariance_);
    return eig.back() / std::max(eig.front(), 1e-300);
}

double EvolutionStrategySampler::axis_ratio() const { return std::sqrt(condition()); }

void EvolutionStrategySampler::adapt(const Dataset& data) {
    const std::size_t lambda = config_.lambda;
    const std::size_t mu = config_.mu;
    const std::size_t n = mean_.size();
    if (data.size() < lambda) {
        fail(ErrorCode::InternalConsistency, "dataset is shorter than one generation");
    }
    const auto records = data.records().last(lambda);
    std::vector<std::size_t> order(lambda);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return records[a].y > records[b].y; });

    Point new_mean(n, 0.0);
    std::vector<Point> steps;
    steps.reserve(mu);
    for (std::size_t s = 0; s < mu; ++s) {
        const Point u = domain_->to_unit(records[order[s]].x);
        Point y(n);
        for (std::size_t d = 0; d < n; ++d) {
            new_mean[d] += u[d] / static_cast<double>(mu);
            y[d] = (u[d] - mean_[d]) / sigma_;
        }
        steps.push_back(std::move(y));
    }

    const double lr = config_.covariance_learning_rate;
    DenseMatrix c(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double scatter = 0.0;
            for (const Point& y : steps) {
                scatter += y[i] * y[j];
            }
            const double v = (1.0 - lr) * covariance_(i, j) + lr * scatter / static_cast<double>(mu);
            c(i, j) = v;
            c(j, i) = v;
        }
    }
    double trace = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        trace += c(i, i);
    }
    if (trace > 0.0 && std::isfinite(trace)) {
        const double k = static_cast<double>(n) / trace;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                c(i, j) *= k;
            }
        }
        covariance_ = std::move(c);
    }

    const double generation_best = records[order.front()].y;
    if (previous_best_) {
        std::size_t successes = 0;
        for (const auto& r : records) {
            if (r.y > *previous_best_) {
                ++successes;
            }
        }
        const double rate = static_cast<double>(successes) / static_cast<double>(lambda);
        sigma_ *= std::exp((rate - 0.2) / 0.8);
        sigma_ = std::clamp(sigma_, 1e-12, 1.0);
    }
    previous_best_ = generation_best;
    mean_ = std::move(new_mean);
}

std::vector<Point> EvolutionStrategySampler::step(const Dataset& data, RngStream& rng) {
    if (!domain_) {
        fail(ErrorCode::StateNotInitialized, "evolution strategy stepped before initialize()");
    }
    const std::size_t n = domain_->dimension();
    if (mean_.empty()) {
        mean_.resize(n);
        for (auto& m : mean_) {
            m = rng.uniform();
        }
    } else {
        adapt(data);
    }
    const DenseMatrix a = linalg::cholesky(covariance_, linalg::default_jitter(covariance_));
    std::vector<Point> offspring;
    offspring.reserve(config_.lambda);
    Point z(n);
    for (std::size_t k = 0; k < config_.lambda; ++k) {
        for (auto& zi : z) {
            zi = rng.normal();
        }
        Point x(n);
        for (std::size_t i = 0; i < n; ++i) {
            double az = 0.0;
            for (std::size_t j = 0; j <= i; ++j) {
                az += a(i, j) * z[j];
            }
            const double u = mean_[i] + sigma_ * az;
            // Unclamped on purpose: the driver clamps and counts.
            x[i] = domain_->lower()[i] + u * domain_->width(i);
        }
        offspring.push_back(std::move(x));
    }
    ++generation_;
    return offspring;
}

RunTrace evolution_strategy(FitnessFunction& f, const BoxDomain& domain, const EsConfig& config,
                            std::size_t budget, RngStream& rng) {
    if (!(f.domain() == domain)) {
        fail(ErrorCode::DimensionMismatch, "fitness domain differs from the search domain");
    }
    if (budget < config.lambda) {
        fail(ErrorCode::InvalidArgument, "budget " + std::to_string(budget) +
                                             " is smaller than one generation");
    }
    EvolutionStrategySampler sampler(config);
    return run_sampler(sampler, f, rng, RunOptions{budget, std::nullopt});
}

} // namespace bbo::meta
