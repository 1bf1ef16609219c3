#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "bbo/core.hpp"
#include "bbo/linalg.hpp"
#include "bbo/rng.hpp"

namespace bbo::gp {

/// Hyperparameters of the ARD squared-exponential prior.
///
/// k(a, b) = signal_variance * exp(-1/2 * sum_d ((a_d - b_d) / length_scales_d)^2)
/// plus noise_variance on the diagonal of the training Gram matrix. The pure
/// correlation kernel is the special case signal_variance = 1, noise_variance = 0.
struct GpHyperparams {
    std::vector<double> length_scales;
    double signal_variance = 1.0;
    double noise_variance = 1e-8;
    double prior_mean = 0.0;

    /// Throws InvalidArgument on nonpositive scales, variances or noise < 0.
    void validate() const;

    friend bool operator==(const GpHyperparams&, const GpHyperparams&) = default;
};

double kernel_ard_sqexp(std::span<const double> xi, std::span<const double> xj,
                        const GpHyperparams& hyper);

/// Gram matrix of the kernel over `xs` (no noise term).
linalg::DenseMatrix kernel_matrix(const std::vector<Point>& xs, const GpHyperparams& hyper);

struct GpPrediction {
    double mean = 0.0;
    double variance = 0.0;
};

/// Posterior of a GP conditioned on noisy observations.
///
/// Holds the Cholesky factor of K + noise_variance * I (+ jitter * I) and
/// alpha = (K + noise_variance * I)^-1 (y - prior_mean). Immutable; predictions
/// are safe to run concurrently.
class GpModel {
public:
    GpModel(std::vector<Point> train_x, std::vector<double> train_y, GpHyperparams hyper,
            double jitter = 0.0);

    /// mean = m + k*^T alpha, variance = k(x, x) - |L^-1 k*|^2 clamped at zero.
    /// Throws InternalConsistency when round-off cannot explain a negative variance.
    [[nodiscard]] GpPrediction predict(std::span<const double> x) const;

    [[nodiscard]] std::size_t dimension() const noexcept { return hyper_.length_scales.size(); }
    [[nodiscard]] std::size_t size() const noexcept { return train_y_.size(); }
    [[nodiscard]] const std::vector<Point>& train_x() const noexcept { return train_x_; }
    [[nodiscard]] const std::vector<double>& train_y() const noexcept { return train_y_; }
    [[nodiscard]] const GpHyperparams& hyper() const noexcept { return hyper_; }
    [[nodiscard]] double jitter() const noexcept { return jitter_; }
    [[nodiscard]] const linalg::DenseMatrix& chol() const noexcept { return chol_; }
    [[nodiscard]] const std::vector<double>& alpha() const noexcept { return alpha_; }

    /// Schema "bbo.gp_model/1": dimension, hyperparameters, jitter, train_x,
    /// train_y. Factors are not stored; from_json recomputes them.
    [[nodiscard]] nlohmann::json to_json() const;
    static GpModel from_json(const nlohmann::json& j);

private:
    std::vector<Point> train_x_;
    std::vector<double> train_y_;
    GpHyperparams hyper_;
    double jitter_ = 0.0;
    linalg::DenseMatrix chol_;
    std::vector<double> alpha_;
    std::vector<double> inv_length_sq_;
};

GpPrediction gp_posterior(const GpModel& model, std::span<const double> x);

struct LmlResult {
    double value = 0.0;
    /// Partial derivatives with respect to (log length_scales..., log
    /// signal_variance, log noise_variance).
    std::vector<double> gradient;
};

/// Log marginal likelihood of (train_x, train_y) under `hyper`.
LmlResult log_marginal_likelihood(const std::vector<Point>& train_x,
                                  std::span<const double> train_y, const GpHyperparams& hyper,
                                  double jitter = 0.0);

struct GpFitConfig {
    std::size_t multistarts = 8;
    /// Gradient-ascent iterations per start.
    std::size_t max_iterations = 40;
    /// Per-dimension scale for length-scale ranges; empty means the data range.
    std::vector<double> widths;
    double jitter = 0.0;
    /// Holds the noise variance at this value instead of fitting it.
    std::optional<double> fixed_noise_variance;
    /// Extra starting point (for example the previous fit), tried after the random starts.
    std::optional<GpHyperparams> warm_start;
};

/// Maximizes the log marginal likelihood over log-hyperparameters.
///
/// Starts are log-uniform: length scale in [1e-2, 1e1] * width, signal variance
/// in [1e-2, 1e2] * var(y), noise in [1e-8, 1e-1] * var(y). Each start is
/// improved by projected gradient ascent with backtracking inside the box
/// [1e-3, 1e2] * width, [1e-6, 1e4] * var(y), [1e-10, 1] * var(y). The prior
/// mean is the mean of y. Throws InsufficientData for fewer than two records.
GpModel gp_fit(const Dataset& data, const GpFitConfig& config, RngStream& rng);

} // namespace bbo::gp
