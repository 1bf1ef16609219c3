#include "bbo/gp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include <nlohmann/json.hpp>

#include "bbo/error.hpp"

namespace bbo::gp {

using linalg::DenseMatrix;

void GpHyperparams::validate() const {
    if (length_scales.empty()) {
        fail(ErrorCode::InvalidArgument, "length_scales must be nonempty");
    }
    for (double l : length_scales) {
        if (!(l > 0.0) || !std::isfinite(l)) {
            fail(ErrorCode::InvalidArgument, "length scales must be positive and finite");
        }
    }
    if (!(signal_variance > 0.0) || !std::isfinite(signal_variance)) {
        fail(ErrorCode::InvalidArgument, "signal_variance must be positive");
    }
    if (!(noise_variance >= 0.0) || !std::isfinite(noise_variance)) {
        fail(ErrorCode::InvalidArgument, "noise_variance must be nonnegative");
    }
    if (!std::isfinite(prior_mean)) {
        fail(ErrorCode::InvalidArgument, "prior_mean must be finite");
    }
}

double kernel_ard_sqexp(std::span<const double> xi, std::span<const double> xj,
                        const GpHyperparams& hyper) {
    const std::size_t n = hyper.length_scales.size();
    if (xi.size() != n || xj.size() != n) {
        fail(ErrorCode::DimensionMismatch, "kernel arguments and length scales differ in dimension");
    }
    double q = 0.0;
    for (std::size_t d = 0; d < n; ++d) {
        const double z = (xi[d] - xj[d]) / hyper.length_scales[d];
        q += z * z;
    }
    return hyper.signal_variance * std::exp(-0.5 * q);
}

DenseMatrix kernel_matrix(const std::vector<Point>& xs, const GpHyperparams& hyper) {
    if (xs.empty()) {
        fail(ErrorCode::InvalidArgument, "kernel matrix needs at least one point");
    }
    const std::size_t n = xs.size();
    DenseMatrix k(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        k(i, i) = kernel_ard_sqexp(xs[i], xs[i], hyper);
        for (std::size_t j = 0; j < i; ++j) {
            const double v = kernel_ard_sqexp(xs[i], xs[j], hyper);
            k(i, j) = v;
            k(j, i) = v;
        }
    }
    return k;
}

namespace {

void check_training_shapes(const std::vector<Point>& xs, std::size_t ny, std::size_t dim) {
    if (xs.empty()) {
        fail(ErrorCode::InsufficientData, "at least one training point is required");
    }
    if (xs.size() != ny) {
        fail(ErrorCode::DimensionMismatch, "train_x and train_y differ in length");
    }
    for (const auto& x : xs) {
        if (x.size() != dim) {
            fail(ErrorCode::DimensionMismatch, "training point dimension differs from length scales");
        }
    }
}

DenseMatrix noisy_gram(const std::vector<Point>& xs, const GpHyperparams& hyper) {
    DenseMatrix k = kernel_matrix(xs, hyper);
    for (std::size_t i = 0; i < xs.size(); ++i) {
        k(i, i) += hyper.noise_variance;
    }
    return k;
}

/// Precomputes squared coordinate differences so repeated likelihood
/// evaluations during fitting cost one factorization each.
class LmlWorkspace {
public:
    LmlWorkspace(const std::vector<Point>& xs, std::span<const double> ys)
        : n_(xs.size()), dim_(xs.front().size()), ys_(ys.begin(), ys.end()),
          sqdiff_(dim_, std::vector<double>(n_ * n_, 0.0)) {
        for (std::size_t d = 0; d < dim_; ++d) {
            auto& s = sqdiff_[d];
            for (std::size_t i = 0; i < n_; ++i) {
                for (std::size_t j = 0; j < i; ++j) {
                    const double diff = xs[i][d] - xs[j][d];
                    s[i * n_ + j] = diff * diff;
                    s[j * n_ + i] = diff * diff;
                }
            }
        }
    }

    LmlResult evaluate(const GpHyperparams& h, double jitter, bool with_gradient) const {
        const std::size_t n = n_;
        std::vector<double> inv_l2(dim_);
        for (std::size_t d = 0; d < dim_; ++d) {
            inv_l2[d] = 1.0 / (h.length_scales[d] * h.length_scales[d]);
        }
        DenseMatrix kf(n, n);
        for (std::size_t i = 0; i < n; ++i) {
            kf(i, i) = h.signal_variance;
            for (std::size_t j = 0; j < i; ++j) {
                double q = 0.0;
                for (std::size_t d = 0; d < dim_; ++d) {
                    q += sqdiff_[d][i * n + j] * inv_l2[d];
                }
                const double v = h.signal_variance * std::exp(-0.5 * q);
                kf(i, j) = v;
                kf(j, i) = v;
            }
        }
        DenseMatrix ky = kf;
        for (std::size_t i = 0; i < n; ++i) {
            ky(i, i) += h.noise_variance;
        }
        const DenseMatrix l = linalg::cholesky(ky, jitter);
        std::vector<double> r(n);
        for (std::size_t i = 0; i < n; ++i) {
            r[i] = ys_[i] - h.prior_mean;
        }
        const std::vector<double> alpha = linalg::cholesky_solve(l, r);

        LmlResult out;
        double fit = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            fit += r[i] * alpha[i];
        }
        double logdet = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            logdet += std::log(l(i, i));
        }
        out.value = -0.5 * fit - logdet -
                    0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);
        if (!with_gradient) {
            return out;
        }

        // Inverse of the lower factor, then (K_y)^-1 = L^-T L^-1.
        DenseMatrix linv(n, n);
        for (std::size_t j = 0; j < n; ++j) {
            linv(j, j) = 1.0 / l(j, j);
            for (std::size_t i = j + 1; i < n; ++i) {
                double s = 0.0;
                for (std::size_t k = j; k < i; ++k) {
                    s += l(i, k) * linv(k, j);
                }
                linv(i, j) = -s / l(i, i);
            }
        }
        // W = alpha alpha^T - K_y^-1, symmetric; only i >= j is formed.
        DenseMatrix w(n, n);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j <= i; ++j) {
                double kinv = 0.0;
                for (std::size_t k = i; k < n; ++k) {
                    kinv += linv(k, i) * linv(k, j);
                }
                w(i, j) = alpha[i] * alpha[j] - kinv;
            }
        }

        out.gradient.assign(dim_ + 2, 0.0);
        double g_signal = 0.0;
        double g_noise = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            g_signal += 0.5 * w(i, i) * kf(i, i);
            g_noise += 0.5 * w(i, i);
            for (std::size_t j = 0; j < i; ++j) {
                const double wk = w(i, j) * kf(i, j);
                g_signal += wk;
                for (std::size_t d = 0; d < dim_; ++d) {
                    out.gradient[d] += wk * sqdiff_[d][i * n + j] * inv_l2[d];
                }
            }
        }
        out.gradient[dim_] = g_signal;
        out.gradient[dim_ + 1] = g_noise * h.noise_variance;
        return out;
    }

private:
    std::size_t n_;
    std::size_t dim_;
    std::vector<double> ys_;
    std::vector<std::vector<double>> sqdiff_;
};

} // namespace

GpModel::GpModel(std::vector<Point> train_x, std::vector<double> train_y, GpHyperparams hyper,
                 double jitter)
    : train_x_(std::move(train_x)), train_y_(std::move(train_y)), hyper_(std::move(hyper)),
      jitter_(jitter) {
    hyper_.validate();
    check_training_shapes(train_x_, train_y_.size(), hyper_.length_scales.size());
    chol_ = linalg::cholesky(noisy_gram(train_x_, hyper_), jitter_);
    std::vector<double> r(train_y_.size());
    for (std::size_t i = 0; i < r.size(); ++i) {
        r[i] = train_y_[i] - hyper_.prior_mean;
    }
    alpha_ = linalg::cholesky_solve(chol_, r);
    inv_length_sq_.resize(hyper_.length_scales.size());
    for (std::size_t d = 0; d < inv_length_sq_.size(); ++d) {
        inv_length_sq_[d] = 1.0 / (hyper_.length_scales[d] * hyper_.length_scales[d]);
    }
}

GpPrediction GpModel::predict(std::span<const double> x) const {
    const std::size_t dim = inv_length_sq_.size();
    if (x.size() != dim) {
        fail(ErrorCode::DimensionMismatch, "query point dimension differs from the model");
    }
    const std::size_t n = train_y_.size();
    std::vector<double> kstar(n);
    double mean = hyper_.prior_mean;
    for (std::size_t i = 0; i < n; ++i) {
        const Point& xi = train_x_[i];
        double q = 0.0;
        for (std::size_t d = 0; d < dim; ++d) {
            const double diff = x[d] - xi[d];
            q += diff * diff * inv_length_sq_[d];
        }
        kstar[i] = hyper_.signal_variance * std::exp(-0.5 * q);
        mean += kstar[i] * alpha_[i];
    }
    // In-place forward substitution: kstar becomes L^-1 k*.
    double explained = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double s = kstar[i];
        for (std::size_t k = 0; k < i; ++k) {
            s -= chol_(i, k) * kstar[k];
        }
        s /= chol_(i, i);
        kstar[i] = s;
        explained += s * s;
    }
    double variance = hyper_.signal_variance - explained;
    if (variance < 0.0) {
        if (variance < -1e-8 * std::max(1.0, hyper_.signal_variance)) {
            fail(ErrorCode::InternalConsistency,
                 "posterior variance " + std::to_string(variance) + " is negative beyond round-off");
        }
        variance = 0.0;
    }
    return GpPrediction{mean, variance};
}

GpPrediction gp_posterior(const GpModel& model, std::span<const double> x) {
    return model.predict(x);
}

nlohmann::json GpModel::to_json() const {
    nlohmann::json j;
    j["schema"] = "bbo.gp_model/1";
    j["dimension"] = dimension();
    j["hyperparameters"] = {
        {"length_scales", hyper_.length_scales},
        {"signal_variance", hyper_.signal_variance},
        {"noise_variance", hyper_.noise_variance},
        {"prior_mean", hyper_.prior_mean},
    };
    j["jitter"] = jitter_;
    j["train_x"] = train_x_;
    j["train_y"] = train_y_;
    return j;
}

GpModel GpModel::from_json(const nlohmann::json& j) {
    try {
        if (j.at("schema").get<std::string>() != "bbo.gp_model/1") {
            fail(ErrorCode::InvalidArgument, "unsupported GP model schema");
        }
        const auto& h = j.at("hyperparameters");
        GpHyperparams hyper;
        hyper.length_scales = h.at("length_scales").get<std::vector<double>>();
        hyper.signal_variance = h.at("signal_variance").get<double>();
        hyper.noise_variance = h.at("noise_variance").get<double>();
        hyper.prior_mean = h.at("prior_mean").get<double>();
        if (j.at("dimension").get<std::size_t>() != hyper.length_scales.size()) {
            fail(ErrorCode::DimensionMismatch, "dimension field disagrees with length_scales");
        }
        return GpModel(j.at("train_x").get<std::vector<Point>>(),
                       j.at("train_y").get<std::vector<double>>(), std::move(hyper),
                       j.value("jitter", 0.0));
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::InvalidArgument, std::string("malformed GP model JSON: ") + e.what());
    }
}

LmlResult log_marginal_likelihood(const std::vector<Point>& train_x,
                                  std::span<const double> train_y, const GpHyperparams& hyper,
                                  double jitter) {
    hyper.validate();
    check_training_shapes(train_x, train_y.size(), hyper.length_scales.size());
    return LmlWorkspace(train_x, train_y).evaluate(hyper, jitter, true);
}

namespace {

struct LogBox {
    std::vector<double> lo;
    std::vector<double> hi;
};

GpHyperparams from_log(std::span<const double> theta, double prior_mean) {
    GpHyperparams h;
    const std::size_t dim = theta.size() - 2;
    h.length_scales.resize(dim);
    for (std::size_t d = 0; d < dim; ++d) {
        h.length_scales[d] = std::exp(theta[d]);
    }
    h.signal_variance = std::exp(theta[dim]);
    h.noise_variance = std::exp(theta[dim + 1]);
    h.prior_mean = prior_mean;
    return h;
}

std::vector<double> to_log(const GpHyperparams& h) {
    std::vector<double> theta;
    for (double l : h.length_scales) {
        theta.push_back(std::log(l));
    }
    theta.push_back(std::log(h.signal_variance));
    theta.push_back(std::log(std::max(h.noise_variance, 1e-300)));
    return theta;
}

} // namespace

GpModel gp_fit(const Dataset& data, const GpFitConfig& config, RngStream& rng) {
    if (data.size() < 2) {
        fail(ErrorCode::InsufficientData, "fitting needs at least two observations, got " +
                                              std::to_string(data.size()));
    }
    if (config.multistarts == 0 && !config.warm_start) {
        fail(ErrorCode::InvalidArgument, "at least one start is required");
    }
    const std::vector<Point> xs = data.xs();
    const std::vector<double> ys = data.ys();
    const std::size_t dim = xs.front().size();
    for (const auto& x : xs) {
        if (x.size() != dim) {
            fail(ErrorCode::DimensionMismatch, "dataset points differ in dimension");
        }
    }

    double mean = 0.0;
    for (double y : ys) {
        mean += y;
    }
    mean /= static_cast<double>(ys.size());
    double var = 0.0;
    for (double y : ys) {
        var += (y - mean) * (y - mean);
    }
    var /= static_cast<double>(ys.size());
    const double scale = var > 0.0 ? var : 1.0;

    std::vector<double> widths = config.widths;
    if (widths.empty()) {
        widths.assign(dim, 0.0);
        for (std::size_t d = 0; d < dim; ++d) {
            double lo = xs.front()[d];
            double hi = lo;
            for (const auto& x : xs) {
                lo = std::min(lo, x[d]);
                hi = std::max(hi, x[d]);
            }
            widths[d] = hi > lo ? hi - lo : 1.0;
        }
    } else if (widths.size() != dim) {
        fail(ErrorCode::DimensionMismatch, "fit widths differ from data dimension");
    }

    LogBox box;
    LogBox init;
    for (std::size_t d = 0; d < dim; ++d) {
        box.lo.push_back(std::log(1e-3 * widths[d]));
        box.hi.push_back(std::log(1e2 * widths[d]));
        init.lo.push_back(std::log(1e-2 * widths[d]));
        init.hi.push_back(std::log(1e1 * widths[d]));
    }
    box.lo.push_back(std::log(1e-6 * scale));
    box.hi.push_back(std::log(1e4 * scale));
    init.lo.push_back(std::log(1e-2 * scale));
    init.hi.push_back(std::log(1e2 * scale));
    box.lo.push_back(std::log(1e-10 * scale));
    box.hi.push_back(std::log(1.0 * scale));
    init.lo.push_back(std::log(1e-8 * scale));
    init.hi.push_back(std::log(1e-1 * scale));

    const std::size_t p = dim + 2;
    auto project = [&](std::vector<double>& theta) {
        for (std::size_t i = 0; i < p; ++i) {
            theta[i] = std::clamp(theta[i], box.lo[i], box.hi[i]);
        }
    };

    std::vector<std::vector<double>> starts;
    for (std::size_t s = 0; s < config.multistarts; ++s) {
        std::vector<double> theta(p);
        for (std::size_t i = 0; i < p; ++i) {
            theta[i] = rng.uniform(init.lo[i], init.hi[i]);
        }
        starts.push_back(std::move(theta));
    }
    if (config.warm_start) {
        if (config.warm_start->length_scales.size() != dim) {
            fail(ErrorCode::DimensionMismatch, "warm start dimension differs from data");
        }
        starts.push_back(to_log(*config.warm_start));
    }

    if (config.fixed_noise_variance && !(*config.fixed_noise_variance >= 0.0)) {
        fail(ErrorCode::InvalidArgument, "fixed noise variance must be nonnegative");
    }
    auto hyper_of = [&](std::span<const double> theta) {
        GpHyperparams h = from_log(theta, mean);
        if (config.fixed_noise_variance) {
            h.noise_variance = *config.fixed_noise_variance;
        }
        return h;
    };

    const LmlWorkspace workspace(xs, ys);
    auto try_eval = [&](std::span<const double> theta, bool grad) -> std::optional<LmlResult> {
        try {
            LmlResult r = workspace.evaluate(hyper_of(theta), config.jitter, grad);
            if (!std::isfinite(r.value)) {
                return std::nullopt;
            }
            return r;
        } catch (const Error& e) {
            if (e.code() == ErrorCode::NotPositiveDefinite) {
                return std::nullopt;
            }
            throw;
        }
    };

    std::optional<std::vector<double>> best_theta;
    double best_value = -std::numeric_limits<double>::infinity();
    for (auto& theta : starts) {
        project(theta);
        std::optional<LmlResult> cur = try_eval(theta, true);
        if (!cur) {
            continue;
        }
        double step = 0.5;
        bool converged = false;
        for (std::size_t it = 0; it < config.max_iterations && !converged; ++it) {
            std::vector<double> g = cur->gradient;
            for (std::size_t i = 0; i < p; ++i) {
                if ((theta[i] <= box.lo[i] && g[i] < 0.0) || (theta[i] >= box.hi[i] && g[i] > 0.0)) {
                    g[i] = 0.0;
                }
            }
            if (config.fixed_noise_variance) {
                g[dim + 1] = 0.0;
            }
            const double gnorm = linalg::norm2(g);
            if (!(gnorm > 1e-8)) {
                break;
            }
            bool accepted = false;
            while (step > 1e-6) {
                std::vector<double> cand(p);
                double slope = 0.0;
                for (std::size_t i = 0; i < p; ++i) {
                    cand[i] = theta[i] + step * g[i] / gnorm;
                }
                project(cand);
                for (std::size_t i = 0; i < p; ++i) {
                    slope += g[i] * (cand[i] - theta[i]);
                }
                std::optional<LmlResult> next = try_eval(cand, true);
                if (next && next->value > cur->value && next->value >= cur->value + 1e-4 * slope) {
                    const double gain = next->value - cur->value;
                    theta = std::move(cand);
                    cur = std::move(next);
                    step = std::min(2.0 * step, 4.0);
                    accepted = true;
                    converged = gain < 1e-9 * (1.0 + std::abs(cur->value));
                    break;
                }
                step *= 0.5;
            }
            if (!accepted) {
                break;
            }
        }
        if (cur->value > best_value) {
            best_value = cur->value;
            best_theta = theta;
        }
    }
    if (!best_theta) {
        fail(ErrorCode::NotPositiveDefinite, "no hyperparameter start gave a factorizable Gram matrix");
    }
    return GpModel(xs, ys, hyper_of(*best_theta), config.jitter);
}

} // namespace bbo::gp
