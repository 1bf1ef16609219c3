#pragma once

#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

#include "bbo/core.hpp"
#include "bbo/gp.hpp"
#include "bbo/rng.hpp"
#include "bbo/sampler.hpp"

namespace bbo::bayesopt {

enum class Acquisition { ExpectedImprovement, UpperConfidenceBound };

std::string_view to_string(Acquisition a) noexcept;
/// Accepts "ei" / "expected_improvement" and "ucb" / "upper_confidence_bound".
Acquisition acquisition_from_string(std::string_view name);

struct BoConfig {
    std::size_t init_design_size = 5;
    std::size_t iterations = 20;
    Acquisition acquisition = Acquisition::ExpectedImprovement;
    /// EI offset; unset means 0.01 * |best observed value|.
    std::optional<double> xi;
    double ucb_beta = 2.0;
    std::size_t acq_multistarts = 32;
    std::size_t acq_local_steps = 50;
    /// Refit hyperparameters every this many infills; in between the previous
    /// hyperparameters are reused with the new data.
    std::size_t refit_every = 1;
    gp::GpFitConfig fit;

    void validate() const;

    friend bool operator==(const BoConfig& a, const BoConfig& b) {
        return a.init_design_size == b.init_design_size && a.iterations == b.iterations &&
               a.acquisition == b.acquisition && a.xi == b.xi && a.ucb_beta == b.ucb_beta &&
               a.acq_multistarts == b.acq_multistarts && a.acq_local_steps == b.acq_local_steps &&
               a.refit_every == b.refit_every && a.fit.multistarts == b.fit.multistarts &&
               a.fit.max_iterations == b.fit.max_iterations;
    }
};

/// n points with exactly one point per stratum [l + j w / n, l + (j + 1) w / n)
/// in every dimension.
std::vector<Point> latin_hypercube(std::size_t n, const BoxDomain& domain, RngStream& rng);

/// Closed-form expected improvement of a Normal(mean, variance) prediction over
/// `best + xi`; max(mean - best - xi, 0) when variance is zero.
double expected_improvement(double mean, double variance, double best, double xi);

double upper_confidence_bound(double mean, double variance, double beta);

/// Acquisition of `model` at x with the incumbent `best`.
double acquisition_value(const gp::GpModel& model, std::span<const double> x,
                         const BoConfig& config, double best);

struct AcquisitionMaximum {
    Point x;
    double value = 0.0;
    std::size_t probes = 0;
};

/// Multistart coordinate pattern search over the box. Every start is uniform;
/// each is refined for acq_local_steps sweeps (a sweep tries +/- step on each
/// coordinate and halves the step when nothing improves). The result is the
/// best of all probes, lowest probe index on ties. Never calls the fitness.
AcquisitionMaximum maximize_acquisition_detailed(const gp::GpModel& model, const BoxDomain& domain,
                                                 const BoConfig& config, RngStream& rng);

Point maximize_acquisition(const gp::GpModel& model, const BoxDomain& domain,
                           const BoConfig& config, RngStream& rng);

/// Latin hypercube design, then one acquisition maximizer per step.
class BayesOptSampler final : public Sampler {
public:
    explicit BayesOptSampler(BoConfig config);

    [[nodiscard]] std::string_view name() const override { return "bo"; }
    void initialize(const BoxDomain& domain) override;
    std::vector<Point> step(const Dataset& data, RngStream& rng) override;

    [[nodiscard]] const std::optional<gp::GpModel>& last_model() const noexcept { return model_; }
    [[nodiscard]] double last_acquisition_value() const noexcept { return last_acquisition_; }
    [[nodiscard]] const BoConfig& config() const noexcept { return config_; }

private:
    BoConfig config_;
    std::optional<BoxDomain> domain_;
    std::optional<gp::GpHyperparams> hyper_;
    std::optional<gp::GpModel> model_;
    std::size_t infills_ = 0;
    double last_acquisition_ = 0.0;
};

/// Runs init_design_size + iterations evaluations of `f`.
RunTrace bo_run(FitnessFunction& f, const BoxDomain& domain, const BoConfig& config,
                RngStream& rng);

} // namespace bbo::bayesopt
