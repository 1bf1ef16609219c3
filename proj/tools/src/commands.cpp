#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <memory>
#include <ostream>
#include <sstream>

#include "bbo/bayesopt.hpp"
#include "bbo/error.hpp"
#include "bbo/experiment.hpp"
#include "bbo/gp.hpp"
#include "bbo/nflt.hpp"
#include "evaluator_bridge.hpp"
#include "output.hpp"

namespace bbo::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

/// Library errors raised while checking inputs are configuration errors.
template <class F>
auto as_config(const std::string& what, F&& body) {
    try {
        return body();
    } catch (const Error& e) {
        throw ConfigError(what + ": " + e.what());
    }
}

void write_json(const fs::path& path, const json& j) {
    write_file_atomic(path, j.dump(2) + "\n");
}

json histogram_counts(const std::map<int, std::uint64_t>& m) {
    json out = json::object();
    for (const auto& [value, count] : m) {
        out[std::to_string(value)] = count;
    }
    return out;
}

constexpr std::size_t kMaxListedTraces = 100000;

} // namespace

int cmd_nflt_verify(const NfltConfig& config, std::ostream& log) {
    const auto started = std::chrono::steady_clock::now();
    std::vector<std::unique_ptr<nflt::SearchPolicy>> owned;
    std::vector<const nflt::SearchPolicy*> policies;
    for (const auto& name : config.policies) {
        owned.push_back(as_config("policies", [&] { return nflt::make_policy(name, config.common.seed); }));
        policies.push_back(owned.back().get());
    }
    std::unique_ptr<nflt::FunctionClass> functions = as_config("class", [&]() -> std::unique_ptr<nflt::FunctionClass> {
        if (config.function_class == "monotone") {
            return std::make_unique<nflt::MonotoneClass>(config.m, config.r, config.cap);
        }
        return std::make_unique<nflt::FullClass>(config.m, config.r, config.cap);
    });

    const nflt::NfltReport report = nflt::compare_histograms(policies, *functions, config.k);
    const nflt::SuccessTable success = nflt::compare_on_class(policies, *functions, config.k);
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

    json steps = json::array();
    for (std::size_t j = 1; j <= config.k; ++j) {
        json per_policy = json::array();
        for (std::size_t p = 0; p < policies.size(); ++p) {
            const nflt::TraceHistogram prefix = report.histograms[p].prefix(j);
            json entry{{"policy", report.policies[p]},
                       {"value_at", histogram_counts(prefix.value_at(j))},
                       {"best_by", histogram_counts(prefix.best_by(j))}};
            if (prefix.counts.size() <= kMaxListedTraces) {
                json traces = json::array();
                for (const auto& [trace, count] : prefix.counts) {
                    traces.push_back(json{{"trace", trace}, {"count", count}});
                }
                entry["traces"] = std::move(traces);
            } else {
                entry["traces"] = nullptr;
            }
            per_policy.push_back(std::move(entry));
        }
        steps.push_back(json{{"step", j}, {"histograms", std::move(per_policy)}});
    }
    json counterexample = nullptr;
    if (report.counterexample) {
        json counts = json::object();
        for (std::size_t p = 0; p < report.policies.size(); ++p) {
            counts[report.policies[p]] = report.counterexample->counts[p];
        }
        counterexample = json{{"step", report.counterexample->step},
                              {"trace", report.counterexample->trace},
                              {"counts", counts}};
    }
    json success_json = json::array();
    std::ostringstream csv;
    csv << "policy,step,successes,class_size,fraction\n";
    for (std::size_t p = 0; p < success.policies.size(); ++p) {
        json fractions = json::array();
        for (std::size_t j = 1; j <= success.k; ++j) {
            const double frac = success.fraction(p, j);
            fractions.push_back(frac);
            csv << success.policies[p] << ',' << j << ',' << success.successes[p][j - 1] << ','
                << success.class_size << ',' << format_real(frac) << '\n';
        }
        success_json.push_back(json{{"policy", success.policies[p]},
                                    {"successes", success.successes[p]},
                                    {"fractions", fractions}});
    }
    const char* verdict = report.equal ? "EQUAL" : "NOT_EQUAL";
    const json out{{"class", report.class_description},
                   {"class_size", report.class_size},
                   {"m", report.m},
                   {"r", report.r},
                   {"k", report.k},
                   {"policies", report.policies},
                   {"verdict", verdict},
                   {"derived_equal", report.derived_equal},
                   {"counterexample", counterexample},
                   {"steps", steps},
                   {"success", success_json},
                   {"wall_time_seconds", seconds}};

    const fs::path dir = config.common.out;
    write_json(dir / "nflt_report.json", out);
    write_file_atomic(dir / "nflt_success.csv", csv.str());
    write_json(dir / "config.json", to_json(config));

    log << "class: " << report.class_description << " (" << report.class_size << " functions)\n";
    log << "verdict: " << verdict << '\n';
    for (std::size_t p = 0; p < success.policies.size(); ++p) {
        log << "  " << success.policies[p] << " step-1 success " << success.successes[p][0] << '/'
            << success.class_size << '\n';
    }
    if (report.counterexample) {
        log << "first difference at step " << report.counterexample->step << '\n';
    }
    return report.equal ? kExitOk : kExitNotEqual;
}

namespace {

/// Stand-in landscape describing an external evaluator's box to the samplers.
bench::Landscape external_problem(const EvaluatorSpec& e) {
    const double inf = std::numeric_limits<double>::infinity();
    return bench::Landscape{"external", e.lower.size(), make_box_domain(e.lower, e.upper), inf, inf, {}, {}};
}

} // namespace

int cmd_optimize(const OptimizeConfig& config, std::ostream& log) {
    const bench::AlgorithmSpec algorithm = make_algorithm(config.algorithm, config.settings);
    std::optional<bench::Landscape> landscape;
    if (config.landscape) {
        landscape = make_landscape(*config.landscape);
    }
    const bench::Landscape problem = landscape ? *landscape : external_problem(*config.evaluator);
    std::unique_ptr<Sampler> sampler =
        as_config("algorithm", [&] { return algorithm.make(problem, config.budget); });
    as_config("algorithm", [&] {
        sampler->initialize(problem.domain);
        return 0;
    });

    FitnessFunction f = landscape ? landscape->fitness(config.budget)
                                  : make_external_fitness(*config.evaluator, config.budget);
    RngStream rng(config.common.seed);
    const RunTrace trace = run_sampler(*sampler, f, rng, RunOptions{config.budget, std::nullopt});

    const std::size_t n = problem.dimension;
    std::ostringstream csv;
    csv << "iteration";
    for (std::size_t i = 0; i < n; ++i) {
        csv << ",x" << i;
    }
    csv << ",y,best_so_far\n";
    const auto& records = trace.dataset.records();
    for (std::size_t t = 0; t < records.size(); ++t) {
        csv << (t + 1);
        for (double v : records[t].x) {
            csv << ',' << format_real(v);
        }
        csv << ',' << format_real(records[t].y) << ',' << format_real(trace.best_so_far[t]) << '\n';
    }
    const Observation& best = trace.best_observation();
    json summary{{"algorithm", config.algorithm},
                 {"problem", problem.name},
                 {"dimension", n},
                 {"seed", config.common.seed},
                 {"budget", config.budget},
                 {"evaluations", trace.size()},
                 {"best", best.y},
                 {"best_x", best.x},
                 {"clamped_proposals", trace.clamped_proposals}};
    if (landscape) {
        const auto hit = trace.evaluations_to(landscape->threshold);
        summary["known_best"] = landscape->known_best;
        summary["threshold"] = landscape->threshold;
        summary["evals_to_threshold"] = hit ? json(*hit) : json(nullptr);
    }

    const fs::path dir = config.common.out;
    write_file_atomic(dir / "trace.csv", csv.str());
    write_json(dir / "summary.json", summary);
    write_json(dir / "config.json", to_json(config));
    log << config.algorithm << " on " << problem.name << " (d=" << n << "): best "
        << format_real(best.y) << " after " << trace.size() << " evaluations\n";
    return kExitOk;
}

namespace {

const char* regime_of(const std::string& landscape) {
    if (landscape == "sphere") {
        return "prior-match";
    }
    if (landscape == "needle" || landscape == "step") {
        return "prior-mismatch";
    }
    return "rugged";
}

} // namespace

int cmd_bench(const BenchConfig& config, std::ostream& log) {
    std::vector<bench::AlgorithmSpec> algorithms;
    for (const auto& name : config.algorithms) {
        algorithms.push_back(make_algorithm(name, config.settings));
    }
    std::vector<bench::Landscape> landscapes;
    for (const auto& spec : config.landscapes) {
        landscapes.push_back(make_landscape(spec));
        for (std::size_t i = 0; i + 1 < landscapes.size(); ++i) {
            if (landscapes[i].name == landscapes.back().name &&
                landscapes[i].dimension == landscapes.back().dimension) {
                throw ConfigError("landscapes: '" + spec.name + "' listed twice for d=" +
                                  std::to_string(spec.dimension));
            }
        }
    }
    for (const auto& a : algorithms) {
        for (const auto& l : landscapes) {
            as_config("algorithm " + a.name, [&] {
                a.make(l, config.budget)->initialize(l.domain);
                return 0;
            });
        }
    }
    std::vector<std::uint64_t> seeds;
    for (std::size_t i = 0; i < config.runs; ++i) {
        seeds.push_back(derive_seed(config.common.seed, i));
    }
    bench::ExperimentOptions options;
    options.budget = config.budget;
    options.jobs = config.common.jobs;
    options.stop_at_known_best = config.stop_at_known_best;
    const std::vector<bench::RunResult> results =
        bench::run_experiment(algorithms, landscapes, seeds, options);

    std::ostringstream csv;
    csv << "algorithm,landscape,dimension,seed,evals_to_threshold,final_best\n";
    for (const auto& r : results) {
        csv << r.algorithm << ',' << r.landscape << ',' << r.dimension << ',' << r.seed << ',';
        if (r.evals_to_threshold) {
            csv << *r.evals_to_threshold;
        } else {
            csv << "DNF";
        }
        csv << ',' << format_real(r.final_best) << '\n';
    }

    json cells = json::array();
    for (const auto& c : bench::summarize(results, config.budget)) {
        cells.push_back(json{{"algorithm", c.algorithm},
                             {"landscape", c.landscape},
                             {"dimension", c.dimension},
                             {"median_evals_to_threshold", c.evals.median},
                             {"status", c.evals.dnf_majority ? "DNF-majority" : "ok"},
                             {"successes", c.evals.successes},
                             {"runs", c.evals.runs},
                             {"median_final_best", c.median_final_best}});
    }

    std::vector<std::pair<std::string, std::string>> pairs = config.comparisons;
    if (pairs.empty()) {
        const bool has_random =
            std::find(config.algorithms.begin(), config.algorithms.end(), "random") != config.algorithms.end();
        for (std::size_t i = 0; i < config.algorithms.size(); ++i) {
            for (std::size_t j = i + 1; j < config.algorithms.size(); ++j) {
                const auto& a = config.algorithms[i];
                const auto& b = config.algorithms[j];
                if (!has_random) {
                    pairs.emplace_back(a, b);
                } else if (b == "random") {
                    pairs.emplace_back(a, b);
                } else if (a == "random") {
                    pairs.emplace_back(b, a);
                }
            }
        }
    }
    // Paired costs per (algorithm, landscape, dimension), in seed order.
    std::map<std::tuple<std::string, std::string, std::size_t>, std::map<std::uint64_t, double>> costs;
    for (const auto& r : results) {
        costs[{r.algorithm, r.landscape, r.dimension}][r.seed] = bench::evals_or_penalty(r, config.budget);
    }
    json comparisons = json::array();
    for (const auto& l : landscapes) {
        for (const auto& [a, b] : pairs) {
            std::vector<double> ca;
            std::vector<double> cb;
            for (std::uint64_t s : seeds) {
                ca.push_back(costs[{a, l.name, l.dimension}][s]);
                cb.push_back(costs[{b, l.name, l.dimension}][s]);
            }
            const bench::SignTest t = bench::sign_test(ca, cb);
            const bool a_wins = bench::significantly_better(t);
            const bool b_wins = t.p_value <= 0.05 && t.b_better > t.a_better;
            const std::string verdict =
                a_wins ? a + " significantly better" : b_wins ? b + " significantly better" : "no significant difference";
            comparisons.push_back(json{{"landscape", l.name},
                                       {"dimension", l.dimension},
                                       {"regime", regime_of(l.name)},
                                       {"a", a},
                                       {"b", b},
                                       {"a_better", t.a_better},
                                       {"b_better", t.b_better},
                                       {"ties", t.ties},
                                       {"p_value", t.p_value},
                                       {"a_significantly_better", a_wins},
                                       {"verdict", verdict}});
            log << l.name << "(d=" << l.dimension << ") " << a << " vs " << b << ": " << t.a_better << '-'
                << t.b_better << " (ties " << t.ties << "), p=" << format_real(t.p_value) << ", " << verdict
                << '\n';
        }
    }
    const json summary{{"budget", config.budget},
                       {"runs", config.runs},
                       {"master_seed", config.common.seed},
                       {"dnf_counts_as", config.budget + 1},
                       {"cells", cells},
                       {"comparisons", comparisons}};

    const fs::path dir = config.common.out;
    write_file_atomic(dir / "results.csv", csv.str());
    write_json(dir / "summary.json", summary);
    write_json(dir / "config.json", to_json(config));
    log << results.size() << " runs written to " << (dir / "results.csv").string() << '\n';
    return kExitOk;
}

namespace {

void load_plot_data(const GpPlotConfig& config, std::vector<double>& xs, std::vector<double>& ys) {
    xs = config.x;
    ys = config.y;
    if (!config.data_file) {
        return;
    }
    std::ifstream in(*config.data_file);
    if (!in) {
        throw ConfigError("cannot open data file '" + *config.data_file + "'");
    }
    xs.clear();
    ys.clear();
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) {
            line.erase(hash);
        }
        std::istringstream fields(line);
        std::vector<double> row;
        std::string token;
        while (fields >> token) {
            char* end = nullptr;
            const double v = std::strtod(token.c_str(), &end);
            if (end == token.c_str() || *end != '\0') {
                throw ConfigError("data file line " + std::to_string(lineno) + ": '" + token + "' is not a number");
            }
            row.push_back(v);
        }
        if (row.empty()) {
            continue;
        }
        if (row.size() != 2) {
            throw ConfigError("data file line " + std::to_string(lineno) +
                              ": gp-plotdata needs 1-D inputs (rows of 'x y')");
        }
        xs.push_back(row[0]);
        ys.push_back(row[1]);
    }
}

} // namespace

int cmd_gp_plotdata(const GpPlotConfig& config, std::ostream& log) {
    std::vector<double> xs;
    std::vector<double> ys;
    load_plot_data(config, xs, ys);
    if (xs.size() < 2) {
        throw ConfigError("gp-plotdata needs at least two data points");
    }
    const auto [min_it, max_it] = std::minmax_element(xs.begin(), xs.end());
    const double lo = config.lower.value_or(*min_it);
    const double hi = config.upper.value_or(*max_it);
    const BoxDomain domain = as_config("plot range", [&] { return make_box_domain({lo}, {hi}); });

    Dataset data;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        data.append(Point{xs[i]}, ys[i]);
    }
    gp::GpFitConfig fit;
    fit.multistarts = config.fit_multistarts;
    fit.max_iterations = config.fit_max_iterations;
    fit.widths = {hi - lo};
    fit.fixed_noise_variance = config.noise_variance;
    if (config.noise_variance && *config.noise_variance == 0.0) {
        // Interpolating fit: a tiny diagonal keeps near-duplicate inputs factorizable.
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
        fit.jitter = 1e-10 * (var > 0.0 ? var : 1.0);
    }
    RngStream rng(config.common.seed);
    const gp::GpModel model = gp::gp_fit(data, fit, rng);

    bayesopt::BoConfig acq;
    acq.xi = config.xi;
    const double best = *std::max_element(ys.begin(), ys.end());
    const double xi = config.xi.value_or(0.01 * std::abs(best));

    std::ostringstream rows;
    double grid_best_x = lo;
    double grid_best_ei = -1.0;
    for (std::size_t i = 0; i < config.grid; ++i) {
        const double x = i + 1 == config.grid ? hi : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(config.grid - 1);
        const gp::GpPrediction p = model.predict(std::span<const double>(&x, 1));
        const double sd = std::sqrt(p.variance);
        const double ei = bayesopt::expected_improvement(p.mean, p.variance, best, xi);
        if (ei > grid_best_ei) {
            grid_best_ei = ei;
            grid_best_x = x;
        }
        rows << format_real(x) << ' ' << format_real(p.mean) << ' ' << format_real(p.mean - 2.0 * sd) << ' '
             << format_real(p.mean + 2.0 * sd) << ' ' << format_real(ei) << '\n';
    }
    const bayesopt::AcquisitionMaximum found = bayesopt::maximize_acquisition_detailed(model, domain, acq, rng);
    double x_star = found.x[0];
    double ei_star = found.value;
    if (grid_best_ei > ei_star) {
        x_star = grid_best_x;
        ei_star = grid_best_ei;
    }

    const gp::GpHyperparams& h = model.hyper();
    std::ostringstream out;
    out << "# columns: x mean lower upper ei (lower/upper = mean -/+ 2 sd)\n";
    out << "# x_star " << format_real(x_star) << " ei " << format_real(ei_star) << '\n';
    out << "# length_scale " << format_real(h.length_scales[0]) << " signal_variance "
        << format_real(h.signal_variance) << " noise_variance " << format_real(h.noise_variance)
        << " prior_mean " << format_real(h.prior_mean) << '\n';
    out << rows.str();

    const fs::path dir = config.common.out;
    write_file_atomic(dir / "gp_plot.dat", out.str());
    write_json(dir / "gp_model.json", model.to_json());
    write_json(dir / "config.json", to_json(config));
    log << "x* = " << format_real(x_star) << " (EI " << format_real(ei_star) << "), " << config.grid
        << " grid rows written\n";
    return kExitOk;
}

int run_guarded(const std::function<int()>& body, std::ostream& err) {
    try {
        return body();
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        switch (e.code()) {
        case ErrorCode::EvaluatorTimeout:
        case ErrorCode::EvaluatorProtocol:
            return kExitEvaluator;
        case ErrorCode::ClassTooLarge:
            return kExitConfig;
        default:
            return kExitInternal;
        }
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitInternal;
    }
}

} // namespace bbo::cli
