#include "config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <type_traits>

#include "bbo/error.hpp"

namespace bbo::cli {

using nlohmann::json;

namespace {

/// Reads fields of one JSON object and rejects keys nobody asked for.
class ObjectReader {
public:
    ObjectReader(const json& j, std::string where) : j_(j), where_(std::move(where)) {
        if (!j_.is_object()) {
            throw ConfigError(where_ + ": expected a JSON object");
        }
    }

    template <class T>
    void get(const char* key, T& out) {
        seen_.insert(key);
        auto it = j_.find(key);
        if (it == j_.end()) {
            return;
        }
        out = convert<T>(*it, where_ + "." + key);
    }

    template <class T>
    void get(const char* key, std::optional<T>& out) {
        seen_.insert(key);
        auto it = j_.find(key);
        if (it == j_.end()) {
            return;
        }
        if (it->is_null()) {
            out.reset();
        } else {
            out = convert<T>(*it, where_ + "." + key);
        }
    }

    const json* child(const char* key) {
        seen_.insert(key);
        auto it = j_.find(key);
        return it == j_.end() ? nullptr : &*it;
    }

    [[nodiscard]] const std::string& where() const { return where_; }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it) {
            if (!seen_.contains(it.key())) {
                throw ConfigError(where_ + ": unknown key '" + it.key() + "'");
            }
        }
    }

    template <class T>
    static T convert(const json& v, const std::string& where) {
        if constexpr (std::is_same_v<T, bool>) {
            if (!v.is_boolean()) {
                throw ConfigError(where + ": expected a boolean");
            }
            return v.get<bool>();
        } else if constexpr (std::is_same_v<T, std::string>) {
            if (!v.is_string()) {
                throw ConfigError(where + ": expected a string");
            }
            return v.get<std::string>();
        } else if constexpr (std::is_integral_v<T>) {
            if (v.is_number_unsigned()) {
                return static_cast<T>(v.get<std::uint64_t>());
            }
            throw ConfigError(where + ": expected a nonnegative integer");
        } else if constexpr (std::is_floating_point_v<T>) {
            if (!v.is_number()) {
                throw ConfigError(where + ": expected a number");
            }
            return v.get<double>();
        } else {
            // std::vector<U>
            if (!v.is_array()) {
                throw ConfigError(where + ": expected an array");
            }
            T out;
            for (std::size_t i = 0; i < v.size(); ++i) {
                out.push_back(convert<typename T::value_type>(v[i], where + "[" + std::to_string(i) + "]"));
            }
            return out;
        }
    }

private:
    const json& j_;
    std::string where_;
    std::set<std::string, std::less<>> seen_;
};

json optional_json(const auto& v) {
    return v ? json(*v) : json(nullptr);
}

json common_json(const CommonSettings& c) {
    return json{{"seed", c.seed}, {"out", c.out}, {"jobs", c.jobs}};
}

void read_common(ObjectReader& r, CommonSettings& c) {
    r.get("seed", c.seed);
    r.get("out", c.out);
    r.get("jobs", c.jobs);
    if (c.jobs == 0) {
        throw ConfigError(r.where() + ".jobs: must be at least 1");
    }
}

json settings_json(const AlgorithmSettings& s) {
    json bo{{"init_design_size", optional_json(s.bo_init_design_size)},
            {"acquisition", std::string(bayesopt::to_string(s.bo.acquisition))},
            {"xi", optional_json(s.bo.xi)},
            {"ucb_beta", s.bo.ucb_beta},
            {"acq_multistarts", s.bo.acq_multistarts},
            {"acq_local_steps", s.bo.acq_local_steps},
            {"refit_every", s.bo.refit_every},
            {"fit_multistarts", s.bo.fit.multistarts},
            {"fit_max_iterations", s.bo.fit.max_iterations}};
    json sa{{"initial_temp", s.sa.initial_temp},
            {"cooling_rate", s.sa.cooling_rate},
            {"step_scale", s.sa.step_scale}};
    json ga{{"population", s.ga.population},
            {"crossover_rate", s.ga.crossover_rate},
            {"mutation_rate", s.ga.mutation_rate},
            {"mutation_sigma", s.ga.mutation_sigma},
            {"elitism", s.ga.elitism},
            {"tournament_size", s.ga.tournament_size}};
    json es{{"lambda", optional_json(s.es_lambda)},
            {"mu", optional_json(s.es_mu)},
            {"initial_sigma", s.es_initial_sigma},
            {"covariance_learning_rate", s.es_learning_rate}};
    return json{{"bo", bo}, {"sa", sa}, {"ga", ga}, {"es", es}};
}

void read_settings(const json& j, const std::string& where, AlgorithmSettings& s) {
    ObjectReader r(j, where);
    if (const json* bo = r.child("bo")) {
        ObjectReader b(*bo, where + ".bo");
        b.get("init_design_size", s.bo_init_design_size);
        std::string acquisition(bayesopt::to_string(s.bo.acquisition));
        b.get("acquisition", acquisition);
        try {
            s.bo.acquisition = bayesopt::acquisition_from_string(acquisition);
        } catch (const Error& e) {
            throw ConfigError(where + ".bo.acquisition: " + e.what());
        }
        b.get("xi", s.bo.xi);
        b.get("ucb_beta", s.bo.ucb_beta);
        b.get("acq_multistarts", s.bo.acq_multistarts);
        b.get("acq_local_steps", s.bo.acq_local_steps);
        b.get("refit_every", s.bo.refit_every);
        b.get("fit_multistarts", s.bo.fit.multistarts);
        b.get("fit_max_iterations", s.bo.fit.max_iterations);
        b.finish();
    }
    if (const json* sa = r.child("sa")) {
        ObjectReader a(*sa, where + ".sa");
        a.get("initial_temp", s.sa.initial_temp);
        a.get("cooling_rate", s.sa.cooling_rate);
        a.get("step_scale", s.sa.step_scale);
        a.finish();
    }
    if (const json* ga = r.child("ga")) {
        ObjectReader g(*ga, where + ".ga");
        g.get("population", s.ga.population);
        g.get("crossover_rate", s.ga.crossover_rate);
        g.get("mutation_rate", s.ga.mutation_rate);
        g.get("mutation_sigma", s.ga.mutation_sigma);
        g.get("elitism", s.ga.elitism);
        g.get("tournament_size", s.ga.tournament_size);
        g.finish();
    }
    if (const json* es = r.child("es")) {
        ObjectReader e(*es, where + ".es");
        e.get("lambda", s.es_lambda);
        e.get("mu", s.es_mu);
        e.get("initial_sigma", s.es_initial_sigma);
        e.get("covariance_learning_rate", s.es_learning_rate);
        e.finish();
    }
    r.finish();
    try {
        s.sa.validate();
        s.ga.validate();
        bayesopt::BoConfig probe = s.bo;
        probe.init_design_size = 2;
        probe.iterations = 1;
        probe.validate();
    } catch (const Error& e) {
        throw ConfigError(where + ": " + e.what());
    }
}

json landscape_json(const LandscapeSpec& l) {
    return json{{"name", l.name}, {"dimension", l.dimension}, {"width", optional_json(l.width)}};
}

LandscapeSpec read_landscape(const json& j, const std::string& where) {
    LandscapeSpec l;
    ObjectReader r(j, where);
    r.get("name", l.name);
    r.get("dimension", l.dimension);
    r.get("width", l.width);
    r.finish();
    make_landscape(l); // validates
    return l;
}

json evaluator_json(const EvaluatorSpec& e) {
    return json{{"command", e.command},
                {"lower", e.lower},
                {"upper", e.upper},
                {"timeout_seconds", e.timeout_seconds}};
}

EvaluatorSpec read_evaluator(const json& j, const std::string& where) {
    EvaluatorSpec e;
    ObjectReader r(j, where);
    r.get("command", e.command);
    r.get("lower", e.lower);
    r.get("upper", e.upper);
    r.get("timeout_seconds", e.timeout_seconds);
    r.finish();
    if (e.command.empty()) {
        throw ConfigError(where + ".command: must name an executable");
    }
    if (!(e.timeout_seconds > 0.0)) {
        throw ConfigError(where + ".timeout_seconds: must be positive");
    }
    try {
        make_box_domain(e.lower, e.upper);
    } catch (const Error& err) {
        throw ConfigError(where + ": " + err.what());
    }
    return e;
}

void require_known_algorithm(const std::string& name, const AlgorithmSettings& s,
                             const std::string& where) {
    try {
        make_algorithm(name, s);
    } catch (const ConfigError& e) {
        throw ConfigError(where + ": " + e.what());
    }
}

} // namespace

bench::AlgorithmSpec make_algorithm(const std::string& name, const AlgorithmSettings& settings) {
    if (name == "random") {
        return bench::algorithm_by_name("random");
    }
    if (name == "sa") {
        return {"sa", [c = settings.sa](const bench::Landscape&, std::size_t) {
                    return std::make_unique<meta::SimulatedAnnealingSampler>(c);
                }};
    }
    if (name == "ga") {
        return {"ga", [c = settings.ga](const bench::Landscape&, std::size_t) {
                    return std::make_unique<meta::GeneticAlgorithmSampler>(c);
                }};
    }
    if (name == "es") {
        return {"es", [settings](const bench::Landscape& l, std::size_t) {
                    meta::EsConfig c = meta::EsConfig::defaults_for(l.dimension);
                    if (settings.es_lambda) {
                        c.lambda = *settings.es_lambda;
                        if (!settings.es_mu) {
                            c.mu = std::max<std::size_t>(1, c.lambda / 2);
                        }
                    }
                    if (settings.es_mu) {
                        c.mu = *settings.es_mu;
                    }
                    c.initial_sigma = settings.es_initial_sigma;
                    c.covariance_learning_rate = settings.es_learning_rate;
                    return std::make_unique<meta::EvolutionStrategySampler>(c);
                }};
    }
    if (name == "bo") {
        return {"bo", [settings](const bench::Landscape& l, std::size_t budget) {
                    if (budget < 3) {
                        fail(ErrorCode::InvalidArgument, "bo needs a budget of at least 3");
                    }
                    bayesopt::BoConfig c = settings.bo;
                    c.init_design_size = settings.bo_init_design_size.value_or(
                        std::min(2 * l.dimension + 1, budget - 1));
                    if (c.init_design_size >= budget) {
                        fail(ErrorCode::InvalidArgument, "bo initial design must be smaller than the budget");
                    }
                    c.iterations = budget - c.init_design_size;
                    return std::make_unique<bayesopt::BayesOptSampler>(c);
                }};
    }
    throw ConfigError("unknown algorithm '" + name + "' (expected random, sa, ga, es or bo)");
}

bench::Landscape make_landscape(const LandscapeSpec& spec) {
    try {
        if (spec.width) {
            if (spec.name != "needle") {
                throw ConfigError("width only applies to the needle landscape");
            }
            return bench::needle(spec.dimension, *spec.width);
        }
        return bench::landscape_by_name(spec.name, spec.dimension);
    } catch (const Error& e) {
        throw ConfigError(std::string("landscape: ") + e.what());
    }
}

json to_json(const NfltConfig& c) {
    return json{{"command", "nflt-verify"}, {"common", common_json(c.common)},
                {"m", c.m},                 {"r", c.r},
                {"k", c.k},                 {"class", c.function_class},
                {"policies", c.policies},   {"cap", c.cap}};
}

json to_json(const OptimizeConfig& c) {
    return json{{"command", "optimize"},
                {"common", common_json(c.common)},
                {"algorithm", c.algorithm},
                {"budget", c.budget},
                {"landscape", c.landscape ? landscape_json(*c.landscape) : json(nullptr)},
                {"evaluator", c.evaluator ? evaluator_json(*c.evaluator) : json(nullptr)},
                {"settings", settings_json(c.settings)}};
}

json to_json(const BenchConfig& c) {
    json landscapes = json::array();
    for (const auto& l : c.landscapes) {
        landscapes.push_back(landscape_json(l));
    }
    json comparisons = json::array();
    for (const auto& [a, b] : c.comparisons) {
        comparisons.push_back(json::array({a, b}));
    }
    return json{{"command", "bench"},
                {"common", common_json(c.common)},
                {"algorithms", c.algorithms},
                {"landscapes", landscapes},
                {"runs", c.runs},
                {"budget", c.budget},
                {"stop_at_known_best", c.stop_at_known_best},
                {"comparisons", comparisons},
                {"settings", settings_json(c.settings)}};
}

json to_json(const GpPlotConfig& c) {
    return json{{"command", "gp-plotdata"},
                {"common", common_json(c.common)},
                {"x", c.x},
                {"y", c.y},
                {"data_file", optional_json(c.data_file)},
                {"lower", optional_json(c.lower)},
                {"upper", optional_json(c.upper)},
                {"grid", c.grid},
                {"xi", optional_json(c.xi)},
                {"noise_variance", optional_json(c.noise_variance)},
                {"fit_multistarts", c.fit_multistarts},
                {"fit_max_iterations", c.fit_max_iterations}};
}

namespace {

void read_header(ObjectReader& r, const char* expected, CommonSettings& common) {
    std::string command = expected;
    r.get("command", command);
    if (command != expected) {
        throw ConfigError("config is for '" + command + "', not '" + expected + "'");
    }
    if (const json* c = r.child("common")) {
        ObjectReader cr(*c, "common");
        read_common(cr, common);
        cr.finish();
    }
}

} // namespace

NfltConfig nflt_config_from_json(const json& j) {
    NfltConfig c;
    ObjectReader r(j, "config");
    read_header(r, "nflt-verify", c.common);
    r.get("m", c.m);
    r.get("r", c.r);
    r.get("k", c.k);
    r.get("class", c.function_class);
    r.get("policies", c.policies);
    r.get("cap", c.cap);
    r.finish();
    if (c.m == 0 || c.r == 0) {
        throw ConfigError("m and r must be positive");
    }
    if (c.k == 0 || c.k > c.m) {
        throw ConfigError("k must lie in 1..m");
    }
    if (c.function_class != "full" && c.function_class != "monotone") {
        throw ConfigError("class must be 'full' or 'monotone'");
    }
    if (c.policies.size() < 2) {
        throw ConfigError("at least two policies are needed");
    }
    return c;
}

OptimizeConfig optimize_config_from_json(const json& j) {
    OptimizeConfig c;
    ObjectReader r(j, "config");
    read_header(r, "optimize", c.common);
    r.get("algorithm", c.algorithm);
    r.get("budget", c.budget);
    if (const json* l = r.child("landscape")) {
        c.landscape = l->is_null() ? std::nullopt : std::optional(read_landscape(*l, "landscape"));
    }
    if (const json* e = r.child("evaluator")) {
        c.evaluator = e->is_null() ? std::nullopt : std::optional(read_evaluator(*e, "evaluator"));
        if (c.evaluator && !j.contains("landscape")) {
            c.landscape.reset();
        }
    }
    if (const json* s = r.child("settings")) {
        read_settings(*s, "settings", c.settings);
    }
    r.finish();
    if (c.landscape.has_value() == c.evaluator.has_value()) {
        throw ConfigError("set exactly one of landscape and evaluator");
    }
    if (c.budget == 0) {
        throw ConfigError("budget must be positive");
    }
    require_known_algorithm(c.algorithm, c.settings, "algorithm");
    return c;
}

BenchConfig bench_config_from_json(const json& j) {
    BenchConfig c;
    ObjectReader r(j, "config");
    read_header(r, "bench", c.common);
    r.get("algorithms", c.algorithms);
    if (const json* ls = r.child("landscapes")) {
        if (!ls->is_array()) {
            throw ConfigError("landscapes: expected an array");
        }
        c.landscapes.clear();
        for (std::size_t i = 0; i < ls->size(); ++i) {
            c.landscapes.push_back(read_landscape((*ls)[i], "landscapes[" + std::to_string(i) + "]"));
        }
    }
    r.get("runs", c.runs);
    r.get("budget", c.budget);
    r.get("stop_at_known_best", c.stop_at_known_best);
    if (const json* cmp = r.child("comparisons")) {
        const auto pairs = ObjectReader::convert<std::vector<std::vector<std::string>>>(*cmp, "comparisons");
        c.comparisons.clear();
        for (const auto& p : pairs) {
            if (p.size() != 2) {
                throw ConfigError("comparisons: each entry must be a pair of algorithm names");
            }
            c.comparisons.emplace_back(p[0], p[1]);
        }
    }
    if (const json* s = r.child("settings")) {
        read_settings(*s, "settings", c.settings);
    }
    r.finish();
    if (c.algorithms.empty() || c.landscapes.empty() || c.runs == 0 || c.budget == 0) {
        throw ConfigError("algorithms, landscapes, runs and budget must be nonempty or positive");
    }
    std::set<std::string, std::less<>> names;
    for (const auto& a : c.algorithms) {
        require_known_algorithm(a, c.settings, "algorithms");
        if (!names.insert(a).second) {
            throw ConfigError("algorithms: '" + a + "' listed twice");
        }
    }
    for (const auto& [a, b] : c.comparisons) {
        if (!names.contains(a) || !names.contains(b) || a == b) {
            throw ConfigError("comparisons: pairs must name two distinct configured algorithms");
        }
    }
    return c;
}

GpPlotConfig gp_plot_config_from_json(const json& j) {
    GpPlotConfig c;
    ObjectReader r(j, "config");
    read_header(r, "gp-plotdata", c.common);
    if (const json* xs = r.child("x")) {
        // Accept scalars or one-element points; anything wider is not 1-D.
        if (!xs->is_array()) {
            throw ConfigError("x: expected an array");
        }
        c.x.clear();
        for (const json& v : *xs) {
            if (v.is_array()) {
                if (v.size() != 1 || !v[0].is_number()) {
                    throw ConfigError("x: gp-plotdata needs 1-D inputs");
                }
                c.x.push_back(v[0].get<double>());
            } else if (v.is_number()) {
                c.x.push_back(v.get<double>());
            } else {
                throw ConfigError("x: expected numbers");
            }
        }
    }
    r.get("y", c.y);
    r.get("data_file", c.data_file);
    r.get("lower", c.lower);
    r.get("upper", c.upper);
    r.get("grid", c.grid);
    r.get("xi", c.xi);
    r.get("noise_variance", c.noise_variance);
    r.get("fit_multistarts", c.fit_multistarts);
    r.get("fit_max_iterations", c.fit_max_iterations);
    r.finish();
    if (c.x.size() != c.y.size()) {
        throw ConfigError("x and y must have equal length");
    }
    if (c.grid < 2) {
        throw ConfigError("grid must have at least 2 points");
    }
    if (c.lower && c.upper && !(*c.lower < *c.upper)) {
        throw ConfigError("lower must be below upper");
    }
    if (c.xi && !(*c.xi >= 0.0)) {
        throw ConfigError("xi must be nonnegative");
    }
    if (c.noise_variance && !(*c.noise_variance >= 0.0)) {
        throw ConfigError("noise_variance must be nonnegative");
    }
    if (c.fit_multistarts == 0) {
        throw ConfigError("fit_multistarts must be positive");
    }
    return c;
}

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file '" + path + "'");
    }
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError("cannot parse '" + path + "': " + e.what());
    }
}

} // namespace bbo::cli
