#include <benchmark/benchmark.h>

#include <cmath>

#include "bbo/bayesopt.hpp"
#include "bbo/gp.hpp"
#include "bbo/linalg.hpp"
#include "bbo/nflt.hpp"

namespace {

std::vector<bbo::Point> random_points(std::size_t n, std::size_t d, bbo::RngStream& rng) {
    std::vector<bbo::Point> xs(n, bbo::Point(d));
    for (auto& x : xs) {
        for (auto& v : x) {
            v = rng.uniform();
        }
    }
    return xs;
}

bbo::gp::GpHyperparams hyper(std::size_t d) {
    bbo::gp::GpHyperparams h;
    h.length_scales.assign(d, 0.3);
    h.noise_variance = 1e-6;
    return h;
}

void BM_Cholesky(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    bbo::RngStream rng(1);
    const auto k = bbo::gp::kernel_matrix(random_points(n, 3, rng), hyper(3));
    for (auto _ : state) {
        benchmark::DoNotOptimize(bbo::linalg::cholesky(k, 1e-8));
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Cholesky)->RangeMultiplier(2)->Range(16, 256)->Complexity(benchmark::oNCubed);

void BM_LogMarginalLikelihood(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    bbo::RngStream rng(2);
    const auto xs = random_points(n, 2, rng);
    std::vector<double> ys;
    for (const auto& x : xs) {
        ys.push_back(std::sin(5.0 * x[0]) * x[1]);
    }
    const auto h = hyper(2);
    for (auto _ : state) {
        benchmark::DoNotOptimize(bbo::gp::log_marginal_likelihood(xs, ys, h));
    }
}
BENCHMARK(BM_LogMarginalLikelihood)->Arg(20)->Arg(60)->Arg(120);

void BM_MaximizeAcquisition(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    bbo::RngStream rng(3);
    const auto xs = random_points(n, 2, rng);
    std::vector<double> ys;
    for (const auto& x : xs) {
        ys.push_back(-(x[0] - 0.3) * (x[0] - 0.3) - (x[1] - 0.6) * (x[1] - 0.6));
    }
    const bbo::gp::GpModel model(xs, ys, hyper(2));
    const bbo::BoxDomain domain = bbo::BoxDomain::cube(2, 0.0, 1.0);
    for (auto _ : state) {
        bbo::RngStream r(4);
        benchmark::DoNotOptimize(bbo::bayesopt::maximize_acquisition(model, domain, bbo::bayesopt::BoConfig{}, r));
    }
}
BENCHMARK(BM_MaximizeAcquisition)->Arg(10)->Arg(40);

void BM_VerifyNflt(benchmark::State& state) {
    const auto m = static_cast<std::size_t>(state.range(0));
    const bbo::nflt::LexicographicPolicy lex;
    const bbo::nflt::ReversePolicy rev;
    const bbo::nflt::ShuffledPolicy shuf(1);
    const bbo::nflt::SearchPolicy* policies[] = {&lex, &rev, &shuf};
    for (auto _ : state) {
        benchmark::DoNotOptimize(bbo::nflt::verify_nflt(policies, m, 3, m));
    }
}
BENCHMARK(BM_VerifyNflt)->DenseRange(4, 7);

} // namespace

BENCHMARK_MAIN();
