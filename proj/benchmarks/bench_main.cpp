#include <benchmark/benchmark.h>

#include <random>

#include "kdetl/hc.hpp"
#include "kdetl/kde.hpp"
#include "kdetl/rcot.hpp"
#include "kdetl/synthetic.hpp"

using namespace kdetl;

namespace {

Eigen::MatrixXd gaussian(Eigen::Index rows, Eigen::Index cols, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n;
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
    return m;
}

void BM_KdeLogpdf(benchmark::State& state) {
    const auto n = state.range(0);
    const auto d = state.range(1);
    const auto model = KdeModel::fit(gaussian(n, d, 1));
    const auto query = gaussian(1024, d, 2);
    for (auto _ : state) benchmark::DoNotOptimize(model.logpdf(query));
    state.SetItemsProcessed(state.iterations() * n * 1024);
}
BENCHMARK(BM_KdeLogpdf)->Args({500, 1})->Args({500, 3})->Args({3000, 3})->Args({3000, 6});

void BM_Rcot(benchmark::State& state) {
    const auto n = state.range(0);
    const auto x = gaussian(n, 1, 3);
    const auto y = gaussian(n, 1, 4);
    const auto z = gaussian(n, state.range(1), 5);
    RcotConfig cfg;
    cfg.seed = Seed{6};
    for (auto _ : state) benchmark::DoNotOptimize(rcot(x.col(0), y.col(0), z, cfg));
}
BENCHMARK(BM_Rcot)->Args({500, 0})->Args({500, 2})->Args({3000, 2})->Args({3000, 5});

void BM_CvScore(benchmark::State& state) {
    const auto data = sample(build_spbn(1), static_cast<std::size_t>(state.range(0)), Seed{7});
    const auto g = build_spbn(1).dag;
    const auto folds = kfold_indices(data.rows(), 5, Seed{8});
    for (auto _ : state) benchmark::DoNotOptimize(cv_score(data, g, folds));
}
BENCHMARK(BM_CvScore)->Arg(100)->Arg(500)->Arg(1000);

}  // namespace

BENCHMARK_MAIN();
