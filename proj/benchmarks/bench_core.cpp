#include <benchmark/benchmark.h>

#include <vector>

#include "tunnelkit/explain.hpp"
#include "tunnelkit/kinetics.hpp"
#include "tunnelkit/models.hpp"
#include "tunnelkit/physics.hpp"
#include "tunnelkit/random.hpp"

using namespace tunnelkit;

namespace {

constexpr double kAmuKg = 1.66053906660e-27;

BarrierSpec glu_like() { return make_eckart(82.6, 82.6 * 0.55, 650.0, 1.00782503207); }

FeatureMatrix random_matrix(std::size_t n, std::uint64_t seed, std::vector<double>& y) {
    Rng rng(seed);
    FeatureMatrix x(n);
    y.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        x(i, 0) = rng.uniform(0.0, 2.0);
        x(i, 1) = rng.uniform(50.0, 1000.0);
        x(i, 2) = rng.uniform(-20.0, 5.0);
        x(i, 3) = rng.uniform(0.0, 0.5);
        y[i] = 2.0 * x(i, 0) + 300.0 / x(i, 1) + 0.01 * x(i, 2) * x(i, 3);
    }
    return x;
}

}  // namespace

static void BM_TransmissionWkb(benchmark::State& state) {
    const auto b = glu_like();
    const double e = 0.7 * b.v_forward;
    for (auto _ : state) benchmark::DoNotOptimize(transmission_wkb(b, 1.00782503207 * kAmuKg, e));
}
BENCHMARK(BM_TransmissionWkb);

static void BM_TransmissionExact(benchmark::State& state) {
    const auto b = glu_like();
    const double e = 0.7 * b.v_forward;
    for (auto _ : state) benchmark::DoNotOptimize(transmission_exact(b, 1.00782503207 * kAmuKg, e));
}
BENCHMARK(BM_TransmissionExact);

static void BM_KappaCurve(benchmark::State& state) {
    const auto b = glu_like();
    const auto grid = temperature_grid(50.0, 1000.0, 1.0);
    const auto mode = state.range(0) == 0 ? TransmissionMode::Exact : TransmissionMode::Wkb;
    for (auto _ : state) benchmark::DoNotOptimize(kappa_curve(b, 1.00782503207 * kAmuKg, grid, mode));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(grid.size()));
}
BENCHMARK(BM_KappaCurve)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

static void BM_FitXgb(benchmark::State& state) {
    std::vector<double> y;
    const auto x = random_matrix(static_cast<std::size_t>(state.range(0)), 1, y);
    Hyperparameters hp = default_hyperparameters(Family::XGB);
    hp["n_trees"] = 50;
    for (auto _ : state) benchmark::DoNotOptimize(fit(Family::XGB, hp, x, y, 1));
}
BENCHMARK(BM_FitXgb)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

static void BM_FitRandomForest(benchmark::State& state) {
    std::vector<double> y;
    const auto x = random_matrix(static_cast<std::size_t>(state.range(0)), 2, y);
    Hyperparameters hp = default_hyperparameters(Family::RandomForest);
    hp["n_trees"] = 50;
    for (auto _ : state) benchmark::DoNotOptimize(fit(Family::RandomForest, hp, x, y, 1));
}
BENCHMARK(BM_FitRandomForest)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

static void BM_ShapleyExact(benchmark::State& state) {
    std::vector<double> y;
    const auto x = random_matrix(2000, 3, y);
    Hyperparameters hp = default_hyperparameters(Family::GBDT);
    hp["n_trees"] = 100;
    const auto model = fit(Family::GBDT, hp, x, y, 1);
    const auto rows = take_rows(x, std::vector<std::size_t>{0, 1, 2, 3, 4, 5, 6, 7, 8, 9});
    std::vector<std::size_t> bg_ids(static_cast<std::size_t>(state.range(0)));
    for (std::size_t i = 0; i < bg_ids.size(); ++i) bg_ids[i] = 100 + i;
    const auto bg = take_rows(x, bg_ids);
    for (auto _ : state) benchmark::DoNotOptimize(shapley_exact(model, rows, bg));
}
BENCHMARK(BM_ShapleyExact)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
