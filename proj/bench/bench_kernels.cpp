// Serial reference vs OpenMP kernels, plus the grid min-cut solver.
// Run: ./bench/bench_kernels [--benchmark_filter=...]

#include <benchmark/benchmark.h>

#include "pmfseg/energy.hpp"
#include "pmfseg/figures.hpp"
#include "pmfseg/maxflow.hpp"
#include "pmfseg/reference.hpp"
#include "pmfseg/rng.hpp"

using namespace pmfseg;

namespace {

Image noise_image(int w, int h, uint64_t seed) {
    Image img(w, h);
    Rng rng(seed);
    for (float& v : img.data()) v = static_cast<float>(rng.uniform());
    return img;
}

ColorModel toy_color_model() {
    ColorModel cm;
    cm.gamma = 5.0;
    cm.fg_centers = {{0.2, 0.3, 0.4}, {0.8, 0.2, 0.1}, {0.5, 0.5, 0.5}};
    cm.bg_centers = {{0.1, 0.8, 0.3}, {0.9, 0.9, 0.2}, {0.3, 0.1, 0.7}};
    return cm;
}

void bm_contour_map_serial(benchmark::State& state) {
    const Image img = noise_image(state.range(0), state.range(0), 1);
    for (auto _ : state) benchmark::DoNotOptimize(reference::contour_map(img, 0.1));
}

void bm_contour_map_omp(benchmark::State& state) {
    const Image img = noise_image(state.range(0), state.range(0), 1);
    for (auto _ : state) benchmark::DoNotOptimize(contour_map(img, 0.1));
}

void bm_bias_map_serial(benchmark::State& state) {
    const Image img = noise_image(state.range(0), state.range(0), 2);
    const ColorModel cm = toy_color_model();
    for (auto _ : state) benchmark::DoNotOptimize(reference::foreground_bias_map(img, cm));
}

void bm_bias_map_omp(benchmark::State& state) {
    const Image img = noise_image(state.range(0), state.range(0), 2);
    const ColorModel cm = toy_color_model();
    for (auto _ : state) benchmark::DoNotOptimize(foreground_bias_map(img, cm));
}

struct MatchFixture {
    ExemplarLibrary library;
    BinaryMask candidate;
    RunConfig config;

    MatchFixture() {
        library = gen_library(64, 7);
        candidate = library.exemplars[3].mask;
    }
};

void bm_select_exemplars_serial(benchmark::State& state) {
    static const MatchFixture fx;
    for (auto _ : state)
        benchmark::DoNotOptimize(reference::select_exemplars(
            fx.candidate, fx.library, fx.config.epsilon, fx.config.mu, fx.config));
}

void bm_select_exemplars_omp(benchmark::State& state) {
    static const MatchFixture fx;
    for (auto _ : state)
        benchmark::DoNotOptimize(select_exemplars(fx.candidate, fx.library, fx.config.epsilon,
                                                  fx.config.mu, fx.config));
}

void bm_min_cut_grid(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const Image img = noise_image(n, n, 3);
    RunConfig cfg;
    cfg.bias_mode = BiasMode::Uniform;
    SeedSets seeds;
    seeds.foreground = {(n / 2) * n + n / 2};
    seeds.background = {0, n - 1, n * (n - 1), n * n - 1};
    std::vector<double> prior(static_cast<size_t>(n) * n, 0.5);
    const EnergyModel model = build_energy(img, seeds, prior, cfg);
    GridFlowSolver solver(model);
    double lambda = -0.4;
    for (auto _ : state) {
        benchmark::DoNotOptimize(solver.solve(lambda));
        lambda = lambda >= 0.4 ? -0.4 : lambda + 0.1;
    }
}

}  // namespace

BENCHMARK(bm_contour_map_serial)->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_contour_map_omp)->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_bias_map_serial)->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_bias_map_omp)->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_select_exemplars_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_select_exemplars_omp)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_min_cut_grid)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
