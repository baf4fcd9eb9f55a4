#include <benchmark/benchmark.h>

#include <random>

#include "l3inv/neuralnet.hpp"

using namespace l3inv::nn;

namespace {

Matrix random_batch(std::size_t rows, std::size_t cols) {
    std::mt19937_64 gen(5);
    std::normal_distribution<double> n;
    Matrix m(rows, cols);
    for (double& v : m.data()) v = n(gen);
    return m;
}

}  // namespace

static void BM_Forward(benchmark::State& state) {
    const MlpModel model = init_model(MlpConfig{});
    const Matrix x = random_batch(static_cast<std::size_t>(state.range(0)), 100);
    for (auto _ : state) benchmark::DoNotOptimize(forward(model, x));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Forward)->Arg(1)->Arg(32)->Arg(256);

static void BM_TrainStep(benchmark::State& state) {
    MlpModel model = init_model(MlpConfig{});
    AdamState adam = make_adam_state(model);
    const Matrix x = random_batch(32, 100);
    const Matrix t = random_batch(32, 1);
    for (auto _ : state) {
        ForwardCache cache;
        (void)forward(model, x, cache);
        adam_step(model, backward(model, cache, x, t), adam, 1e-4);
    }
    state.SetItemsProcessed(state.iterations() * 32);
}
BENCHMARK(BM_TrainStep);

BENCHMARK_MAIN();
