#include <benchmark/benchmark.h>

#include "l3inv/dataset.hpp"
#include "l3inv/level3_model.hpp"

using namespace l3inv;

static void BM_IntrinsicIds(benchmark::State& state) {
    const device::DeviceParams p;
    double vds = 0.1;
    for (auto _ : state) {
        benchmark::DoNotOptimize(device::intrinsic_ids(p, 12.0, vds));
        vds = vds < 10.0 ? vds + 0.1 : 0.1;
    }
}
BENCHMARK(BM_IntrinsicIds);

static void BM_TransferCurveWithSeriesResistance(benchmark::State& state) {
    const device::DeviceParams p = data::sample_params(data::ParameterRanges{}, 7, 1);
    const VdsGrid grid;
    for (auto _ : state) benchmark::DoNotOptimize(device::transfer_curve(p, 14.0, grid));
    state.SetItemsProcessed(state.iterations() * static_cast<long>(grid.size()));
}
BENCHMARK(BM_TransferCurveWithSeriesResistance);

static void BM_BuildDataset(benchmark::State& state) {
    data::BuildOptions opts;
    opts.threads = 1;
    for (auto _ : state)
        benchmark::DoNotOptimize(data::build_dataset(static_cast<std::size_t>(state.range(0)),
                                                     data::ParameterRanges{}, VdsGrid{},
                                                     device::default_vgs_list(), 3, opts));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_BuildDataset)->Arg(50)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
