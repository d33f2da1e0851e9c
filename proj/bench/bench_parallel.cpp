// Serial (jobs = 1) vs OpenMP (jobs = N) for the parallel kernels.
#include <benchmark/benchmark.h>

#include "aqlock/evaluation.hpp"
#include "aqlock/models/forest.hpp"
#include "aqlock/models/knn.hpp"
#include "aqlock/rng.hpp"
#include "aqlock/similarity.hpp"
#include "aqlock/synth.hpp"

namespace {

using aqlock::Matrix;

const std::vector<aqlock::CityDataset>& cities() {
    static const auto data = aqlock::synth::ingest(aqlock::synth::generate({}));
    return data;
}

const aqlock::SupervisedSet& supervised() {
    static const auto set = aqlock::build_supervised(cities(), aqlock::PollutantKind::NO2);
    return set;
}

void BM_ForestFit(benchmark::State& state) {
    const auto& set = supervised();
    aqlock::models::ForestParams params;
    params.n_trees = 50;
    for (auto _ : state) {
        auto forest = aqlock::models::Forest::fit(set.inputs, set.targets, params, 2, static_cast<int>(state.range(0)));
        benchmark::DoNotOptimize(forest);
    }
}

void BM_Screen(benchmark::State& state) {
    aqlock::ScreenOptions options;
    options.jobs = static_cast<int>(state.range(0));
    for (auto _ : state) {
        auto rows = aqlock::screen_all(cities(), aqlock::PollutantKind::NO2, options);
        benchmark::DoNotOptimize(rows);
    }
}

void BM_KnnPredict(benchmark::State& state) {
    const auto& set = supervised();
    const auto model = aqlock::models::KnnModel::fit(set.inputs, set.targets, {});
    aqlock::SplitMix64 rng(7);
    Matrix queries(4000, aqlock::kInputDim);
    for (Eigen::Index i = 0; i < queries.size(); ++i) queries(i) = rng.uniform();
    for (auto _ : state) {
        auto pred = model.predict(queries, static_cast<int>(state.range(0)));
        benchmark::DoNotOptimize(pred);
    }
}

void BM_Benchmark(benchmark::State& state) {
    std::vector<aqlock::ModelSpec> specs;
    for (auto kind : {aqlock::ModelKind::dtr, aqlock::ModelKind::rfr, aqlock::ModelKind::knn, aqlock::ModelKind::madab}) {
        specs.push_back(aqlock::ModelSpec::defaults(kind));
    }
    aqlock::BenchmarkOptions options;
    options.jobs = static_cast<int>(state.range(0));
    options.keep_models = false;
    for (auto _ : state) {
        auto result = aqlock::run_benchmark(cities(), aqlock::kAllPollutants, specs, options);
        benchmark::DoNotOptimize(result);
    }
}

}  // namespace

BENCHMARK(BM_ForestFit)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Screen)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_KnnPredict)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Benchmark)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
