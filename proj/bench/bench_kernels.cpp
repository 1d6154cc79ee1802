// Serial reference vs OpenMP kernels: candidate scoring and the loss gradient.
#include <benchmark/benchmark.h>

#include <spdlog/spdlog.h>

#include "occu/pipeline.hpp"

using namespace occu;

namespace {

struct Setup {
    BuildingSeries series;
    CandidatePool pool;
    PoolLogWeights log_weights;
    DisaggregatorParams params;
    PosteriorSeries posterior;
};

const Setup& setup() {
    static const Setup s = [] {
        spdlog::set_level(spdlog::level::warn);
        RunConfig c;
        c.scenario = Scenario::lumped;
        c.simulation.train_days = 60;
        c.simulation.test_days = 1;
        const auto data = prepare_data(c, 1);
        Setup x;
        x.series = data.train;
        x.pool = make_pool(c);
        x.log_weights = PoolLogWeights::from(x.pool);
        double peak = 0.0;
        for (double v : x.series.load) peak = std::max(peak, v);
        x.params = init_params(data.metadata, 24.0, 5.0, peak);
        x.posterior = build_posterior(x.series, x.pool, x.log_weights, x.params, Scenario::lumped,
                                      LevelSet::quartiles(), 32);
        return x;
    }();
    return s;
}

void score_days_bench(benchmark::State& state, Execution exec) {
    const auto& s = setup();
    const LevelSet levels = LevelSet::quartiles();
    for (auto _ : state) {
        benchmark::DoNotOptimize(score_days(s.series, s.pool, s.log_weights, s.params, Scenario::lumped, levels, exec));
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(s.series.days()));
}

void loss_grad_bench(benchmark::State& state, Execution exec) {
    const auto& s = setup();
    const LevelSet levels = LevelSet::quartiles();
    for (auto _ : state) {
        benchmark::DoNotOptimize(beta_nll_loss_grad(s.posterior, s.series, s.params, 0.5, Scenario::lumped, levels, exec));
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(s.series.size()));
}

} // namespace

BENCHMARK_CAPTURE(score_days_bench, serial, Execution::serial)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(score_days_bench, parallel, Execution::parallel)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(loss_grad_bench, serial, Execution::serial)->Unit(benchmark::kMicrosecond);
BENCHMARK_CAPTURE(loss_grad_bench, parallel, Execution::parallel)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
