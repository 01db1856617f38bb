// Microbenchmarks for the hot paths: trace generation, curve fitting, the
// discrete-event replay, the admission predictor, and the full placer.

#include <benchmark/benchmark.h>

#include "maaso/distributor.hpp"
#include "maaso/experiment.hpp"
#include "maaso/placer.hpp"
#include "maaso/workload.hpp"

using namespace maaso;

namespace {

struct DeskWorld {
    std::map<std::string, ModelSpec> models = preset::desk_models(1);
    ProfileSet profiles = preset::desk_reference_curves(models);
    ClusterSpec cluster = preset::desk_cluster(8);
    SimParams sim;

    DeskWorld() {
        sim.alpha = 4;
        sim.beta = 0.3;
        sim.gamma_t = 2000;
        sim.gamma_l = 60;
    }

    std::vector<Request> trace(double total) const {
        auto cfg = preset::desk_trace(4, models, total, 600, 2.0, 7);
        return generate_trace(cfg, cluster.time_slice);
    }

    std::vector<Instance> placement() const {
        std::vector<Instance> out;
        out.push_back({0, {"llm-a", tp(2), 16}, {0, 1}, 0});
        out.push_back({1, {"llm-a", tp(2), 16}, {2, 3}, 0});
        out.push_back({2, {"llm-a", dp(), 16}, {4}, 1});
        out.push_back({3, {"llm-a", dp(), 16}, {5}, 1});
        out.push_back({4, {"llm-a", dp(), 16}, {6}, 1});
        out.push_back({5, {"llm-a", dp(), 16}, {7}, 1});
        return out;
    }
};

void BM_GenerateTrace(benchmark::State& state) {
    DeskWorld w;
    auto cfg = preset::desk_trace(4, w.models, static_cast<double>(state.range(0)), 600, 2.0, 7);
    for (auto _ : state) {
        auto trace = generate_trace(cfg, w.cluster.time_slice);
        benchmark::DoNotOptimize(trace);
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_GenerateTrace)->Arg(2000)->Arg(20000);

void BM_FitDecay(benchmark::State& state) {
    DeskWorld w;
    auto samples = preset::desk_samples(w.models);
    std::vector<ProfileSample> one;
    for (const auto& s : samples)
        if (s.strategy == tp(2)) one.push_back(s);
    for (auto _ : state) {
        auto tm = fit_decay_params(one);
        benchmark::DoNotOptimize(tm);
    }
}
BENCHMARK(BM_FitDecay);

void BM_Simulate(benchmark::State& state) {
    DeskWorld w;
    auto trace = w.trace(static_cast<double>(state.range(0)));
    auto instances = w.placement();
    SloAwareDistributor policy({1.1}, true);
    for (auto _ : state) {
        auto m = simulate(instances, trace, policy, w.profiles, w.models, w.cluster, w.sim);
        benchmark::DoNotOptimize(m);
    }
    state.SetItemsProcessed(state.iterations() * static_cast<long>(trace.size()));
}
BENCHMARK(BM_Simulate)->Arg(500)->Arg(2000)->Arg(8000);

void BM_PredictLatency(benchmark::State& state) {
    DeskWorld w;
    Instance inst{0, {"llm-a", tp(2), 16}, {0, 1}, -1};
    const ThroughputModel& tm = w.profiles.at("llm-a", tp(2));
    InstanceView view;
    view.instance = &inst;
    view.curve = &tm;
    view.running_remaining.assign(16, 350.0);
    view.waiting_tokens.assign(static_cast<std::size_t>(state.range(0)), 500.0);
    view.waiting_count = static_cast<int>(state.range(0));
    Request r;
    r.decode_tokens = 400;
    r.deadline = 60;
    for (auto _ : state) {
        auto p = predict_latency(r, view);
        benchmark::DoNotOptimize(p);
    }
}
BENCHMARK(BM_PredictLatency)->Arg(8)->Arg(64)->Arg(512);

void BM_Placer(benchmark::State& state) {
    DeskWorld w;
    auto trace = w.trace(static_cast<double>(state.range(0)));
    for (auto _ : state) {
        auto sol = partition_resources(w.cluster, trace, w.models, preset::desk_strategies(),
                                       preset::desk_batch_grid(), w.profiles, w.sim, {});
        benchmark::DoNotOptimize(sol);
    }
}
BENCHMARK(BM_Placer)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
