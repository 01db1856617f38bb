#pragma once

// Shared synthetic setups for the test suites. Everything here is tiny and
// deterministic.

#include <map>
#include <random>
#include <string>
#include <vector>

#include "maaso/distributor.hpp"
#include "maaso/model.hpp"
#include "maaso/profiler.hpp"
#include "maaso/simulator.hpp"

namespace fixtures {

inline maaso::ClusterSpec cluster(int gpus, double time_slice = 0.05,
                                  double gpu_memory = 16e9) {
    maaso::ClusterSpec c;
    c.gpu_count = gpus;
    c.gpu_memory_bytes = gpu_memory;
    c.time_slice = time_slice;
    return c;
}

/// Model with generous memory so placement tests are not memory-bound unless
/// they choose to be.
inline maaso::ModelSpec model(const std::string& id,
                              const std::vector<maaso::ParallelismStrategy>& strategies) {
    maaso::ModelSpec m;
    m.id = id;
    m.weight_bytes = 1e9;
    for (const auto& p : strategies) {
        m.baseline_throughput[p] = 1.0;  // profiles carry real rates
        m.memory_per_gpu[p] = 2e9;
        m.kv_bytes_per_slot[p] = 0;
    }
    return m;
}

inline maaso::ThroughputModel curve(const std::string& model,
                                    const maaso::ParallelismStrategy& strategy, double t0,
                                    double delta, double epsilon = 1.0) {
    maaso::ThroughputModel tm;
    tm.model = model;
    tm.strategy = strategy;
    tm.t0 = t0;
    tm.delta = delta;
    tm.epsilon = epsilon;
    return tm;
}

inline maaso::Request request(std::int64_t id, const std::string& model, double arrival,
                              double tokens, double slo_factor, double time_slice) {
    maaso::Request r;
    r.id = id;
    r.model = model;
    r.arrival = arrival;
    r.decode_tokens = tokens;
    r.slo_factor = slo_factor;
    r.deadline = maaso::derive_deadline(tokens, slo_factor, time_slice);
    return r;
}

inline maaso::Instance instance(int id, const std::string& model,
                                const maaso::ParallelismStrategy& strategy, int batch,
                                int first_gpu, int group = -1) {
    maaso::Instance inst;
    inst.id = id;
    inst.config = {model, strategy, batch};
    inst.group = group;
    for (int d = 0; d < strategy.degree; ++d) inst.gpus.push_back(first_gpu + d);
    return inst;
}

/// Builds an InstanceView detached from any simulation, for distributor
/// tests. Remaining tokens / waiting tokens given directly.
struct DetachedView {
    maaso::Instance inst;
    maaso::ThroughputModel tm;
    maaso::InstanceView view;

    DetachedView(maaso::Instance i, maaso::ThroughputModel curve,
                 std::vector<double> running, std::vector<double> waiting)
        : inst(std::move(i)), tm(std::move(curve)) {
        view.instance = &inst;
        view.curve = &tm;
        view.running_remaining = std::move(running);
        view.waiting_tokens = std::move(waiting);
        view.waiting_count = static_cast<int>(view.waiting_tokens.size());
    }
    DetachedView(const DetachedView&) = delete;
};

}  // namespace fixtures
