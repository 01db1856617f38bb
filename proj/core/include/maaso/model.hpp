#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace maaso {

// ---------------------------------------------------------------------------
// Parallelism strategies
// ---------------------------------------------------------------------------

enum class StrategyKind { DP, TP, PP };

/// A parallelism strategy in "(type)-(degree)" notation, e.g. "tp-2".
/// DP instances are single-replica, so their degree is always 1.
struct ParallelismStrategy {
    StrategyKind kind = StrategyKind::DP;
    int degree = 1;

    int gpu_count() const { return degree; }

    std::string name() const;
    static ParallelismStrategy parse(const std::string& text);

    friend auto operator<=>(const ParallelismStrategy&, const ParallelismStrategy&) = default;
};

ParallelismStrategy dp();
ParallelismStrategy tp(int degree);
ParallelismStrategy pp(int degree);

// ---------------------------------------------------------------------------
// Models, configs, instances
// ---------------------------------------------------------------------------

/// Static description of a servable LLM: identity, per-strategy baseline
/// throughput and memory footprint. The per-GPU footprint of a deployed
/// instance is memory_per_gpu[P] plus a constant per batch slot
/// (kv_bytes_per_slot[P]), which folds KV-cache growth into a static number.
struct ModelSpec {
    std::string id;
    std::map<ParallelismStrategy, double> baseline_throughput;  // tokens/s at W=1
    std::map<ParallelismStrategy, double> memory_per_gpu;       // bytes
    std::map<ParallelismStrategy, double> kv_bytes_per_slot;    // bytes, per GPU
    double weight_bytes = 0;

    bool supports(const ParallelismStrategy& p) const;
    /// Per-GPU memory use of an instance of this model at (P, batch B).
    double gpu_memory_bytes(const ParallelismStrategy& p, int batch) const;
    /// Throws std::invalid_argument when a strategy's per-GPU memory cannot
    /// hold its shard of the weights.
    void check() const;
};

/// A deployable (parallelism strategy, inference batch size) pair.
struct InstanceConfig {
    std::string model;
    ParallelismStrategy strategy;
    int batch_size = 1;  // max concurrently decoded requests

    friend auto operator<=>(const InstanceConfig&, const InstanceConfig&) = default;
};

inline constexpr int kMaxBatchSize = 256;

/// A placed instance: a config bound to an exclusive GPU set. Runtime queue
/// state lives inside the simulator, which owns it exclusively.
struct Instance {
    int id = 0;
    InstanceConfig config;
    std::vector<int> gpus;   // sorted, disjoint across instances
    int group = -1;          // sub-cluster index assigned by the placer, -1 = none
};

// ---------------------------------------------------------------------------
// Requests and clusters
// ---------------------------------------------------------------------------

/// One inference request. The deadline is relative to arrival and is derived
/// as decode_tokens * slo_factor * time_slice.
struct Request {
    std::int64_t id = 0;
    std::string model;
    double arrival = 0;        // seconds
    double decode_tokens = 0;  // S_r
    double slo_factor = 0;     // theta_r, lower = stricter
    double deadline = 0;       // tau_r, seconds after arrival
    double pending = 0;        // p_r, seconds already spent waiting
};

struct ClusterSpec {
    int gpu_count = 0;
    double gpu_memory_bytes = 0;
    double time_slice = 0;  // theta: single-token decode latency of a dp instance at B=1

    void check() const;
};

/// deadline = S_r * theta_r * theta. Throws std::invalid_argument on
/// non-positive inputs.
double derive_deadline(double decode_tokens, double slo_factor, double time_slice);

/// Fill in Request::deadline for every request.
void derive_deadlines(std::vector<Request>& requests, double time_slice);

// ---------------------------------------------------------------------------
// Placement validation
// ---------------------------------------------------------------------------

enum class ViolationKind {
    GpuShared,        // a GPU appears in two instances
    GpuCountExceeded, // sum of degrees exceeds the cluster
    GpuOutOfRange,    // instance references a GPU id outside the cluster
    DegreeMismatch,   // |gpus| != degree
    MemoryExceeded,   // per-GPU footprint over the GPU's memory
    UnknownModel,
};

struct Violation {
    ViolationKind kind;
    int instance_id = -1;
    std::string detail;
};

struct ValidationResult {
    std::vector<Violation> violations;
    bool ok() const { return violations.empty(); }
};

/// Checks GPU exclusivity, cluster-wide GPU budget and per-GPU memory for a
/// set of placed instances. Never throws; returns a structured report.
ValidationResult validate_placement(const std::vector<Instance>& instances,
                                    const std::map<std::string, ModelSpec>& models,
                                    const ClusterSpec& cluster);

}  // namespace maaso
