#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "maaso/model.hpp"
#include "maaso/profiler.hpp"

namespace maaso {

/// Weights and thresholds of the composite serving score
///   score = alpha * phi_s
///         + beta * min(phi_t, gamma_t) / gamma_t
///         + (1 - beta) * max(gamma_l - phi_l, 0) / gamma_l
struct SimParams {
    double alpha = 4.0;
    double beta = 0.3;
    double gamma_t = 1.0;  // tokens/s normalization threshold
    double gamma_l = 1.0;  // seconds normalization threshold
    double time_epsilon = 1e-9;
    /// Rejected requests count against phi_s (they are never met) but are
    /// excluded from the phi_l average.
    bool count_rejected = true;
};

enum class Outcome { Met, Missed, Rejected };

struct RequestRecord {
    std::int64_t id = 0;
    Outcome outcome = Outcome::Rejected;
    int instance = -1;
    double arrival = 0;
    double admission = -1;    // -1 until admitted into a slot
    double first_token = -1;  // admission + one decode step
    double completion = -1;
    double deadline = 0;
    double predicted_queue_wait = 0;
    double predicted_decode = 0;
    std::string reject_reason;
};

struct SimMetrics {
    std::int64_t requests_total = 0;
    std::int64_t requests_met = 0;
    std::int64_t requests_missed = 0;
    std::int64_t requests_rejected = 0;
    std::int64_t requests_admitted = 0;
    double phi_s = 1.0;          // SLO satisfaction ratio; 1.0 for an empty trace
    double phi_t = 0;            // decoded tokens / makespan
    double phi_l = 0;            // mean first-token latency over admitted requests
    double decoded_tokens = 0;
    double makespan = 0;
    std::vector<RequestRecord> records;
};

/// Composite serving score, bounded by [0, alpha + 1]. When no request was
/// admitted (but some existed) the latency term is worth zero: no first token
/// was ever delivered.
double serving_score(const SimMetrics& metrics, const SimParams& params);

/// Read-only snapshot of one instance handed to routing policies.
/// waiting_tokens is populated only for policies that ask for queue contents;
/// waiting_count is always valid.
struct InstanceView {
    const Instance* instance = nullptr;
    const ThroughputModel* curve = nullptr;
    std::vector<double> running_remaining;  // tokens left, one per occupied slot
    std::vector<double> waiting_tokens;     // decode length per queued request, FIFO
    int waiting_count = 0;

    int batch() const { return instance->config.batch_size; }
    int occupied() const { return static_cast<int>(running_remaining.size()); }
    int queue_length() const { return occupied() + waiting_count; }
    bool has_free_slot() const { return occupied() < batch(); }
};

struct RoutingDecision {
    bool assigned = false;
    int instance_index = -1;  // index into the view vector
    std::string reject_reason;
    double predicted_queue_wait = 0;
    double predicted_decode = 0;
};

class RoutingPolicy {
public:
    virtual ~RoutingPolicy() = default;
    virtual RoutingDecision route(const Request& request,
                                  const std::vector<InstanceView>& views,
                                  double clock) const = 0;
    /// Policies that never read slot contents (queue lengths suffice) return
    /// false so the simulator can skip copying queue state into the views.
    virtual bool needs_queue_contents() const { return true; }
};

/// Discrete-event, virtual-slot replay of a request trace on a set of placed
/// instances. Decode progress between events is piecewise-constant at the
/// per-request rate eval_throughput(curve, B, W); rates recompute whenever an
/// instance's workload level changes. Deterministic for fixed inputs.
///
/// Preconditions: the placement validates against (models, cluster) and
/// requests are sorted by arrival. Throws std::invalid_argument otherwise,
/// on requests for unknown models, and on policies returning bad instances.
SimMetrics simulate(const std::vector<Instance>& instances,
                    const std::vector<Request>& requests,
                    const RoutingPolicy& policy,
                    const ProfileSet& profiles,
                    const std::map<std::string, ModelSpec>& models,
                    const ClusterSpec& cluster,
                    const SimParams& params);

/// Per-request record CSV:
/// id,arrival,model,decode_tokens,slo_factor,deadline,outcome,instance,
/// predicted_lq,predicted_ld,admission,first_token,completion
void save_records_csv(const std::string& path, const std::vector<Request>& requests,
                      const SimMetrics& metrics);

}  // namespace maaso
