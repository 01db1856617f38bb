#pragma once

#include <limits>

#include "maaso/simulator.hpp"

namespace maaso {

/// Requests with slo_factor below theta_star are throughput-oriented (strict
/// deadlines, sub-cluster 0); the rest are latency-tolerant (sub-cluster 1).
/// The boundary goes latency-tolerant.
struct SloSplit {
    double theta_star = 1.1;
    int side(const Request& r) const { return r.slo_factor < theta_star ? 0 : 1; }
};

inline int map_subcluster(const Request& r, const SloSplit& split) { return split.side(r); }

struct LatencyPrediction {
    double queue_wait = 0;  // L_q
    double decode = 0;      // L_d
};

/// Worst-case latency prediction for admitting `r` on the viewed instance.
/// Decode uses the saturated rate F(B, B). The queue wait is the exact
/// admission time of `r` when the instance drains FIFO at that saturated
/// rate; actual rates are never below it, so the prediction upper-bounds the
/// real wait. On a queue of identical requests this reduces to
/// ceil(position / B) * L_d waves. The drain stops early once the wait
/// provably exceeds `wait_budget` (the returned queue_wait is then a lower
/// bound that already disqualifies the instance).
LatencyPrediction predict_latency(const Request& r, const InstanceView& view,
                                  double wait_budget = std::numeric_limits<double>::infinity());

/// SLO-aware selection among `candidates` (indices into `views`): keep the
/// instances whose worst-case prediction still meets the deadline, then pick
/// the shortest queue, ties to the lowest instance id. No capable instance
/// means rejection ("overflow"); an empty candidate set means "no-instance".
RoutingDecision assign_instance(const Request& r, const std::vector<InstanceView>& views,
                                const std::vector<std::size_t>& candidates, double clock);

/// The three-step SLO-aware distributor: sub-cluster mapping, capability
/// filtering with overflow protection, shortest-queue selection. With
/// `partitioned` false the sub-cluster step is skipped (used when scoring a
/// single sub-cluster's deployment).
class SloAwareDistributor : public RoutingPolicy {
public:
    explicit SloAwareDistributor(SloSplit split = {}, bool partitioned = true)
        : split_(split), partitioned_(partitioned) {}
    RoutingDecision route(const Request& r, const std::vector<InstanceView>& views,
                          double clock) const override;

private:
    SloSplit split_;
    bool partitioned_;
};

/// Load-balanced baseline: shortest queue among the model's instances, no
/// admission control, no sub-clusters. Makes no latency prediction (the
/// decision record carries the worst-case decode time only).
class ShortestQueuePolicy : public RoutingPolicy {
public:
    RoutingDecision route(const Request& r, const std::vector<InstanceView>& views,
                          double clock) const override;
    bool needs_queue_contents() const override { return false; }
};

}  // namespace maaso
