#include "maaso/distributor.hpp"

#include <algorithm>
#include <queue>

namespace maaso {

LatencyPrediction predict_latency(const Request& r, const InstanceView& view,
                                  double wait_budget) {
    int batch = view.batch();
    double worst_rate = eval_throughput(*view.curve, batch, batch);
    LatencyPrediction p;
    p.decode = r.decode_tokens / worst_rate;
    if (view.has_free_slot()) return p;  // admitted immediately

    // FIFO drain at the saturated rate: slot free times start from the
    // running remainders, each queued request ahead of r occupies the
    // earliest slot for its own worst-case decode time. The earliest free
    // time never decreases as the queue drains, so the budget check can
    // stop early.
    std::priority_queue<double, std::vector<double>, std::greater<>> free_at;
    for (double rem : view.running_remaining) free_at.push(rem / worst_rate);
    for (double tokens : view.waiting_tokens) {
        double t = free_at.top();
        if (t > wait_budget) {
            p.queue_wait = t;
            return p;
        }
        free_at.pop();
        free_at.push(t + tokens / worst_rate);
    }
    p.queue_wait = free_at.top();
    return p;
}

RoutingDecision assign_instance(const Request& r, const std::vector<InstanceView>& views,
                                const std::vector<std::size_t>& candidates, double clock) {
    RoutingDecision d;
    if (candidates.empty()) {
        d.reject_reason = "no-instance";
        return d;
    }

    double pending = std::max(clock - r.arrival, 0.0);
    std::size_t best = views.size();
    std::size_t shortest = views.size();  // fallback for the rejection record
    for (std::size_t idx : candidates) {
        const InstanceView& v = views[idx];
        auto better_queue = [&](std::size_t lhs, std::size_t rhs) {
            if (rhs >= views.size()) return true;
            int lq = views[lhs].queue_length(), rq = views[rhs].queue_length();
            if (lq != rq) return lq < rq;
            return views[lhs].instance->id < views[rhs].instance->id;
        };
        if (better_queue(idx, shortest)) shortest = idx;

        LatencyPrediction p = predict_latency(r, v, r.deadline - pending);
        if (pending + p.queue_wait + p.decode <= r.deadline + 1e-9) {
            if (better_queue(idx, best)) best = idx;
        }
    }

    if (best < views.size()) {
        LatencyPrediction p = predict_latency(r, views[best]);
        d.assigned = true;
        d.instance_index = static_cast<int>(best);
        d.predicted_queue_wait = p.queue_wait;
        d.predicted_decode = p.decode;
    } else {
        d.reject_reason = "overflow";
        if (shortest < views.size()) {
            LatencyPrediction p = predict_latency(r, views[shortest]);
            d.predicted_queue_wait = p.queue_wait;
            d.predicted_decode = p.decode;
        }
    }
    return d;
}

RoutingDecision SloAwareDistributor::route(const Request& r,
                                           const std::vector<InstanceView>& views,
                                           double clock) const {
    int side = split_.side(r);
    std::vector<std::size_t> candidates;
    for (std::size_t i = 0; i < views.size(); ++i) {
        const Instance& inst = *views[i].instance;
        if (inst.config.model != r.model) continue;
        if (partitioned_ && inst.group >= 0 && inst.group != side) continue;
        candidates.push_back(i);
    }
    return assign_instance(r, views, candidates, clock);
}

RoutingDecision ShortestQueuePolicy::route(const Request& r,
                                           const std::vector<InstanceView>& views,
                                           double /*clock*/) const {
    RoutingDecision d;
    std::size_t best = views.size();
    for (std::size_t i = 0; i < views.size(); ++i) {
        if (views[i].instance->config.model != r.model) continue;
        if (best >= views.size() || views[i].queue_length() < views[best].queue_length() ||
            (views[i].queue_length() == views[best].queue_length() &&
             views[i].instance->id < views[best].instance->id))
            best = i;
    }
    if (best >= views.size()) {
        d.reject_reason = "no-instance";
        return d;
    }
    const InstanceView& v = views[best];
    d.assigned = true;
    d.instance_index = static_cast<int>(best);
    d.predicted_decode = r.decode_tokens / eval_throughput(*v.curve, v.batch(), v.batch());
    return d;
}

}  // namespace maaso
