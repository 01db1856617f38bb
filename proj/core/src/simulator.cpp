#include "maaso/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace maaso {

double serving_score(const SimMetrics& m, const SimParams& p) {
    double t_norm = p.gamma_t > 0 ? std::min(m.phi_t, p.gamma_t) / p.gamma_t : 0.0;
    double l_norm;
    if (m.requests_total > 0 && m.requests_admitted == 0) {
        l_norm = 0.0;  // nothing was ever started, no latency credit
    } else {
        l_norm = p.gamma_l > 0 ? std::max(p.gamma_l - m.phi_l, 0.0) / p.gamma_l : 0.0;
    }
    return p.alpha * m.phi_s + p.beta * t_norm + (1.0 - p.beta) * l_norm;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTokenEps = 1e-6;

struct RunSlot {
    std::size_t req;
    double remaining;  // tokens
};

struct InstanceRuntime {
    const Instance* inst = nullptr;
    const ThroughputModel* curve = nullptr;
    std::vector<RunSlot> running;
    std::deque<std::size_t> waiting;
    double rate = 0;  // per-request tokens/s at the current workload level

    void recompute_rate() {
        rate = eval_throughput(*curve, inst->config.batch_size,
                               static_cast<int>(running.size()));
    }
    double next_completion(double clock) const {
        if (running.empty()) return kInf;
        double min_rem = kInf;
        for (const auto& s : running) min_rem = std::min(min_rem, s.remaining);
        return clock + std::max(min_rem, 0.0) / rate;
    }
};

}  // namespace

SimMetrics simulate(const std::vector<Instance>& instances,
                    const std::vector<Request>& requests,
                    const RoutingPolicy& policy,
                    const ProfileSet& profiles,
                    const std::map<std::string, ModelSpec>& models,
                    const ClusterSpec& cluster,
                    const SimParams& params) {
    auto placement = validate_placement(instances, models, cluster);
    if (!placement.ok())
        throw std::invalid_argument("simulate: placement invalid: " +
                                    placement.violations.front().detail);
    for (std::size_t i = 1; i < requests.size(); ++i) {
        if (requests[i].arrival < requests[i - 1].arrival)
            throw std::invalid_argument("simulate: requests not sorted by arrival");
    }
    for (const auto& r : requests) {
        if (models.count(r.model) == 0)
            throw std::invalid_argument("simulate: request " + std::to_string(r.id) +
                                        " names unknown model " + r.model);
    }

    std::vector<InstanceRuntime> rt(instances.size());
    for (std::size_t i = 0; i < instances.size(); ++i) {
        rt[i].inst = &instances[i];
        rt[i].curve = &profiles.at(instances[i].config.model, instances[i].config.strategy);
        int batch = instances[i].config.batch_size;
        if (eval_throughput(*rt[i].curve, batch, batch) <= 0)
            throw std::invalid_argument("simulate: instance " + std::to_string(instances[i].id) +
                                        " has a non-positive saturated rate");
        rt[i].recompute_rate();
    }

    SimMetrics out;
    out.requests_total = static_cast<std::int64_t>(requests.size());
    out.records.resize(requests.size());
    for (std::size_t i = 0; i < requests.size(); ++i) {
        auto& rec = out.records[i];
        rec.id = requests[i].id;
        rec.arrival = requests[i].arrival;
        rec.deadline = requests[i].deadline;
    }

    const bool want_queue_contents = policy.needs_queue_contents();
    auto build_views = [&]() {
        std::vector<InstanceView> views(rt.size());
        for (std::size_t i = 0; i < rt.size(); ++i) {
            views[i].instance = rt[i].inst;
            views[i].curve = rt[i].curve;
            views[i].running_remaining.reserve(rt[i].running.size());
            for (const auto& s : rt[i].running)
                views[i].running_remaining.push_back(std::max(s.remaining, 0.0));
            views[i].waiting_count = static_cast<int>(rt[i].waiting.size());
            if (want_queue_contents) {
                views[i].waiting_tokens.reserve(rt[i].waiting.size());
                for (std::size_t q : rt[i].waiting)
                    views[i].waiting_tokens.push_back(requests[q].decode_tokens);
            }
        }
        return views;
    };

    double clock = 0;
    std::size_t next_arrival = 0;
    double last_completion = -1;

    auto admit = [&](InstanceRuntime& irt, std::size_t req_idx, int inst_index) {
        irt.running.push_back({req_idx, requests[req_idx].decode_tokens});
        auto& rec = out.records[req_idx];
        rec.admission = clock;
        rec.first_token = clock + cluster.time_slice;
        rec.instance = inst_index;
    };

    auto advance_to = [&](double t) {
        double dt = t - clock;
        if (dt > 0) {
            for (auto& irt : rt) {
                if (irt.running.empty()) continue;
                for (auto& s : irt.running) s.remaining -= irt.rate * dt;
            }
        }
        clock = t;
    };

    for (;;) {
        double t_comp = kInf;
        for (const auto& irt : rt) t_comp = std::min(t_comp, irt.next_completion(clock));
        double t_arr = next_arrival < requests.size() ? requests[next_arrival].arrival : kInf;
        if (t_comp == kInf && t_arr == kInf) break;

        if (t_comp <= t_arr) {
            // completions first; frees slots before a same-instant arrival routes
            advance_to(t_comp);
            for (std::size_t i = 0; i < rt.size(); ++i) {
                auto& irt = rt[i];
                bool changed = false;
                for (std::size_t s = 0; s < irt.running.size();) {
                    if (irt.running[s].remaining <= kTokenEps) {
                        auto& rec = out.records[irt.running[s].req];
                        rec.completion = clock;
                        last_completion = std::max(last_completion, clock);
                        irt.running.erase(irt.running.begin() + static_cast<long>(s));
                        changed = true;
                    } else {
                        ++s;
                    }
                }
                while (!irt.waiting.empty() &&
                       static_cast<int>(irt.running.size()) < irt.inst->config.batch_size) {
                    std::size_t q = irt.waiting.front();
                    irt.waiting.pop_front();
                    admit(irt, q, static_cast<int>(i));
                    changed = true;
                }
                if (changed) irt.recompute_rate();
            }
        } else {
            advance_to(t_arr);
            const Request& r = requests[next_arrival];
            auto views = build_views();
            RoutingDecision d = policy.route(r, views, clock);
            auto& rec = out.records[next_arrival];
            rec.predicted_queue_wait = d.predicted_queue_wait;
            rec.predicted_decode = d.predicted_decode;
            if (d.assigned) {
                if (d.instance_index < 0 || d.instance_index >= static_cast<int>(rt.size()))
                    throw std::runtime_error("policy returned instance index out of range");
                auto& irt = rt[static_cast<std::size_t>(d.instance_index)];
                if (irt.inst->config.model != r.model)
                    throw std::runtime_error("policy routed request for " + r.model +
                                             " to an instance of " + irt.inst->config.model);
                if (static_cast<int>(irt.running.size()) < irt.inst->config.batch_size) {
                    admit(irt, next_arrival, d.instance_index);
                    irt.recompute_rate();
                } else {
                    irt.waiting.push_back(next_arrival);
                }
                rec.instance = d.instance_index;
                rec.outcome = Outcome::Missed;  // resolved after completion
            } else {
                rec.outcome = Outcome::Rejected;
                rec.reject_reason = d.reject_reason;
            }
            ++next_arrival;
        }
    }

    // classify and aggregate
    double first_arrival = requests.empty() ? 0 : requests.front().arrival;
    double latency_sum = 0;
    for (std::size_t i = 0; i < requests.size(); ++i) {
        auto& rec = out.records[i];
        if (rec.outcome == Outcome::Rejected) {
            ++out.requests_rejected;
            continue;
        }
        ++out.requests_admitted;
        out.decoded_tokens += requests[i].decode_tokens;
        latency_sum += rec.first_token - rec.arrival;
        bool met = rec.completion >= 0 &&
                   rec.completion - rec.arrival <= rec.deadline + params.time_epsilon;
        rec.outcome = met ? Outcome::Met : Outcome::Missed;
        if (met)
            ++out.requests_met;
        else
            ++out.requests_missed;
    }
    // rejected requests count against attainment unless configured otherwise
    std::int64_t denom = params.count_rejected ? out.requests_total : out.requests_admitted;
    out.phi_s = denom > 0 ? static_cast<double>(out.requests_met) / static_cast<double>(denom)
                          : 1.0;
    out.makespan = last_completion >= 0 ? last_completion - first_arrival : 0;
    out.phi_t = out.makespan > 0 ? out.decoded_tokens / out.makespan : 0;
    out.phi_l = out.requests_admitted > 0 ? latency_sum / static_cast<double>(out.requests_admitted)
                                          : 0;
    return out;
}

void save_records_csv(const std::string& path, const std::vector<Request>& requests,
                      const SimMetrics& metrics) {
    if (requests.size() != metrics.records.size())
        throw std::invalid_argument("records do not match requests");
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write records csv: " + path);
    out.precision(17);
    out << "id,arrival,model,decode_tokens,slo_factor,deadline,outcome,instance,"
           "predicted_lq,predicted_ld,admission,first_token,completion\n";
    for (std::size_t i = 0; i < requests.size(); ++i) {
        const auto& r = requests[i];
        const auto& rec = metrics.records[i];
        const char* outcome = rec.outcome == Outcome::Met      ? "met"
                              : rec.outcome == Outcome::Missed ? "missed"
                                                               : "rejected";
        out << r.id << ',' << r.arrival << ',' << r.model << ',' << r.decode_tokens << ','
            << r.slo_factor << ',' << r.deadline << ',' << outcome << ',' << rec.instance << ','
            << rec.predicted_queue_wait << ',' << rec.predicted_decode << ',' << rec.admission
            << ',' << rec.first_token << ',' << rec.completion << '\n';
    }
}

}  // namespace maaso
