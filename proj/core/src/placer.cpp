#include "maaso/placer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <set>
#include <stdexcept>

namespace maaso {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::vector<Request> sample_trace(const std::vector<Request>& requests,
                                  const PlacerOptions& opt) {
    if (requests.size() <= opt.sample_threshold || opt.sample_fraction >= 1.0) return requests;
    std::size_t stride = static_cast<std::size_t>(std::lround(1.0 / opt.sample_fraction));
    if (stride < 2) return requests;
    std::vector<Request> out;
    out.reserve(requests.size() / stride + 1);
    for (std::size_t i = 0; i < requests.size(); i += stride) out.push_back(requests[i]);
    return out;
}

std::vector<Instance> materialize(const std::vector<InstanceConfig>& configs, int first_id,
                                  int first_gpu, int group) {
    std::vector<Instance> out;
    int gpu = first_gpu;
    int id = first_id;
    for (const auto& c : configs) {
        Instance inst;
        inst.id = id++;
        inst.config = c;
        inst.group = group;
        for (int d = 0; d < c.strategy.degree; ++d) inst.gpus.push_back(gpu++);
        out.push_back(std::move(inst));
    }
    return out;
}

struct PairConfig {
    ParallelismStrategy strategy;
    int batch = 1;
};

// (strategy, batch) pairs in tree order, plus which models retain each pair.
struct PairSpace {
    std::vector<PairConfig> pairs;
    std::set<std::tuple<std::string, std::string, int>> valid;  // (model, strategy, B)

    bool valid_for(const std::string& model, const PairConfig& p) const {
        return valid.count({model, p.strategy.name(), p.batch}) > 0;
    }
};

PairSpace pair_space(const std::vector<InstanceConfig>& configs) {
    PairSpace s;
    std::set<std::pair<std::string, int>> seen;
    for (const auto& c : configs) {
        s.valid.insert({c.model, c.strategy.name(), c.batch_size});
        if (seen.insert({c.strategy.name(), c.batch_size}).second)
            s.pairs.push_back({c.strategy, c.batch_size});
    }
    return s;
}

}  // namespace

std::string most_unserved_model(const std::map<std::string, long>& unserved_counts,
                                const std::vector<std::string>& candidates) {
    if (candidates.empty())
        throw std::invalid_argument("most_unserved_model: no candidate models");
    std::vector<std::string> sorted(candidates.begin(), candidates.end());
    std::sort(sorted.begin(), sorted.end());
    std::string best = sorted.front();
    long best_count = -1;
    for (const auto& m : sorted) {
        auto it = unserved_counts.find(m);
        long c = it == unserved_counts.end() ? 0 : it->second;
        if (c > best_count) {
            best_count = c;
            best = m;
        }
    }
    return best;
}

SolutionArray deploy_instances(const std::vector<Request>& requests, int gpu_budget,
                               const std::map<std::string, ModelSpec>& models,
                               const std::vector<InstanceConfig>& configs,
                               const ProfileSet& profiles, const ClusterSpec& cluster,
                               const SimParams& sim, const RoutingPolicy& policy,
                               const PlacerOptions& options, SolverStats* stats,
                               std::vector<DeployEvent>* trace) {
    SolutionArray arr;
    int budget = std::max(gpu_budget, 0);
    arr.score.assign(static_cast<std::size_t>(budget) + 1, 0.0);
    arr.deployment.assign(static_cast<std::size_t>(budget) + 1, {});
    if (budget == 0 || configs.empty() || requests.empty()) return arr;

    ClusterSpec sub = cluster;
    sub.gpu_count = budget;
    std::vector<Request> rx = sample_trace(requests, options);

    std::vector<std::string> model_ids;
    for (const auto& [id, m] : models) model_ids.push_back(id);

    PairSpace space = pair_space(configs);

    for (const auto& pair : space.pairs) {
        std::vector<InstanceConfig> current;
        std::set<std::string> saturated;
        double score_cur = 0;
        int gpus_used = 0;
        // outcome of the last accepted deployment; everything starts unserved
        std::map<std::string, long> unserved;
        for (const auto& r : rx) ++unserved[r.model];

        while (gpus_used + pair.strategy.degree <= budget &&
               saturated.size() < model_ids.size()) {
            std::vector<std::string> candidates;
            for (const auto& m : model_ids)
                if (!saturated.count(m)) candidates.push_back(m);
            std::string pick = most_unserved_model(unserved, candidates);
            if (!space.valid_for(pick, pair)) {
                saturated.insert(pick);
                continue;
            }

            std::vector<InstanceConfig> next = current;
            next.push_back({pick, pair.strategy, pair.batch});
            auto instances = materialize(next, 0, 0, -1);
            SimMetrics m = simulate(instances, rx, policy, profiles, models, sub, sim);
            if (stats) ++stats->simulations;
            double score_next = serving_score(m, sim);

            bool accept = options.accept_ties ? score_next >= score_cur : score_next > score_cur;
            if (trace)
                trace->push_back({pair.strategy, pair.batch, pick, score_cur, score_next, accept,
                                  gpus_used + (accept ? pair.strategy.degree : 0)});
            if (accept) {
                current = std::move(next);
                score_cur = score_next;
                gpus_used += pair.strategy.degree;
                unserved.clear();
                for (std::size_t i = 0; i < rx.size(); ++i)
                    if (m.records[i].outcome != Outcome::Met) ++unserved[rx[i].model];
                auto k = static_cast<std::size_t>(gpus_used);
                if (score_cur > arr.score[k]) {
                    arr.score[k] = score_cur;
                    arr.deployment[k] = current;
                }
            } else {
                saturated.insert(pick);
            }
        }
    }

    // budget semantics: the best deployment for k GPUs may use fewer
    for (std::size_t k = 1; k < arr.score.size(); ++k) {
        if (arr.score[k - 1] > arr.score[k]) {
            arr.score[k] = arr.score[k - 1];
            arr.deployment[k] = arr.deployment[k - 1];
        }
    }
    return arr;
}

std::vector<Instance> PlacementSolution::all_instances() const {
    std::vector<Instance> out;
    for (const auto& g : groups) out.insert(out.end(), g.instances.begin(), g.instances.end());
    return out;
}

namespace {

PlacementSolution single_cluster_solution(const std::string& method, const ClusterSpec& cluster,
                                          const std::vector<InstanceConfig>& deployment,
                                          double score, const std::string& label,
                                          double theta_star) {
    PlacementSolution sol;
    sol.method = method;
    sol.gpu_total = cluster.gpu_count;
    sol.theta_star = theta_star;
    SubClusterPlan plan;
    plan.label = label;
    plan.gpu_count = cluster.gpu_count;
    plan.instances = materialize(deployment, 0, 0, -1);
    plan.score = score;
    sol.groups.push_back(std::move(plan));
    sol.phi_opt = score;
    return sol;
}

std::size_t argmax(const std::vector<double>& v) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < v.size(); ++i)
        if (v[i] > v[best]) best = i;
    return best;
}

}  // namespace

PlacementSolution partition_resources(const ClusterSpec& cluster,
                                      const std::vector<Request>& requests,
                                      const std::map<std::string, ModelSpec>& models,
                                      const std::vector<ParallelismStrategy>& strategies,
                                      const std::vector<int>& batch_grid,
                                      const ProfileSet& profiles, const SimParams& sim,
                                      const PlacerOptions& options) {
    if (requests.empty()) throw std::invalid_argument("partition_resources: empty request set");
    auto start = Clock::now();

    SloAwareDistributor scorer(options.slo_split, /*partitioned=*/false);
    SolverStats stats;
    PruneAudit audit;

    std::vector<Request> rt, rl;
    for (const auto& r : requests)
        (options.slo_split.side(r) == 0 ? rt : rl).push_back(r);

    auto finish = [&](PlacementSolution sol) {
        sol.stats = stats;
        sol.stats.wall_seconds = seconds_since(start);
        sol.audit = std::move(audit);
        return sol;
    };

    // degenerate splits collapse to one sub-cluster over the whole cluster
    if (cluster.gpu_count < 2 || rt.empty() || rl.empty()) {
        auto configs = pruned_configs(models, strategies, batch_grid, profiles, cluster,
                                      requests, &audit);
        auto arr = deploy_instances(requests, cluster.gpu_count, models, configs, profiles,
                                    cluster, sim, scorer, options, &stats);
        std::size_t k = argmax(arr.score);
        std::string label = rt.empty() ? "latency" : (rl.empty() ? "throughput" : "all");
        return finish(single_cluster_solution("maaso", cluster, arr.deployment[k], arr.score[k],
                                              label, options.slo_split.theta_star));
    }

    double ratio = static_cast<double>(rl.size()) / static_cast<double>(requests.size());
    int gl_max = static_cast<int>(std::floor(ratio * cluster.gpu_count));

    auto configs_l = pruned_configs(models, strategies, batch_grid, profiles, cluster, rl, &audit);
    auto configs_t = pruned_configs(models, strategies, batch_grid, profiles, cluster, rt, &audit);

    SolutionArray arr_l = deploy_instances(rl, gl_max, models, configs_l, profiles, cluster, sim,
                                           scorer, options, &stats);
    SolutionArray arr_t = deploy_instances(rt, cluster.gpu_count, models, configs_t, profiles,
                                           cluster, sim, scorer, options, &stats);

    double phi_opt = 0;
    std::vector<InstanceConfig> fallback;
    double fallback_score = 0;
    if (options.init_mode == PlacerOptions::InitMode::Homogeneous) {
        auto configs_all = pruned_configs(models, strategies, batch_grid, profiles, cluster,
                                          requests, &audit);
        auto arr_all = deploy_instances(requests, cluster.gpu_count, models, configs_all, profiles,
                                        cluster, sim, scorer, options, &stats);
        std::size_t k = argmax(arr_all.score);
        phi_opt = arr_all.score[k];
        fallback = arr_all.deployment[k];
        fallback_score = phi_opt;
    }

    int best_gl = -1;
    for (int gl = 1; gl <= gl_max; ++gl) {
        int gt = cluster.gpu_count - gl;
        double combined = arr_t.score[static_cast<std::size_t>(gt)] +
                          arr_l.score[static_cast<std::size_t>(gl)];
        if (combined > phi_opt) {
            phi_opt = combined;
            best_gl = gl;
        }
    }

    if (best_gl < 0) {
        return finish(single_cluster_solution("maaso", cluster, fallback, fallback_score, "all",
                                              options.slo_split.theta_star));
    }

    int gt = cluster.gpu_count - best_gl;
    PlacementSolution sol;
    sol.method = "maaso";
    sol.gpu_total = cluster.gpu_count;
    sol.theta_star = options.slo_split.theta_star;
    sol.phi_opt = phi_opt;

    SubClusterPlan plan_t;
    plan_t.label = "throughput";
    plan_t.gpu_count = gt;
    plan_t.instances = materialize(arr_t.deployment[static_cast<std::size_t>(gt)], 0, 0, 0);
    plan_t.score = arr_t.score[static_cast<std::size_t>(gt)];

    SubClusterPlan plan_l;
    plan_l.label = "latency";
    plan_l.gpu_count = best_gl;
    plan_l.instances = materialize(arr_l.deployment[static_cast<std::size_t>(best_gl)],
                                   static_cast<int>(plan_t.instances.size()), gt, 1);
    plan_l.score = arr_l.score[static_cast<std::size_t>(best_gl)];

    sol.groups.push_back(std::move(plan_t));
    sol.groups.push_back(std::move(plan_l));
    return finish(sol);
}

PlacementSolution baseline_sr(const ClusterSpec& cluster, const std::vector<Request>& requests,
                              const std::map<std::string, ModelSpec>& models,
                              const std::vector<int>& batch_grid, const ProfileSet& profiles,
                              const SimParams& sim, const PlacerOptions& options) {
    if (requests.empty()) throw std::invalid_argument("baseline_sr: empty request set");
    auto start = Clock::now();
    SolverStats stats;
    PruneAudit audit;
    auto configs = pruned_configs(models, {dp()}, batch_grid, profiles, cluster, requests, &audit);
    ShortestQueuePolicy policy;
    auto arr = deploy_instances(requests, cluster.gpu_count, models, configs, profiles, cluster,
                                sim, policy, options, &stats);
    std::size_t k = argmax(arr.score);
    auto sol = single_cluster_solution("sr", cluster, arr.deployment[k], arr.score[k], "all",
                                       options.slo_split.theta_star);
    sol.stats = stats;
    sol.stats.wall_seconds = seconds_since(start);
    sol.audit = std::move(audit);
    return sol;
}

PlacementSolution baseline_homogeneous(const ClusterSpec& cluster,
                                       const std::vector<Request>& requests,
                                       const std::map<std::string, ModelSpec>& models,
                                       const std::vector<ParallelismStrategy>& strategies,
                                       const std::vector<int>& batch_grid,
                                       const ProfileSet& profiles, const SimParams& sim,
                                       const PlacerOptions& options) {
    if (requests.empty())
        throw std::invalid_argument("baseline_homogeneous: empty request set");
    auto start = Clock::now();
    SolverStats stats;
    PruneAudit audit;
    auto configs = pruned_configs(models, strategies, batch_grid, profiles, cluster, requests,
                                  &audit);

    // per-model menus of (strategy, batch)
    std::map<std::string, std::vector<InstanceConfig>> menu;
    for (const auto& c : configs) menu[c.model].push_back(c);
    std::vector<std::string> model_ids;
    for (const auto& [id, list] : menu) model_ids.push_back(id);
    if (model_ids.empty())
        return single_cluster_solution("homogeneous", cluster, {}, 0, "all",
                                       options.slo_split.theta_star);

    ShortestQueuePolicy policy;
    std::vector<Request> rx = sample_trace(requests, options);

    std::vector<std::size_t> cursor(model_ids.size(), 0);
    double best_score = 0;
    std::vector<InstanceConfig> best_deploy;

    for (;;) {
        // the per-model configuration fixed by this point of the product
        std::map<std::string, InstanceConfig> assigned;
        for (std::size_t i = 0; i < model_ids.size(); ++i)
            assigned.emplace(model_ids[i], menu[model_ids[i]][cursor[i]]);

        // greedy fill under the current per-model assignment
        std::vector<InstanceConfig> current;
        std::set<std::string> saturated;
        std::map<std::string, long> unserved;
        for (const auto& r : rx) ++unserved[r.model];
        double score_cur = 0;
        int gpus_used = 0;

        while (saturated.size() < model_ids.size()) {
            std::vector<std::string> candidates;
            for (const auto& m : model_ids)
                if (!saturated.count(m)) candidates.push_back(m);
            std::string pick = most_unserved_model(unserved, candidates);
            const InstanceConfig& cfg = assigned.at(pick);
            if (gpus_used + cfg.strategy.degree > cluster.gpu_count) {
                saturated.insert(pick);
                continue;
            }
            std::vector<InstanceConfig> next = current;
            next.push_back(cfg);
            auto instances = materialize(next, 0, 0, -1);
            SimMetrics m = simulate(instances, rx, policy, profiles, models, cluster, sim);
            ++stats.simulations;
            double score_next = serving_score(m, sim);
            if (score_next > score_cur) {
                current = std::move(next);
                score_cur = score_next;
                gpus_used += cfg.strategy.degree;
                unserved.clear();
                for (std::size_t i = 0; i < rx.size(); ++i)
                    if (m.records[i].outcome != Outcome::Met) ++unserved[rx[i].model];
            } else {
                saturated.insert(pick);
            }
        }
        if (score_cur > best_score) {
            best_score = score_cur;
            best_deploy = current;
        }

        // next point of the cartesian product
        std::size_t i = 0;
        for (; i < model_ids.size(); ++i) {
            if (++cursor[i] < menu[model_ids[i]].size()) break;
            cursor[i] = 0;
        }
        if (i == model_ids.size()) break;
    }

    auto sol = single_cluster_solution("homogeneous", cluster, best_deploy, best_score, "all",
                                       options.slo_split.theta_star);
    sol.stats = stats;
    sol.stats.wall_seconds = seconds_since(start);
    sol.audit = std::move(audit);
    return sol;
}

}  // namespace maaso
