#include "maaso/config_space.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

namespace maaso {

std::vector<InstanceConfig> enumerate_configs(const std::map<std::string, ModelSpec>& models,
                                              const std::vector<ParallelismStrategy>& strategies,
                                              const std::vector<int>& batch_grid,
                                              const ProfileSet& profiles,
                                              const ClusterSpec& cluster) {
    if (batch_grid.empty()) throw std::invalid_argument("empty batch grid");
    for (int b : batch_grid) {
        if (b < 1 || b > kMaxBatchSize)
            throw std::invalid_argument("batch size " + std::to_string(b) + " outside [1, " +
                                        std::to_string(kMaxBatchSize) + "]");
    }

    std::vector<InstanceConfig> out;
    for (const auto& [id, model] : models) {
        for (const auto& strat : strategies) {
            if (!model.supports(strat)) continue;
            if (strat.degree > cluster.gpu_count) continue;
            if (!profiles.contains(id, strat))
                throw std::invalid_argument("no profile for (" + id + ", " + strat.name() + ")");
            for (int b : batch_grid) {
                if (model.gpu_memory_bytes(strat, b) > cluster.gpu_memory_bytes) continue;
                out.push_back({id, strat, b});
            }
        }
    }

    auto saturated = [&](const InstanceConfig& c) {
        return eval_throughput(profiles.at(c.model, c.strategy), c.batch_size, c.batch_size);
    };
    std::stable_sort(out.begin(), out.end(), [&](const InstanceConfig& a, const InstanceConfig& b) {
        double ra = saturated(a), rb = saturated(b);
        if (ra != rb) return ra > rb;
        if (a.strategy.degree != b.strategy.degree) return a.strategy.degree < b.strategy.degree;
        if (a.batch_size != b.batch_size) return a.batch_size < b.batch_size;
        return a < b;
    });
    return out;
}

std::vector<InstanceConfig> prune_parallelism(const std::vector<InstanceConfig>& configs,
                                              const ProfileSet& profiles, PruneAudit* audit) {
    // batch grid actually present, per model
    std::map<std::string, std::set<int>> grids;
    for (const auto& c : configs) grids[c.model].insert(c.batch_size);

    auto dominated = [&](const std::string& model, const ParallelismStrategy& strat) {
        if (strat.kind == StrategyKind::DP || strat.degree <= 1) return false;
        if (!profiles.contains(model, dp())) return false;  // nothing to compare against
        const auto& tm = profiles.at(model, strat);
        const auto& tm_dp = profiles.at(model, dp());
        for (int b : grids[model]) {
            double per_gpu = eval_throughput(tm, b, b) / strat.degree;
            if (per_gpu > eval_throughput(tm_dp, b, b)) return false;
        }
        return true;
    };

    std::map<std::pair<std::string, ParallelismStrategy>, bool> cache;
    std::vector<InstanceConfig> out;
    for (const auto& c : configs) {
        auto key = std::make_pair(c.model, c.strategy);
        auto it = cache.find(key);
        if (it == cache.end()) it = cache.emplace(key, dominated(c.model, c.strategy)).first;
        if (it->second) {
            if (audit)
                audit->push_back({c, "parallelism",
                                  c.strategy.name() + " per-GPU rate never exceeds dp", false});
        } else {
            out.push_back(c);
        }
    }
    return out;
}

namespace {

// Quantile edges over sorted values; bucket index per value in [0, buckets).
std::vector<double> quantile_edges(std::vector<double> values, int buckets) {
    std::sort(values.begin(), values.end());
    std::vector<double> edges;
    for (int i = 1; i < buckets; ++i) {
        std::size_t pos = (values.size() * static_cast<std::size_t>(i)) / buckets;
        if (pos >= values.size()) pos = values.size() - 1;
        edges.push_back(values[pos]);
    }
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    return edges;
}

int bucket_of(double v, const std::vector<double>& edges) {
    return static_cast<int>(std::lower_bound(edges.begin(), edges.end(), v) - edges.begin());
}

}  // namespace

std::vector<InstanceConfig> prune_batch_sizes(const std::vector<InstanceConfig>& configs,
                                              const std::vector<Request>& requests,
                                              const ProfileSet& profiles, int buckets,
                                              PruneAudit* audit) {
    if (requests.empty()) throw std::invalid_argument("prune_batch_sizes: empty request set");

    // Per model: request classes as quantile buckets of (S_r, slo_factor).
    // A class's feasibility threshold is the largest S_r / tau_r among its
    // members; a config serves the class when its saturated rate reaches it.
    struct ModelClasses {
        std::vector<double> class_need;  // required rate per class
        double min_need = 0;             // easiest single request
    };
    std::map<std::string, ModelClasses> by_model;
    {
        std::map<std::string, std::vector<const Request*>> grouped;
        for (const auto& r : requests) grouped[r.model].push_back(&r);
        for (auto& [model, reqs] : grouped) {
            std::vector<double> tokens, slo;
            tokens.reserve(reqs.size());
            slo.reserve(reqs.size());
            for (const Request* r : reqs) {
                tokens.push_back(r->decode_tokens);
                slo.push_back(r->slo_factor);
            }
            auto tok_edges = quantile_edges(tokens, buckets);
            auto slo_edges = quantile_edges(slo, buckets);
            std::map<std::pair<int, int>, double> need;
            double min_need = std::numeric_limits<double>::infinity();
            for (const Request* r : reqs) {
                double n = r->decode_tokens / r->deadline;
                min_need = std::min(min_need, n);
                auto key = std::make_pair(bucket_of(r->decode_tokens, tok_edges),
                                          bucket_of(r->slo_factor, slo_edges));
                auto [it, fresh] = need.emplace(key, n);
                if (!fresh) it->second = std::max(it->second, n);
            }
            ModelClasses mc;
            mc.min_need = min_need;
            for (const auto& [key, n] : need) mc.class_need.push_back(n);
            by_model[model] = std::move(mc);
        }
    }

    auto served_count = [](const ModelClasses& mc, double rate) {
        int n = 0;
        for (double need : mc.class_need)
            if (rate >= need - 1e-12) ++n;
        return n;
    };

    // group configs by (model, strategy), preserving input order for output
    std::map<std::pair<std::string, ParallelismStrategy>, std::vector<int>> batches;
    for (const auto& c : configs) batches[{c.model, c.strategy}].push_back(c.batch_size);

    std::set<std::tuple<std::string, std::string, int>> kept;  // (model, strategy name, B)
    for (auto& [key, bs] : batches) {
        const auto& [model, strat] = key;
        auto mi = by_model.find(model);
        const auto& tm = profiles.at(model, strat);
        std::sort(bs.begin(), bs.end());

        int last_served = -1;
        for (auto it = bs.rbegin(); it != bs.rend(); ++it) {
            int b = *it;
            double rate = eval_throughput(tm, b, b);
            InstanceConfig cfg{model, strat, b};
            if (mi == by_model.end() || rate < mi->second.min_need - 1e-12) {
                if (audit)
                    audit->push_back({cfg, "batch-high",
                                      "saturated rate serves no request of " + model, false});
                continue;
            }
            int served = served_count(mi->second, rate);
            if (served <= last_served) {
                if (audit)
                    audit->push_back({cfg, "batch-low",
                                      "covers no request class beyond a larger batch", false});
                continue;
            }
            last_served = served;
            kept.insert({model, strat.name(), b});
        }
    }

    std::vector<InstanceConfig> out;
    for (const auto& c : configs) {
        if (kept.count({c.model, c.strategy.name(), c.batch_size})) out.push_back(c);
    }
    return out;
}

std::vector<InstanceConfig> pruned_configs(const std::map<std::string, ModelSpec>& models,
                                           const std::vector<ParallelismStrategy>& strategies,
                                           const std::vector<int>& batch_grid,
                                           const ProfileSet& profiles, const ClusterSpec& cluster,
                                           const std::vector<Request>& requests,
                                           PruneAudit* audit) {
    auto configs = enumerate_configs(models, strategies, batch_grid, profiles, cluster);
    configs = prune_parallelism(configs, profiles, audit);
    configs = prune_batch_sizes(configs, requests, profiles, 8, audit);
    return configs;
}

}  // namespace maaso
