#pragma once

#include <map>
#include <string>
#include <vector>

#include "maaso/model.hpp"
#include "maaso/profiler.hpp"

namespace maaso {

/// One pruning decision, kept for inspection.
struct PruneDecision {
    InstanceConfig config;
    std::string stage;   // "parallelism" | "batch-high" | "batch-low"
    std::string reason;
    bool kept = false;
};
using PruneAudit = std::vector<PruneDecision>;

/// In-order walk of the configuration tree: every memory-feasible
/// (model, strategy, batch) leaf, sorted by decreasing saturated per-request
/// throughput eval(tm, B, B); ties break toward fewer GPUs, then smaller B.
/// Throws std::invalid_argument naming any (model, strategy) without a
/// fitted profile.
std::vector<InstanceConfig> enumerate_configs(const std::map<std::string, ModelSpec>& models,
                                              const std::vector<ParallelismStrategy>& strategies,
                                              const std::vector<int>& batch_grid,
                                              const ProfileSet& profiles,
                                              const ClusterSpec& cluster);

/// Drops every multi-GPU strategy whose saturated per-GPU rate
/// eval(tm_P, B, B) / degree(P) never beats the DP rate at any batch size in
/// the grid: it cannot outperform DP while consuming more resources.
std::vector<InstanceConfig> prune_parallelism(const std::vector<InstanceConfig>& configs,
                                              const ProfileSet& profiles,
                                              PruneAudit* audit = nullptr);

/// Per (model, strategy), keeps only batch sizes on the latency/coverage
/// Pareto front: drops B too high to serve any request at saturation
/// (decode at F(B, B) cannot meet any deadline) and B too low to serve an
/// additional request class over a larger retained size. Classes are
/// quantile buckets of (decode length, SLO factor), `buckets` per axis.
/// Throws std::invalid_argument on an empty request set.
std::vector<InstanceConfig> prune_batch_sizes(const std::vector<InstanceConfig>& configs,
                                              const std::vector<Request>& requests,
                                              const ProfileSet& profiles, int buckets = 8,
                                              PruneAudit* audit = nullptr);

/// enumerate -> prune_parallelism -> prune_batch_sizes.
std::vector<InstanceConfig> pruned_configs(const std::map<std::string, ModelSpec>& models,
                                           const std::vector<ParallelismStrategy>& strategies,
                                           const std::vector<int>& batch_grid,
                                           const ProfileSet& profiles, const ClusterSpec& cluster,
                                           const std::vector<Request>& requests,
                                           PruneAudit* audit = nullptr);

}  // namespace maaso
