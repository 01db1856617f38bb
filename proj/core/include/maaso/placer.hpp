#pragma once

#include <map>
#include <string>
#include <vector>

#include "maaso/config_space.hpp"
#include "maaso/distributor.hpp"
#include "maaso/model.hpp"
#include "maaso/profiler.hpp"
#include "maaso/simulator.hpp"

namespace maaso {

struct PlacerOptions {
    SloSplit slo_split;
    /// How the partition search seeds its best score: with the best
    /// single-cluster deployment over the full request set (lets the search
    /// fall back to a uniform deployment when splitting buys nothing) or
    /// with zero.
    enum class InitMode { Homogeneous, Zero } init_mode = InitMode::Homogeneous;
    /// Score ties reject the candidate instance (fewer GPUs win).
    bool accept_ties = false;
    /// Above this many requests, deployment scoring samples the trace.
    std::size_t sample_threshold = 5000;
    double sample_fraction = 0.2;
};

struct SolverStats {
    long simulations = 0;
    double wall_seconds = 0;
};

/// Per GPU budget k: the best deployment found that fits in k GPUs and its
/// serving score.
struct SolutionArray {
    std::vector<double> score;                            // size budget+1
    std::vector<std::vector<InstanceConfig>> deployment;  // size budget+1
};

/// One greedy step, for inspection and tests.
struct DeployEvent {
    ParallelismStrategy strategy;
    int batch_size = 0;
    std::string model;
    double score_before = 0;
    double score_after = 0;
    bool accepted = false;
    int gpus_used = 0;
};

/// Model with the most unserved requests; ties break to the
/// lexicographically smallest id. Missing counts are zero.
std::string most_unserved_model(const std::map<std::string, long>& unserved_counts,
                                const std::vector<std::string>& candidates);

/// Simulator-guided greedy instance configuration. For every pruned
/// (strategy, batch) pair, repeatedly adds an instance of the most unserved
/// model while the serving score improves; a non-improving model joins the
/// saturated set and is not retried under that pair. Tracks the best
/// deployment at every GPU budget across all pairs.
SolutionArray deploy_instances(const std::vector<Request>& requests, int gpu_budget,
                               const std::map<std::string, ModelSpec>& models,
                               const std::vector<InstanceConfig>& configs,
                               const ProfileSet& profiles, const ClusterSpec& cluster,
                               const SimParams& sim, const RoutingPolicy& policy,
                               const PlacerOptions& options = {}, SolverStats* stats = nullptr,
                               std::vector<DeployEvent>* trace = nullptr);

struct SubClusterPlan {
    std::string label;  // "throughput" | "latency" | "all"
    int gpu_count = 0;
    std::vector<Instance> instances;
    double score = 0;
};

struct PlacementSolution {
    std::string method;
    int gpu_total = 0;
    double theta_star = 0;  // slo_split predicate used to partition requests
    std::vector<SubClusterPlan> groups;
    double phi_opt = 0;
    SolverStats stats;
    PruneAudit audit;

    std::vector<Instance> all_instances() const;
};

/// Dynamic-programming resource partition: splits requests by SLO class,
/// sizes the latency sub-cluster by request counts, deploys both sides
/// (the throughput side may use the whole cluster), then scans latency-side
/// budgets maximizing the score sum. Falls back to a single sub-cluster when
/// one class is empty, the cluster has fewer than two GPUs, or no partition
/// beats the initialization.
PlacementSolution partition_resources(const ClusterSpec& cluster,
                                      const std::vector<Request>& requests,
                                      const std::map<std::string, ModelSpec>& models,
                                      const std::vector<ParallelismStrategy>& strategies,
                                      const std::vector<int>& batch_grid,
                                      const ProfileSet& profiles, const SimParams& sim,
                                      const PlacerOptions& options = {});

/// DP-instance placement, batch size searched with the same pruning; no
/// parallelism search.
PlacementSolution baseline_sr(const ClusterSpec& cluster, const std::vector<Request>& requests,
                              const std::map<std::string, ModelSpec>& models,
                              const std::vector<int>& batch_grid, const ProfileSet& profiles,
                              const SimParams& sim, const PlacerOptions& options = {});

/// Joint search for one (strategy, batch) per model applied uniformly
/// cluster-wide: every per-model combination from the pruned space is filled
/// greedily and scored; the best combination wins. No sub-clusters.
PlacementSolution baseline_homogeneous(const ClusterSpec& cluster,
                                       const std::vector<Request>& requests,
                                       const std::map<std::string, ModelSpec>& models,
                                       const std::vector<ParallelismStrategy>& strategies,
                                       const std::vector<int>& batch_grid,
                                       const ProfileSet& profiles, const SimParams& sim,
                                       const PlacerOptions& options = {});

}  // namespace maaso
