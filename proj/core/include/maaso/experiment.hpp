#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "maaso/placer.hpp"
#include "maaso/workload.hpp"

namespace maaso {

// ---------------------------------------------------------------------------
// Declarative config files (JSON)
// ---------------------------------------------------------------------------

std::map<std::string, ModelSpec> load_models_json(const std::string& path);
void save_models_json(const std::string& path, const std::map<std::string, ModelSpec>& models);

ClusterSpec load_cluster_json(const std::string& path);
void save_cluster_json(const std::string& path, const ClusterSpec& cluster);

ProfileSet load_profiles_json(const std::string& path);
void save_profiles_json(const std::string& path, const ProfileSet& profiles);

TraceConfig load_trace_config_json(const std::string& path);
void save_trace_config_json(const std::string& path, const TraceConfig& cfg);

void save_manifest_json(const std::string& path, const PlacementSolution& solution);
PlacementSolution load_manifest_json(const std::string& path);

// ---------------------------------------------------------------------------
// Experiments
// ---------------------------------------------------------------------------

struct ProfileInput {
    std::string samples_csv;             // fit from raw samples
    std::string fitted_json;             // or load fitted curves
    std::vector<ProfileSample> samples;  // or fit from inline samples
};

struct TraceInput {
    std::optional<TraceConfig> config;  // generate
    std::string csv;                    // or replay a stored trace
};

struct SweepSpec {
    std::string axis;  // cluster_size | cv | total_requests
    std::vector<double> values;
};

struct ExperimentSpec {
    ClusterSpec cluster;
    std::map<std::string, ModelSpec> models;
    std::vector<ParallelismStrategy> strategies;
    std::vector<int> batch_grid;
    ProfileInput profiles;
    TraceInput trace;
    std::string method = "maaso";  // maaso | maaso_star | sr | homogeneous
    SimParams sim;                 // gamma_t/gamma_l <= 0 resolve to defaults
    PlacerOptions placer;
    std::optional<SweepSpec> sweep;
    std::string output_dir = "out";

    void check() const;
};

ExperimentSpec load_experiment_json(const std::string& path);
void save_experiment_json(const std::string& path, const ExperimentSpec& spec);

struct RunOutput {
    ExperimentSpec resolved;  // all defaults materialized
    ProfileSet profiles;
    std::vector<Request> trace;
    PlacementSolution placement;
    SimMetrics metrics;
};

/// fit -> trace -> prune -> place -> simulate, all in memory.
/// gamma_t defaults to the largest cluster-level saturated aggregate over the
/// pruned configs; gamma_l defaults to the largest deadline in the trace.
RunOutput run_pipeline(const ExperimentSpec& spec);

/// Pipeline plus output files under `dir`: manifest.json, requests.csv,
/// summary.json, and trace.csv / profiles.json when generated here.
RunOutput run_experiment(const ExperimentSpec& spec, const std::string& dir);
inline RunOutput run_experiment(const ExperimentSpec& spec) {
    return run_experiment(spec, spec.output_dir);
}

void write_outputs(const RunOutput& out, const std::string& dir);

/// Sweep one axis; each value runs the same spec with that axis overridden,
/// into `<output_dir>/<axis>_<value>/`. Points run concurrently. Returns the
/// run directories in value order.
std::vector<std::string> run_sweep(const ExperimentSpec& spec);

/// Rows of (method, phi_s, phi_t, phi_l, solver wall seconds) from summary
/// files sharing the same trace and cluster axes, with deltas against the
/// row whose method equals `baseline`. Returns CSV text.
std::string compare_methods_csv(const std::vector<std::string>& summary_paths,
                                const std::string& baseline);

/// Routing policy used to replay a placement produced by `method`.
std::unique_ptr<RoutingPolicy> policy_for_method(const std::string& method, double theta_star);

// ---------------------------------------------------------------------------
// Desk preset: a self-contained synthetic setup small enough for a laptop.
// The profiles give tensor parallelism a per-request advantage at low batch
// sizes while data parallelism keeps the better per-GPU aggregate at
// saturation; pp and tp-4 are dominated per GPU.
// ---------------------------------------------------------------------------

namespace preset {

ClusterSpec desk_cluster(int gpus = 8);
std::map<std::string, ModelSpec> desk_models(int count = 1);
/// Ground-truth decay curves behind the sample generator.
ProfileSet desk_reference_curves(const std::map<std::string, ModelSpec>& models);
/// Noiseless samples drawn from the reference curves; fitting them recovers
/// the curves exactly.
std::vector<ProfileSample> desk_samples(const std::map<std::string, ModelSpec>& models);
std::vector<ParallelismStrategy> desk_strategies();
std::vector<int> desk_batch_grid();
/// Six trace shapes; `table_row` in [1, 6].
TraceConfig desk_trace(int table_row, const std::map<std::string, ModelSpec>& models,
                       double total_requests = 2000, double duration = 600, double cv = 2.0,
                       std::uint64_t seed = 42);
SimParams desk_sim();
ExperimentSpec desk_experiment(const std::string& method, int trace_row, int gpus = 8,
                               int model_count = 1, double total_requests = 2000,
                               std::uint64_t seed = 42);
/// Cluster-scale defaults: 24 GPUs, 17000 requests over a 3600 s window,
/// CV 2, three models. The desk preset is this, scaled down.
ExperimentSpec full_experiment(const std::string& method, int trace_row,
                               std::uint64_t seed = 42);

}  // namespace preset

}  // namespace maaso
