// maaso CLI: fit profiles, synthesize traces, place instances, replay traces,
// sweep experiment axes and compare method reports. All inputs and outputs
// are plain files; any error exits nonzero with a message on stderr.

#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "maaso/experiment.hpp"

namespace fs = std::filesystem;
using namespace maaso;

namespace {

// Strategies both declared by some model and covered by the fitted profiles.
std::vector<ParallelismStrategy> strategies_from(const std::map<std::string, ModelSpec>& models,
                                                 const ProfileSet& profiles) {
    std::set<ParallelismStrategy> strategies;
    for (const auto& [id, m] : models)
        for (const auto& [p, v] : m.baseline_throughput)
            if (profiles.contains(id, p)) strategies.insert(p);
    return {strategies.begin(), strategies.end()};
}

std::vector<int> default_batch_grid() { return {1, 2, 4, 8, 16, 32, 64, 128, 256}; }

int cmd_fit(const std::string& samples_csv, const std::string& out_path) {
    auto samples = load_samples_csv(samples_csv);
    ProfileSet profiles = ProfileSet::fit_all(samples);
    save_profiles_json(out_path, profiles);
    std::cout << "fitted " << profiles.all().size() << " (model, strategy) curves -> " << out_path
              << "\n";
    return 0;
}

int cmd_trace(const std::string& config_path, const std::string& cluster_path,
              const std::string& out_path) {
    TraceConfig cfg = load_trace_config_json(config_path);
    ClusterSpec cluster = load_cluster_json(cluster_path);
    auto trace = generate_trace(cfg, cluster.time_slice);
    save_trace_csv(out_path, trace);
    std::cout << "generated " << trace.size() << " requests -> " << out_path << "\n";
    return 0;
}

int cmd_place(const std::string& cluster_path, const std::string& models_path,
              const std::string& profiles_path, const std::string& trace_path,
              const std::string& method, const std::string& out_path, double alpha, double beta,
              double gamma_t, double gamma_l, double theta_star) {
    ExperimentSpec spec;
    spec.cluster = load_cluster_json(cluster_path);
    spec.models = load_models_json(models_path);
    spec.profiles.fitted_json = profiles_path;
    spec.trace.csv = trace_path;
    spec.method = method;
    spec.sim.alpha = alpha;
    spec.sim.beta = beta;
    spec.sim.gamma_t = gamma_t;
    spec.sim.gamma_l = gamma_l;
    spec.placer.slo_split.theta_star = theta_star;
    spec.strategies = strategies_from(spec.models, load_profiles_json(profiles_path));
    spec.batch_grid = default_batch_grid();
    RunOutput out = run_pipeline(spec);
    save_manifest_json(out_path, out.placement);
    std::cout << "method " << method << ": score " << out.placement.phi_opt << ", solver "
              << out.placement.stats.wall_seconds << "s, " << out.placement.stats.simulations
              << " simulations -> " << out_path << "\n";
    return 0;
}

int cmd_simulate(const std::string& manifest_path, const std::string& trace_path,
                 const std::string& profiles_path, const std::string& cluster_path,
                 const std::string& models_path, const std::string& out_summary,
                 const std::string& out_requests, double alpha, double beta, double gamma_t,
                 double gamma_l) {
    PlacementSolution manifest = load_manifest_json(manifest_path);
    auto trace = load_trace_csv(trace_path);
    ProfileSet profiles = load_profiles_json(profiles_path);
    ClusterSpec cluster = load_cluster_json(cluster_path);
    auto models = load_models_json(models_path);
    SimParams sim;
    sim.alpha = alpha;
    sim.beta = beta;
    sim.gamma_t = gamma_t;
    sim.gamma_l = gamma_l;
    auto policy = policy_for_method(manifest.method, manifest.theta_star);
    SimMetrics m = simulate(manifest.all_instances(), trace, *policy, profiles, models, cluster, sim);
    if (!out_requests.empty()) save_records_csv(out_requests, trace, m);
    std::ofstream out(out_summary);
    if (!out) throw std::runtime_error("cannot write " + out_summary);
    out.precision(17);
    out << "{\n"
        << "  \"slo_attainment\": " << m.phi_s << ",\n"
        << "  \"avg_decode_throughput\": " << m.phi_t << ",\n"
        << "  \"avg_response_latency\": " << m.phi_l << ",\n"
        << "  \"requests_total\": " << m.requests_total << ",\n"
        << "  \"requests_met\": " << m.requests_met << ",\n"
        << "  \"requests_missed\": " << m.requests_missed << ",\n"
        << "  \"requests_rejected\": " << m.requests_rejected << "\n"
        << "}\n";
    std::cout << "slo " << m.phi_s << ", throughput " << m.phi_t << " tok/s, latency " << m.phi_l
              << " s -> " << out_summary << "\n";
    return 0;
}

int cmd_sweep(const std::string& spec_path) {
    ExperimentSpec spec = load_experiment_json(spec_path);
    if (spec.sweep) {
        auto dirs = run_sweep(spec);
        for (const auto& d : dirs) std::cout << d << "\n";
    } else {
        run_experiment(spec);
        std::cout << spec.output_dir << "\n";
    }
    return 0;
}

int cmd_compare(const std::vector<std::string>& summaries, const std::string& baseline,
                const std::string& out_path) {
    std::string table = compare_methods_csv(summaries, baseline);
    if (out_path.empty()) {
        std::cout << table;
    } else {
        std::ofstream out(out_path);
        if (!out) throw std::runtime_error("cannot write " + out_path);
        out << table;
        std::cout << "comparison -> " << out_path << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"maaso: SLO-aware heterogeneous instance orchestration simulator"};
    app.require_subcommand(1);

    std::string samples_csv, profiles_out = "profiles.json";
    auto* fit = app.add_subcommand("fit", "fit throughput decay curves from a samples CSV");
    fit->add_option("--samples", samples_csv, "samples CSV")->required();
    fit->add_option("--out", profiles_out, "output profiles JSON");

    std::string trace_cfg, trace_cluster, trace_out = "trace.csv";
    auto* trace = app.add_subcommand("trace", "generate an SLO-annotated request trace");
    trace->add_option("--config", trace_cfg, "trace config JSON")->required();
    trace->add_option("--cluster", trace_cluster, "cluster JSON (for the time slice)")->required();
    trace->add_option("--out", trace_out, "output trace CSV");

    std::string pl_cluster, pl_models, pl_profiles, pl_trace, pl_method = "maaso",
                                                              pl_out = "manifest.json";
    double pl_alpha = 4.0, pl_beta = 0.3, pl_gt = 0, pl_gl = 0, pl_theta = 1.1;
    auto* place = app.add_subcommand("place", "search an instance placement for a trace");
    place->add_option("--cluster", pl_cluster)->required();
    place->add_option("--models", pl_models)->required();
    place->add_option("--profiles", pl_profiles)->required();
    place->add_option("--trace", pl_trace)->required();
    place->add_option("--method", pl_method, "maaso|maaso_star|sr|homogeneous");
    place->add_option("--out", pl_out);
    place->add_option("--alpha", pl_alpha);
    place->add_option("--beta", pl_beta);
    place->add_option("--gamma-t", pl_gt, "0 = derive from pruned configs");
    place->add_option("--gamma-l", pl_gl, "0 = derive from the trace");
    place->add_option("--theta-star", pl_theta, "SLO split threshold");

    std::string sm_manifest, sm_trace, sm_profiles, sm_cluster, sm_models,
        sm_summary = "summary.json", sm_requests;
    double sm_alpha = 4.0, sm_beta = 0.3, sm_gt = 1.0, sm_gl = 1.0;
    auto* sim = app.add_subcommand("simulate", "replay a trace against a placement manifest");
    sim->add_option("--manifest", sm_manifest)->required();
    sim->add_option("--trace", sm_trace)->required();
    sim->add_option("--profiles", sm_profiles)->required();
    sim->add_option("--cluster", sm_cluster)->required();
    sim->add_option("--models", sm_models)->required();
    sim->add_option("--out-summary", sm_summary);
    sim->add_option("--out-requests", sm_requests);
    sim->add_option("--alpha", sm_alpha);
    sim->add_option("--beta", sm_beta);
    sim->add_option("--gamma-t", sm_gt);
    sim->add_option("--gamma-l", sm_gl);

    std::string sw_spec;
    auto* sweep = app.add_subcommand("sweep", "run an experiment spec (with optional sweep axis)");
    sweep->add_option("--spec", sw_spec, "experiment JSON")->required();

    std::vector<std::string> cp_summaries;
    std::string cp_baseline = "sr", cp_out;
    auto* compare = app.add_subcommand("compare", "tabulate method summaries side by side");
    compare->add_option("--reports", cp_summaries, "summary.json files")->required()
        ->expected(-1);
    compare->add_option("--baseline", cp_baseline, "method used for delta columns");
    compare->add_option("--out", cp_out, "output CSV (stdout when omitted)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*fit) return cmd_fit(samples_csv, profiles_out);
        if (*trace) return cmd_trace(trace_cfg, trace_cluster, trace_out);
        if (*place)
            return cmd_place(pl_cluster, pl_models, pl_profiles, pl_trace, pl_method, pl_out,
                             pl_alpha, pl_beta, pl_gt, pl_gl, pl_theta);
        if (*sim)
            return cmd_simulate(sm_manifest, sm_trace, sm_profiles, sm_cluster, sm_models,
                                sm_summary, sm_requests, sm_alpha, sm_beta, sm_gt, sm_gl);
        if (*sweep) return cmd_sweep(sw_spec);
        if (*compare) return cmd_compare(cp_summaries, cp_baseline, cp_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
