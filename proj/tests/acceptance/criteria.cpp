// The ten acceptance criteria. Each returns pass/fail plus a one-line detail
// with the measured numbers, so failures are diagnosable from the log.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <regex>
#include <sstream>

#include "maaso/distributor.hpp"
#include "maaso/experiment.hpp"
#include "maaso/placer.hpp"

namespace acceptance {

struct Result {
    bool pass = false;
    std::string detail;
};

using namespace maaso;
namespace fs = std::filesystem;

namespace {

std::string fmt(double v, int precision = 4) {
    std::ostringstream os;
    os.precision(precision);
    os << v;
    return os.str();
}

// ----- shared desk trend runs (criteria 4, 5, 7) ---------------------------

struct MethodRuns {
    RunOutput maaso, sr, homogeneous;
};

const MethodRuns& trend_runs(int trace_row, double total_requests = 2000) {
    static std::map<std::pair<int, double>, MethodRuns> cache;
    auto key = std::make_pair(trace_row, total_requests);
    auto it = cache.find(key);
    if (it == cache.end()) {
        MethodRuns runs;
        runs.maaso = run_pipeline(
            preset::desk_experiment("maaso", trace_row, 8, 1, total_requests));
        runs.sr = run_pipeline(preset::desk_experiment("sr", trace_row, 8, 1, total_requests));
        runs.homogeneous = run_pipeline(
            preset::desk_experiment("homogeneous", trace_row, 8, 1, total_requests));
        it = cache.emplace(key, std::move(runs)).first;
    }
    return it->second;
}

}  // namespace

// --- 1: decay model -------------------------------------------------------

Result criterion_1() {
    std::mt19937_64 rng(101);
    std::uniform_real_distribution<double> t0_draw(10, 150), delta_draw(0.02, 0.15);
    const double eps_grid[4] = {1, 2, 4, 8};

    double worst_t0 = 0, worst_delta = 0;
    for (int trial = 0; trial < 50; ++trial) {
        ThroughputModel truth;
        truth.model = "m";
        truth.strategy = dp();
        truth.t0 = t0_draw(rng);
        truth.delta = delta_draw(rng);
        truth.epsilon = eps_grid[trial % 4];

        // truncation and monotone non-increase
        for (int b : {1, 4, 16, 64}) {
            double prev = eval_throughput(truth, b, 1);
            for (int w = 2; w <= 2 * b; ++w) {
                double cur = eval_throughput(truth, b, w);
                if (cur > prev + 1e-12)
                    return {false, "decay increased in W at B=" + std::to_string(b)};
                if (w >= b && std::abs(cur - eval_throughput(truth, b, b)) > 1e-12)
                    return {false, "truncation violated at B=" + std::to_string(b)};
                prev = cur;
            }
        }

        // noiseless round trip
        std::vector<ProfileSample> samples;
        for (int w : {1, 2, 4, 8, 16, 32, 64, 128})
            samples.push_back({"m", dp(), w, w, eval_throughput(truth, w, w)});
        ThroughputModel fitted = fit_decay_params(samples);
        double e_t0 = std::abs(fitted.t0 - truth.t0) / truth.t0;
        double e_delta = std::abs(fitted.delta - truth.delta) / truth.delta;
        worst_t0 = std::max(worst_t0, e_t0);
        worst_delta = std::max(worst_delta, e_delta);
        if (e_t0 > 0.01 || e_delta > 0.01 || fitted.epsilon != truth.epsilon)
            return {false, "fit round-trip off: T0 err " + fmt(e_t0) + ", delta err " +
                               fmt(e_delta) + ", eps " + fmt(fitted.epsilon) + " vs " +
                               fmt(truth.epsilon)};
    }
    return {true, "50 draws: worst T0 err " + fmt(worst_t0, 3) + ", worst delta err " +
                      fmt(worst_delta, 3) + " (<= 1%), truncation and monotonicity hold"};
}

// --- 2: serving score -----------------------------------------------------

Result criterion_2() {
    std::mt19937_64 rng(202);
    std::uniform_real_distribution<double> u(0, 1);

    // 20 randomized tuples against directly computed values
    for (int i = 0; i < 20; ++i) {
        SimParams p;
        p.alpha = 2.0 + 8.0 * u(rng);
        p.beta = u(rng);
        p.gamma_t = 10 + 400 * u(rng);
        p.gamma_l = 1 + 60 * u(rng);
        SimMetrics m;
        m.requests_total = 100;
        m.requests_admitted = 100;
        m.phi_s = u(rng);
        m.phi_t = 600 * u(rng);
        m.phi_l = 80 * u(rng);
        double expected = p.alpha * m.phi_s + p.beta * std::min(m.phi_t, p.gamma_t) / p.gamma_t +
                          (1 - p.beta) * std::max(p.gamma_l - m.phi_l, 0.0) / p.gamma_l;
        if (std::abs(serving_score(m, p) - expected) > 1e-9)
            return {false, "score mismatch on tuple " + std::to_string(i)};
    }

    // bounds under fuzzing
    for (int i = 0; i < 10000; ++i) {
        SimParams p;
        p.alpha = 0.1 + 12.0 * u(rng);
        p.beta = u(rng);
        p.gamma_t = 0.01 + 500 * u(rng);
        p.gamma_l = 0.01 + 100 * u(rng);
        SimMetrics m;
        m.requests_total = static_cast<std::int64_t>(u(rng) * 100);
        m.requests_admitted =
            std::min<std::int64_t>(m.requests_total, static_cast<std::int64_t>(u(rng) * 100));
        m.phi_s = m.requests_total == 0 ? 1.0 : u(rng);
        m.phi_t = 2000 * u(rng);
        m.phi_l = 200 * u(rng);
        double s = serving_score(m, p);
        if (s < -1e-12 || s > p.alpha + 1 + 1e-12)
            return {false, "score out of [0, alpha+1]: " + fmt(s)};
    }
    return {true, "20 hand-checked tuples match to 1e-9; 10k fuzzed tuples stay in [0, alpha+1]"};
}

// --- 3: dynamic-programming exactness --------------------------------------

Result criterion_3() {
    std::mt19937_64 rng(303);
    std::uniform_real_distribution<double> u(0, 1);
    std::uniform_int_distribution<int> gpu_draw(2, 8);

    int checked = 0;
    for (int trial = 0; trial < 100; ++trial) {
        ClusterSpec cluster;
        cluster.gpu_count = gpu_draw(rng);
        cluster.gpu_memory_bytes = 16e9;
        cluster.time_slice = 0.04;

        std::map<std::string, ModelSpec> models;
        ProfileSet profiles;
        for (int mi = 0; mi < 2; ++mi) {
            std::string id = mi == 0 ? "a" : "b";
            ModelSpec spec;
            spec.id = id;
            spec.weight_bytes = 1e9;
            for (const auto& p : {dp(), tp(2)}) {
                spec.baseline_throughput[p] = 1;
                spec.memory_per_gpu[p] = 2e9;
            }
            models[id] = spec;
            double dp_t0 = 20 + 20 * u(rng);
            ThroughputModel c1{id, dp(), dp_t0, 0.1 + 0.1 * u(rng), 1.0, 0.05};
            ThroughputModel c2{id, tp(2), dp_t0 * (1.8 + 0.5 * u(rng)), 0.12 + 0.08 * u(rng), 1.0,
                               0.05};
            profiles.put(c1);
            profiles.put(c2);
        }

        std::vector<Request> reqs;
        double t = 0;
        int n = 40 + static_cast<int>(40 * u(rng));
        for (int i = 0; i < n; ++i) {
            t += 0.5 * u(rng);
            bool tight = u(rng) < 0.5;
            Request r;
            r.id = i;
            r.model = u(rng) < 0.5 ? "a" : "b";
            r.arrival = t;
            r.decode_tokens = std::floor(100 + 300 * u(rng));
            r.slo_factor = tight ? 0.8 + 0.2 * u(rng) : 1.2 + 0.3 * u(rng);
            r.deadline = derive_deadline(r.decode_tokens, r.slo_factor, cluster.time_slice);
            reqs.push_back(r);
        }

        SimParams sim;
        sim.gamma_t = 1500;
        sim.gamma_l = 40;
        PlacerOptions options;
        std::vector<int> grid{2, 8, 32};
        std::vector<ParallelismStrategy> strategies{dp(), tp(2)};

        auto sol = partition_resources(cluster, reqs, models, strategies, grid, profiles, sim,
                                       options);

        // independent scan over deterministically rebuilt solution arrays
        SloAwareDistributor scorer(options.slo_split, false);
        std::vector<Request> rt, rl;
        for (const auto& r : reqs) (options.slo_split.side(r) == 0 ? rt : rl).push_back(r);
        if (rt.empty() || rl.empty()) {
            if (sol.groups.size() != 1) return {false, "expected single group on trial " +
                                                           std::to_string(trial)};
            continue;
        }
        int gl_max = static_cast<int>(std::floor(static_cast<double>(rl.size()) /
                                                 static_cast<double>(reqs.size()) *
                                                 cluster.gpu_count));
        auto cl = pruned_configs(models, strategies, grid, profiles, cluster, rl);
        auto ct = pruned_configs(models, strategies, grid, profiles, cluster, rt);
        auto arr_l = deploy_instances(rl, gl_max, models, cl, profiles, cluster, sim, scorer,
                                      options);
        auto arr_t = deploy_instances(rt, cluster.gpu_count, models, ct, profiles, cluster, sim,
                                      scorer, options);
        auto ca = pruned_configs(models, strategies, grid, profiles, cluster, reqs);
        auto arr_a = deploy_instances(reqs, cluster.gpu_count, models, ca, profiles, cluster, sim,
                                      scorer, options);
        double expected = *std::max_element(arr_a.score.begin(), arr_a.score.end());
        int expected_gl = -1;
        for (int gl = 1; gl <= gl_max; ++gl) {
            double v = arr_t.score[static_cast<std::size_t>(cluster.gpu_count - gl)] +
                       arr_l.score[static_cast<std::size_t>(gl)];
            if (v > expected) {
                expected = v;
                expected_gl = gl;
            }
        }
        if (std::abs(sol.phi_opt - expected) > 1e-12)
            return {false, "phi_opt mismatch on trial " + std::to_string(trial) + ": " +
                               fmt(sol.phi_opt, 10) + " vs " + fmt(expected, 10)};
        int got_gl = sol.groups.size() == 2 ? sol.groups[1].gpu_count : -1;
        if (got_gl != expected_gl)
            return {false, "partition mismatch on trial " + std::to_string(trial) + ": g_l " +
                               std::to_string(got_gl) + " vs " + std::to_string(expected_gl)};
        ++checked;
    }
    return {true, "100 randomized instances, " + std::to_string(checked) +
                      " non-degenerate partitions, zero mismatches vs brute-force scan"};
}

// --- 4 and 5: desk-scale trends --------------------------------------------

Result criterion_4() {
    std::string detail;
    bool pass = true;
    for (int row : {3, 4}) {
        const auto& runs = trend_runs(row);
        double m = runs.maaso.metrics.phi_s;
        double s = runs.sr.metrics.phi_s;
        double h = runs.homogeneous.metrics.phi_s;
        double gap = m - std::max(s, h);
        pass = pass && gap >= 0.10;
        detail += "trace" + std::to_string(row) + ": maaso " + fmt(m, 3) + ", sr " + fmt(s, 3) +
                  ", homog " + fmt(h, 3) + ", gap " + fmt(gap * 100, 3) + "pts; ";
    }
    return {pass, detail + "(need >= 10pts on both)"};
}

Result criterion_5() {
    std::string detail;
    bool pass = true;
    for (int row : {3, 4}) {
        const auto& runs = trend_runs(row);
        double m = runs.maaso.metrics.phi_l;
        double best = std::min(runs.sr.metrics.phi_l, runs.homogeneous.metrics.phi_l);
        pass = pass && m <= 0.7 * best;
        detail += "trace" + std::to_string(row) + ": maaso " + fmt(m, 3) + "s vs best baseline " +
                  fmt(best, 3) + "s (ratio " + fmt(best > 0 ? m / best : 0, 3) + "); ";
    }
    return {pass, detail + "(need <= 0.7x on both)"};
}

// --- 6: no cascaded timeouts under overflow protection ----------------------

Result criterion_6() {
    long admitted_total = 0;

    // desk-preset maaso runs
    for (int row : {3, 4}) {
        const auto& runs = trend_runs(row);
        for (const auto& rec : runs.maaso.metrics.records) {
            if (rec.outcome == Outcome::Rejected) continue;
            ++admitted_total;
            if (rec.outcome != Outcome::Met)
                return {false, "desk trace " + std::to_string(row) + ": admitted request " +
                                   std::to_string(rec.id) + " missed its deadline"};
        }
    }

    // 1000 fuzzed mini-traces with heterogeneous lengths and bursts
    std::mt19937_64 rng(606);
    std::uniform_real_distribution<double> u(0, 1);
    for (int trial = 0; trial < 1000; ++trial) {
        ClusterSpec cluster;
        cluster.gpu_count = 4;
        cluster.gpu_memory_bytes = 16e9;
        cluster.time_slice = 0.02 + 0.06 * u(rng);

        std::map<std::string, ModelSpec> models;
        ProfileSet profiles;
        models["m"] = ModelSpec{};
        models["m"].id = "m";
        models["m"].weight_bytes = 1e9;
        int n_inst = 1 + static_cast<int>(u(rng) * 3);
        std::vector<Instance> instances;
        int gpu = 0;
        for (int i = 0; i < n_inst; ++i) {
            ParallelismStrategy strat = u(rng) < 0.5 ? dp() : tp(2);
            if (gpu + strat.degree > cluster.gpu_count) strat = dp();
            if (gpu + strat.degree > cluster.gpu_count) break;
            models["m"].baseline_throughput[strat] = 1;
            models["m"].memory_per_gpu[strat] = 2e9;
            if (!profiles.contains("m", strat)) {
                ThroughputModel tm{"m", strat, 20 + 60 * u(rng), 0.25 * u(rng),
                                   1.0 + 7.0 * u(rng), 0.05};
                profiles.put(tm);
            }
            int batch = 1 << static_cast<int>(u(rng) * 4);  // 1..8
            Instance inst;
            inst.id = i;
            inst.config = {"m", strat, batch};
            for (int d = 0; d < strat.degree; ++d) inst.gpus.push_back(gpu++);
            instances.push_back(inst);
        }

        std::vector<Request> reqs;
        double t = 0;
        int n = 20 + static_cast<int>(40 * u(rng));
        for (int i = 0; i < n; ++i) {
            if (u(rng) < 0.6) t += 0.4 * u(rng);  // bursts: repeated near-zero gaps
            Request r;
            r.id = i;
            r.model = "m";
            r.arrival = t;
            r.decode_tokens = std::floor(10 + 990 * u(rng));  // wildly heterogeneous
            r.slo_factor = 0.6 + 2.0 * u(rng);
            r.deadline = derive_deadline(r.decode_tokens, r.slo_factor, cluster.time_slice);
            reqs.push_back(r);
        }

        SloAwareDistributor policy({1.1}, true);
        SimParams sim;
        sim.gamma_t = 100;
        sim.gamma_l = 10;
        auto metrics = simulate(instances, reqs, policy, profiles, models, cluster, sim);
        for (const auto& rec : metrics.records) {
            if (rec.outcome == Outcome::Rejected) continue;
            ++admitted_total;
            if (rec.outcome != Outcome::Met)
                return {false, "fuzz trial " + std::to_string(trial) + ": admitted request " +
                                   std::to_string(rec.id) + " missed (deadline " +
                                   fmt(rec.deadline) + ", completion " + fmt(rec.completion) +
                                   ")"};
        }
    }
    return {true, std::to_string(admitted_total) +
                      " admitted requests across desk runs and 1000 fuzzed traces, zero misses"};
}

// --- 7: performance convergence under 2x load -------------------------------

Result criterion_7() {
    const auto& base = trend_runs(4, 2000);
    const auto& doubled = trend_runs(4, 4000);
    double gap1 = base.maaso.metrics.phi_s - base.sr.metrics.phi_s;
    double gap2 = doubled.maaso.metrics.phi_s - doubled.sr.metrics.phi_s;
    bool pass = gap2 < 0.05;
    return {pass, "maaso-sr gap: " + fmt(gap1 * 100, 3) + "pts at 2000 req, " +
                      fmt(gap2 * 100, 3) + "pts at 4000 req (need < 5pts at 2x)" +
                      (gap2 < gap1 ? "; gap shrinks" : "; gap does not shrink")};
}

// --- 8: solver overhead -----------------------------------------------------

Result criterion_8() {
    // best of two runs per method, so scheduler noise cannot decide the check
    auto solve = [](const char* method) {
        auto a = run_pipeline(preset::desk_experiment(method, 4, 16, 2, 4000));
        auto b = run_pipeline(preset::desk_experiment(method, 4, 16, 2, 4000));
        if (b.placement.stats.wall_seconds < a.placement.stats.wall_seconds) return b;
        return a;
    };
    auto maaso_run = solve("maaso");
    auto homog_run = solve("homogeneous");
    double m = maaso_run.placement.stats.wall_seconds;
    double h = homog_run.placement.stats.wall_seconds;
    bool pass = m < h;
    return {pass, "16 GPUs, 2 models: maaso solver " + fmt(m, 4) + "s (" +
                      std::to_string(maaso_run.placement.stats.simulations) +
                      " sims) vs homogeneous joint search " + fmt(h, 4) + "s (" +
                      std::to_string(homog_run.placement.stats.simulations) +
                      " sims), ratio " + fmt(h > 0 ? m / h : 0, 3)};
}

// --- 9: determinism ----------------------------------------------------------

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string mask_walltime(std::string text) {
    static const std::regex wall("\"wall_time_s\": [0-9.eE+-]+");
    return std::regex_replace(text, wall, "\"wall_time_s\": X");
}

}  // namespace

Result criterion_9() {
    auto spec = preset::desk_experiment("maaso", 4, 6, 1, 600);
    auto base = fs::temp_directory_path() / "maaso_acceptance_det";
    fs::remove_all(base);
    auto dir_a = base / "a";
    auto dir_b = base / "b";
    run_experiment(spec, dir_a.string());
    run_experiment(spec, dir_b.string());

    for (const auto& name :
         {"manifest.json", "requests.csv", "summary.json", "trace.csv", "profiles.json"}) {
        std::string a = slurp(dir_a / name);
        std::string b = slurp(dir_b / name);
        if (a.empty()) return {false, std::string(name) + " missing or empty"};
        bool same = std::string_view(name).find(".json") != std::string_view::npos
                        ? mask_walltime(a) == mask_walltime(b)
                        : a == b;
        if (!same) return {false, std::string(name) + " differs between identical runs"};
    }
    return {true, "two identical maaso pipeline runs wrote byte-identical outputs "
                  "(solver wall-time field masked)"};
}

// --- 10: trace statistics ----------------------------------------------------

Result criterion_10() {
    auto models = preset::desk_models(1);
    auto cfg = preset::desk_trace(4, models, /*total_requests=*/100000, /*duration=*/1000,
                                  /*cv=*/2.0, /*seed=*/1234);
    auto trace = generate_trace(cfg, 0.0381);
    if (trace.size() < 95000)
        return {false, "expected ~100k arrivals, got " + std::to_string(trace.size())};

    double sum = 0, sum2 = 0;
    for (std::size_t i = 1; i < trace.size(); ++i) {
        double gap = trace[i].arrival - trace[i - 1].arrival;
        sum += gap;
        sum2 += gap * gap;
    }
    double n = static_cast<double>(trace.size() - 1);
    double mean = sum / n;
    double cv = std::sqrt(std::max(sum2 / n - mean * mean, 0.0)) / mean;
    double mean_err = std::abs(mean - 1.0 / cfg.rate) * cfg.rate;
    double cv_err = std::abs(cv - cfg.cv) / cfg.cv;
    if (mean_err > 0.02)
        return {false, "inter-arrival mean off by " + fmt(mean_err * 100, 3) + "%"};
    if (cv_err > 0.025) return {false, "inter-arrival CV off by " + fmt(cv_err * 100, 3) + "%"};

    long tight = 0, relaxed = 0;
    for (const auto& r : trace) {
        bool c1 = r.decode_tokens >= 300 && r.decode_tokens <= 500 && r.slo_factor >= 0.8 &&
                  r.slo_factor <= 1.0;
        bool c2 = r.decode_tokens >= 600 && r.decode_tokens <= 1000 && r.slo_factor >= 1.2 &&
                  r.slo_factor <= 1.5;
        if (!c1 && !c2)
            return {false, "request " + std::to_string(r.id) + " outside both class ranges"};
        (c1 ? tight : relaxed) += 1;
    }
    double expected = static_cast<double>(tight + relaxed) / 2.0;
    double chi2 = (tight - expected) * (tight - expected) / expected +
                  (relaxed - expected) * (relaxed - expected) / expected;
    if (chi2 > 6.635)  // df=1 critical value at p=0.01
        return {false, "class proportions fail chi-square: " + fmt(chi2, 4)};

    return {true, "n=" + std::to_string(trace.size()) + ": mean err " + fmt(mean_err * 100, 3) +
                      "%, CV err " + fmt(cv_err * 100, 3) + "%, ranges exact, chi2 " +
                      fmt(chi2, 3)};
}

}  // namespace acceptance
