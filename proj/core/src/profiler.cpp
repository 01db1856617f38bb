#include "maaso/profiler.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace maaso {

double eval_throughput(const ThroughputModel& tm, int batch, int workload) {
    int w = std::max(workload, 1);
    int effective = std::min(batch, w);  // batch cap truncates the decay
    double decay = 1.0 - tm.delta * std::log(tm.epsilon + static_cast<double>(effective));
    return tm.t0 * std::max(decay, tm.floor_fraction);
}

double aggregate_throughput(const ThroughputModel& tm, int batch, int workload) {
    int w = std::max(workload, 1);
    return std::min(batch, w) * eval_throughput(tm, batch, workload);
}

namespace {

struct LinearFit {
    double t0 = 0;
    double delta = 0;
    double rss = 0;
};

// Ordinary least squares of F = a - b*L with L = ln(eps + w); a = T0, b = T0*delta.
LinearFit fit_for_epsilon(const std::vector<std::pair<int, double>>& points, double eps) {
    double n = static_cast<double>(points.size());
    double sl = 0, sf = 0, sll = 0, slf = 0;
    for (const auto& [w, f] : points) {
        double l = std::log(eps + static_cast<double>(w));
        sl += l;
        sf += f;
        sll += l * l;
        slf += l * f;
    }
    double det = n * sll - sl * sl;
    double b = -(n * slf - sl * sf) / det;  // slope of F vs L is -b
    double a = (sf + b * sl) / n;
    LinearFit out;
    out.t0 = a;
    out.delta = (a != 0) ? b / a : 0;
    for (const auto& [w, f] : points) {
        double pred = a - b * std::log(eps + static_cast<double>(w));
        out.rss += (f - pred) * (f - pred);
    }
    return out;
}

}  // namespace

ThroughputModel fit_decay_params(const std::vector<ProfileSample>& samples) {
    if (samples.size() < 3)
        throw FitError(FitError::InsufficientSamples,
                       "need at least 3 samples, got " + std::to_string(samples.size()));

    const std::string& model = samples.front().model;
    const ParallelismStrategy& strat = samples.front().strategy;
    std::vector<std::pair<int, double>> points;  // (effective workload, throughput)
    std::set<int> distinct;
    for (const auto& s : samples) {
        if (s.model != model || s.strategy != strat)
            throw FitError(FitError::MixedKeys,
                           "samples mix (model, strategy) keys: " + model + "/" + strat.name() +
                               " vs " + s.model + "/" + s.strategy.name());
        if (s.throughput <= 0)
            throw FitError(FitError::IllConditioned, "non-positive throughput sample");
        int w = std::min(s.batch, std::max(s.workload, 1));
        points.emplace_back(w, s.throughput);
        distinct.insert(w);
    }
    if (distinct.size() < 2)
        throw FitError(FitError::IllConditioned,
                       "all samples share effective workload " + std::to_string(*distinct.begin()));

    ThroughputModel best;
    best.model = model;
    best.strategy = strat;
    double best_rss = -1;
    for (double eps : {1.0, 2.0, 4.0, 8.0}) {
        LinearFit f = fit_for_epsilon(points, eps);
        if (f.t0 <= 0) continue;
        if (best_rss < 0 || f.rss < best_rss) {
            best_rss = f.rss;
            best.t0 = f.t0;
            best.delta = std::max(f.delta, 0.0);
            best.epsilon = eps;
        }
    }
    if (best_rss < 0)
        throw FitError(FitError::IllConditioned, "fit produced no positive-T0 solution");
    return best;
}

void ProfileSet::put(ThroughputModel tm) {
    curves_[{tm.model, tm.strategy}] = std::move(tm);
}

bool ProfileSet::contains(const std::string& model, const ParallelismStrategy& p) const {
    return curves_.count({model, p}) > 0;
}

const ThroughputModel& ProfileSet::at(const std::string& model,
                                      const ParallelismStrategy& p) const {
    auto it = curves_.find({model, p});
    if (it == curves_.end())
        throw std::out_of_range("no profile fitted for (" + model + ", " + p.name() + ")");
    return it->second;
}

ProfileSet ProfileSet::fit_all(const std::vector<ProfileSample>& samples) {
    std::map<std::pair<std::string, ParallelismStrategy>, std::vector<ProfileSample>> groups;
    for (const auto& s : samples) groups[{s.model, s.strategy}].push_back(s);
    ProfileSet out;
    for (auto& [key, group] : groups) out.put(fit_decay_params(group));
    return out;
}

std::vector<ProfileSample> load_samples_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open samples csv: " + path);
    std::vector<ProfileSample> out;
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (header) {  // expect model,strategy,batch,workload,throughput
            header = false;
            if (line.rfind("model", 0) == 0) continue;
        }
        std::istringstream ls(line);
        std::string model, strat, batch, workload, thr;
        if (!std::getline(ls, model, ',') || !std::getline(ls, strat, ',') ||
            !std::getline(ls, batch, ',') || !std::getline(ls, workload, ',') ||
            !std::getline(ls, thr, ','))
            throw std::runtime_error("bad sample row in " + path + ": " + line);
        ProfileSample s;
        s.model = model;
        s.strategy = ParallelismStrategy::parse(strat);
        s.batch = std::stoi(batch);
        s.workload = std::stoi(workload);
        s.throughput = std::stod(thr);
        out.push_back(std::move(s));
    }
    return out;
}

void save_samples_csv(const std::string& path, const std::vector<ProfileSample>& samples) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write samples csv: " + path);
    out << "model,strategy,batch,workload,throughput\n";
    for (const auto& s : samples) {
        out << s.model << ',' << s.strategy.name() << ',' << s.batch << ',' << s.workload << ','
            << s.throughput << '\n';
    }
}

}  // namespace maaso
