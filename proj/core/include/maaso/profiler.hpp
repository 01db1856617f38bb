#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "maaso/model.hpp"

namespace maaso {

/// Fitted throughput decay curve for one (model, strategy):
///   F(B, W) = T0 * (1 - delta * ln(epsilon + min(B, W)))
/// F is the per-request decode rate; the aggregate rate of an instance is
/// min(W, B) * F. The decay factor is clamped at floor_fraction to keep the
/// model positive outside the fitted range.
struct ThroughputModel {
    std::string model;
    ParallelismStrategy strategy;
    double t0 = 0;       // tokens/s serving one request
    double delta = 0;    // decay slope, >= 0
    double epsilon = 1;  // decay offset, >= 1
    double floor_fraction = 0.05;
};

/// Per-request decode rate at batch cap B and workload level W.
/// W = 0 is treated as W = 1; decay truncates once W reaches B.
double eval_throughput(const ThroughputModel& tm, int batch, int workload);

/// Aggregate instance rate: min(W, B) * eval_throughput.
double aggregate_throughput(const ThroughputModel& tm, int batch, int workload);

/// One measured point for fitting.
struct ProfileSample {
    std::string model;
    ParallelismStrategy strategy;
    int batch = 1;
    int workload = 1;
    double throughput = 0;  // tokens/s, per-request
};

struct FitError : std::runtime_error {
    enum Kind { InsufficientSamples, IllConditioned, MixedKeys } kind;
    FitError(Kind k, const std::string& what) : std::runtime_error(what), kind(k) {}
};

/// Least-squares fit of the decay curve from samples of one (model, strategy).
/// For each epsilon in {1, 2, 4, 8} the curve is linear in (T0, T0*delta)
/// against ln(epsilon + min(B, W)); the epsilon with the smallest residual sum
/// of squares wins. Requires >= 3 samples covering >= 2 distinct effective
/// workloads.
ThroughputModel fit_decay_params(const std::vector<ProfileSample>& samples);

/// Fitted curves keyed by (model, strategy).
class ProfileSet {
public:
    void put(ThroughputModel tm);
    bool contains(const std::string& model, const ParallelismStrategy& p) const;
    /// Throws std::out_of_range naming the missing (model, strategy).
    const ThroughputModel& at(const std::string& model, const ParallelismStrategy& p) const;
    const std::map<std::pair<std::string, ParallelismStrategy>, ThroughputModel>& all() const {
        return curves_;
    }

    /// Group raw samples by key and fit each group.
    static ProfileSet fit_all(const std::vector<ProfileSample>& samples);

private:
    std::map<std::pair<std::string, ParallelismStrategy>, ThroughputModel> curves_;
};

/// CSV with header: model,strategy,batch,workload,throughput
std::vector<ProfileSample> load_samples_csv(const std::string& path);
void save_samples_csv(const std::string& path, const std::vector<ProfileSample>& samples);

}  // namespace maaso
