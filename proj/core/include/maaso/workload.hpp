#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "maaso/model.hpp"

namespace maaso {

/// One request class: uniform decode-length and SLO-factor ranges plus its
/// share of the trace.
struct TraceClass {
    double tokens_min = 0, tokens_max = 0;
    double slo_min = 0, slo_max = 0;
    double proportion = 1.0;
};

/// Trace synthesis parameters. Inter-arrival times are i.i.d. Gamma with
/// shape 1/cv^2 and scale cv^2/rate, so the mean inter-arrival is 1/rate and
/// the coefficient of variation is cv.
struct TraceConfig {
    int id = 0;
    std::vector<TraceClass> classes;
    double rate = 1.0;       // requests/s
    double cv = 1.0;         // coefficient of variation of inter-arrivals
    double duration = 60.0;  // s, arrivals generated while t < duration
    std::map<std::string, double> model_mix;  // model id -> probability
    std::uint64_t seed = 0;

    void check() const;  // throws std::invalid_argument on bad ranges
};

/// Deterministic per seed. Arrival times are strictly increasing; deadlines
/// are derived from time_slice.
std::vector<Request> generate_trace(const TraceConfig& cfg, double time_slice);

/// CSV with header: id,arrival,model,decode_tokens,slo_factor,deadline
void save_trace_csv(const std::string& path, const std::vector<Request>& trace);
std::vector<Request> load_trace_csv(const std::string& path);

namespace detail {

/// Deterministic sampling primitives on top of mt19937_64 (the engine is
/// fully specified by the standard; library distributions are not, so the
/// transforms are done by hand).
class Sampler {
public:
    explicit Sampler(std::uint64_t seed) : rng_(seed) {}
    double uniform();  // (0, 1)
    double uniform(double lo, double hi);
    double normal();   // standard normal, Box-Muller
    double gamma(double shape, double scale);  // Marsaglia-Tsang

private:
    std::mt19937_64 rng_;
};

}  // namespace detail

}  // namespace maaso
