#include "maaso/workload.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace maaso {

namespace detail {

double Sampler::uniform() {
    // 53 random bits -> (0, 1); never returns exactly 0
    double u = ((rng_() >> 11) + 0.5) * (1.0 / 9007199254740992.0);
    return u;
}

double Sampler::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double Sampler::normal() {
    double u1 = uniform();
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

double Sampler::gamma(double shape, double scale) {
    if (shape < 1.0) {
        // boost: Gamma(a) = Gamma(a+1) * U^(1/a)
        double u = uniform();
        return gamma(shape + 1.0, scale) * std::pow(u, 1.0 / shape);
    }
    double d = shape - 1.0 / 3.0;
    double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x = normal();
        double v = 1.0 + c * x;
        if (v <= 0) continue;
        v = v * v * v;
        double u = uniform();
        if (u < 1.0 - 0.0331 * x * x * x * x) return d * v * scale;
        if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v * scale;
    }
}

}  // namespace detail

void TraceConfig::check() const {
    if (classes.empty()) throw std::invalid_argument("trace needs at least one class");
    double total = 0;
    for (const auto& c : classes) {
        if (c.tokens_min <= 0 || c.tokens_max < c.tokens_min)
            throw std::invalid_argument("bad decode-length range");
        if (c.slo_min <= 0 || c.slo_max < c.slo_min)
            throw std::invalid_argument("bad slo-factor range");
        if (c.proportion < 0) throw std::invalid_argument("negative class proportion");
        total += c.proportion;
    }
    if (std::abs(total - 1.0) > 1e-9)
        throw std::invalid_argument("class proportions must sum to 1, got " + std::to_string(total));
    if (rate <= 0) throw std::invalid_argument("rate must be > 0");
    if (cv <= 0) throw std::invalid_argument("cv must be > 0");
    if (duration <= 0) throw std::invalid_argument("duration must be > 0");
    if (model_mix.empty()) throw std::invalid_argument("model_mix must name at least one model");
    double mix = 0;
    for (const auto& [m, p] : model_mix) {
        if (p < 0) throw std::invalid_argument("negative model probability for " + m);
        mix += p;
    }
    if (std::abs(mix - 1.0) > 1e-9)
        throw std::invalid_argument("model mix must sum to 1, got " + std::to_string(mix));
}

std::vector<Request> generate_trace(const TraceConfig& cfg, double time_slice) {
    cfg.check();
    detail::Sampler rng(cfg.seed);

    double shape = 1.0 / (cfg.cv * cfg.cv);
    double scale = cfg.cv * cfg.cv / cfg.rate;  // mean = shape*scale = 1/rate

    std::vector<Request> out;
    double t = 0;
    std::int64_t next_id = 0;
    for (;;) {
        double gap = rng.gamma(shape, scale);
        double arrival = t + gap;
        if (arrival <= t) arrival = std::nextafter(t, t + 1.0);  // keep strictly increasing
        if (arrival >= cfg.duration) break;
        t = arrival;

        // class by proportion
        double cu = rng.uniform();
        std::size_t ci = cfg.classes.size() - 1;
        double acc = 0;
        for (std::size_t i = 0; i < cfg.classes.size(); ++i) {
            acc += cfg.classes[i].proportion;
            if (cu <= acc) {
                ci = i;
                break;
            }
        }
        const TraceClass& cls = cfg.classes[ci];

        // model by mix (map iteration order is sorted, so this is stable)
        double mu = rng.uniform();
        std::string model = cfg.model_mix.rbegin()->first;
        double macc = 0;
        for (const auto& [m, p] : cfg.model_mix) {
            macc += p;
            if (mu <= macc) {
                model = m;
                break;
            }
        }

        Request r;
        r.id = next_id++;
        r.model = model;
        r.arrival = arrival;
        r.decode_tokens = std::floor(rng.uniform(cls.tokens_min, cls.tokens_max + 1.0));
        if (r.decode_tokens > cls.tokens_max) r.decode_tokens = cls.tokens_max;
        r.slo_factor = rng.uniform(cls.slo_min, cls.slo_max);
        r.deadline = derive_deadline(r.decode_tokens, r.slo_factor, time_slice);
        out.push_back(std::move(r));
    }
    return out;
}

void save_trace_csv(const std::string& path, const std::vector<Request>& trace) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write trace csv: " + path);
    out.precision(17);
    out << "id,arrival,model,decode_tokens,slo_factor,deadline\n";
    for (const auto& r : trace) {
        out << r.id << ',' << r.arrival << ',' << r.model << ',' << r.decode_tokens << ','
            << r.slo_factor << ',' << r.deadline << '\n';
    }
}

std::vector<Request> load_trace_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open trace csv: " + path);
    std::vector<Request> out;
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (header) {
            header = false;
            if (line.rfind("id", 0) == 0) continue;
        }
        std::istringstream ls(line);
        std::string id, arrival, model, tokens, slo, deadline;
        if (!std::getline(ls, id, ',') || !std::getline(ls, arrival, ',') ||
            !std::getline(ls, model, ',') || !std::getline(ls, tokens, ',') ||
            !std::getline(ls, slo, ',') || !std::getline(ls, deadline, ','))
            throw std::runtime_error("bad trace row in " + path + ": " + line);
        Request r;
        r.id = std::stoll(id);
        r.arrival = std::stod(arrival);
        r.model = model;
        r.decode_tokens = std::stod(tokens);
        r.slo_factor = std::stod(slo);
        r.deadline = std::stod(deadline);
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace maaso
