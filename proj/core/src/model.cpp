#include "maaso/model.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace maaso {

std::string ParallelismStrategy::name() const {
    switch (kind) {
        case StrategyKind::DP: return "dp";
        case StrategyKind::TP: return "tp-" + std::to_string(degree);
        case StrategyKind::PP: return "pp-" + std::to_string(degree);
    }
    return "?";
}

ParallelismStrategy ParallelismStrategy::parse(const std::string& text) {
    if (text == "dp" || text == "dp-1") return {StrategyKind::DP, 1};
    auto dash = text.find('-');
    if (dash == std::string::npos)
        throw std::invalid_argument("bad strategy: '" + text + "'");
    std::string head = text.substr(0, dash);
    int deg = 0;
    try {
        deg = std::stoi(text.substr(dash + 1));
    } catch (const std::exception&) {
        throw std::invalid_argument("bad strategy degree: '" + text + "'");
    }
    if (deg < 1) throw std::invalid_argument("strategy degree must be >= 1: '" + text + "'");
    if (head == "tp") return {StrategyKind::TP, deg};
    if (head == "pp") return {StrategyKind::PP, deg};
    throw std::invalid_argument("bad strategy kind: '" + text + "'");
}

ParallelismStrategy dp() { return {StrategyKind::DP, 1}; }
ParallelismStrategy tp(int degree) { return {StrategyKind::TP, degree}; }
ParallelismStrategy pp(int degree) { return {StrategyKind::PP, degree}; }

bool ModelSpec::supports(const ParallelismStrategy& p) const {
    return baseline_throughput.count(p) > 0 && memory_per_gpu.count(p) > 0;
}

double ModelSpec::gpu_memory_bytes(const ParallelismStrategy& p, int batch) const {
    auto base = memory_per_gpu.find(p);
    if (base == memory_per_gpu.end())
        throw std::invalid_argument("model " + id + " has no memory entry for " + p.name());
    double kv = 0;
    if (auto it = kv_bytes_per_slot.find(p); it != kv_bytes_per_slot.end()) kv = it->second;
    return base->second + kv * batch;
}

void ModelSpec::check() const {
    for (const auto& [p, mem] : memory_per_gpu) {
        if (mem * p.degree < weight_bytes) {
            std::ostringstream os;
            os << "model " << id << ": " << p.name() << " per-GPU memory " << mem
               << " * degree " << p.degree << " cannot hold weights " << weight_bytes;
            throw std::invalid_argument(os.str());
        }
    }
    for (const auto& [p, t0] : baseline_throughput) {
        if (t0 <= 0)
            throw std::invalid_argument("model " + id + ": baseline throughput for " + p.name() +
                                        " must be positive");
        if (p.kind == StrategyKind::DP && p.degree != 1)
            throw std::invalid_argument("model " + id + ": dp strategy must have degree 1");
    }
}

void ClusterSpec::check() const {
    if (gpu_count < 1) throw std::invalid_argument("cluster gpu_count must be >= 1");
    if (time_slice <= 0) throw std::invalid_argument("cluster time_slice must be > 0");
}

double derive_deadline(double decode_tokens, double slo_factor, double time_slice) {
    if (decode_tokens <= 0) throw std::invalid_argument("decode_tokens must be > 0");
    if (slo_factor <= 0) throw std::invalid_argument("slo_factor must be > 0");
    if (time_slice <= 0) throw std::invalid_argument("time_slice must be > 0");
    return decode_tokens * slo_factor * time_slice;
}

void derive_deadlines(std::vector<Request>& requests, double time_slice) {
    for (auto& r : requests)
        r.deadline = derive_deadline(r.decode_tokens, r.slo_factor, time_slice);
}

ValidationResult validate_placement(const std::vector<Instance>& instances,
                                    const std::map<std::string, ModelSpec>& models,
                                    const ClusterSpec& cluster) {
    ValidationResult res;
    std::map<int, int> gpu_owner;  // gpu id -> instance id
    long total_gpus = 0;

    for (const auto& inst : instances) {
        const auto& cfg = inst.config;
        if ((int)inst.gpus.size() != cfg.strategy.degree) {
            res.violations.push_back({ViolationKind::DegreeMismatch, inst.id,
                                      cfg.strategy.name() + " instance holds " +
                                          std::to_string(inst.gpus.size()) + " gpus"});
        }
        total_gpus += cfg.strategy.degree;

        for (int g : inst.gpus) {
            if (g < 0 || g >= cluster.gpu_count) {
                res.violations.push_back({ViolationKind::GpuOutOfRange, inst.id,
                                          "gpu " + std::to_string(g)});
                continue;
            }
            auto [it, fresh] = gpu_owner.emplace(g, inst.id);
            if (!fresh) {
                res.violations.push_back({ViolationKind::GpuShared, inst.id,
                                          "gpu " + std::to_string(g) + " also used by instance " +
                                              std::to_string(it->second)});
            }
        }

        auto m = models.find(cfg.model);
        if (m == models.end()) {
            res.violations.push_back({ViolationKind::UnknownModel, inst.id, cfg.model});
            continue;
        }
        double need = m->second.gpu_memory_bytes(cfg.strategy, cfg.batch_size);
        if (need > cluster.gpu_memory_bytes) {
            std::ostringstream os;
            os << cfg.model << " " << cfg.strategy.name() << " B=" << cfg.batch_size << " needs "
               << need << " bytes/GPU, cluster GPUs have " << cluster.gpu_memory_bytes;
            res.violations.push_back({ViolationKind::MemoryExceeded, inst.id, os.str()});
        }
    }

    if (total_gpus > cluster.gpu_count) {
        res.violations.push_back({ViolationKind::GpuCountExceeded, -1,
                                  std::to_string(total_gpus) + " > " +
                                      std::to_string(cluster.gpu_count)});
    }
    return res;
}

}  // namespace maaso
