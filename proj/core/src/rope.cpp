#include "rrkit/rope.hpp"

#include <cmath>
#include <string>

#include "rrkit/errors.hpp"

namespace rrkit {

std::size_t LayerSchedule::global_count() const {
    std::size_t n = 0;
    for (AttentionKind k : flags) {
        if (k == AttentionKind::Global) ++n;
    }
    return n;
}

std::vector<double> rope_frequencies(const RopeConfig& cfg, AttentionKind which) {
    if (cfg.head_dim == 0 || cfg.head_dim % 2 != 0) {
        throw InvalidConfig("rope_frequencies: head_dim must be a positive even number");
    }
    const double theta = which == AttentionKind::Global ? cfg.global_theta : cfg.local_theta;
    if (!(theta > 0.0)) {
        throw InvalidConfig("rope_frequencies: theta must be positive");
    }
    std::vector<double> freqs(cfg.head_dim / 2);
    for (std::size_t k = 0; k < freqs.size(); ++k) {
        freqs[k] = std::pow(theta, -2.0 * static_cast<double>(k) / static_cast<double>(cfg.head_dim));
    }
    return freqs;
}

Embedding apply_rope(const Embedding& v, std::size_t position, const std::vector<double>& freqs) {
    if (v.dim() != 2 * freqs.size()) {
        throw InvalidInput("apply_rope: vector dimension " + std::to_string(v.dim()) +
                           " does not match 2 * " + std::to_string(freqs.size()) + " frequencies");
    }
    Embedding out = v;
    for (std::size_t k = 0; k < freqs.size(); ++k) {
        const double angle = static_cast<double>(position) * freqs[k];
        const double c = std::cos(angle);
        const double s = std::sin(angle);
        const double x = v.values[2 * k];
        const double y = v.values[2 * k + 1];
        out.values[2 * k] = x * c - y * s;
        out.values[2 * k + 1] = x * s + y * c;
    }
    return out;
}

LayerSchedule attention_schedule(std::size_t num_layers, std::size_t offset) {
    if (num_layers == 0) {
        throw InvalidConfig("attention_schedule: need at least one layer");
    }
    LayerSchedule sched;
    sched.flags.resize(num_layers);
    for (std::size_t i = 0; i < num_layers; ++i) {
        sched.flags[i] = (i % 3 == offset % 3) ? AttentionKind::Global : AttentionKind::Local;
    }
    return sched;
}

RopeConfig scale_theta(const RopeConfig& cfg, double new_global_theta) {
    if (!(new_global_theta > 0.0)) {
        throw InvalidConfig("scale_theta: theta must be positive");
    }
    RopeConfig out = cfg;
    out.global_theta = new_global_theta;
    return out;
}

} // namespace rrkit
