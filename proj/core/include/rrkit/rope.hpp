#pragma once

#include <cstddef>
#include <vector>

#include "rrkit/embedding.hpp"

namespace rrkit {

/// Rotary position embedding parameters. Global and local attention layers
/// use different frequency bases; context scaling adjusts only the global one
/// while the local base stays at the 10k default.
struct RopeConfig {
    std::size_t head_dim = 64;
    double global_theta = 80000.0;
    double local_theta = 10000.0;
};

enum class AttentionKind { Global, Local };

/// Per-layer global/local flags.
struct LayerSchedule {
    std::vector<AttentionKind> flags;

    std::size_t size() const noexcept { return flags.size(); }
    bool is_global(std::size_t layer) const { return flags.at(layer) == AttentionKind::Global; }
    std::size_t global_count() const;
};

/// freq[k] = theta^(-2k / head_dim) for k = 0 .. head_dim/2 - 1.
std::vector<double> rope_frequencies(const RopeConfig& cfg, AttentionKind which);

/// Rotates each adjacent pair (v[2k], v[2k+1]) by angle position * freq[k].
/// Norm-preserving; pairwise dot products depend only on relative position.
Embedding apply_rope(const Embedding& v, std::size_t position, const std::vector<double>& freqs);

/// Global attention every third layer starting at `offset` (default 0), local
/// elsewhere.
LayerSchedule attention_schedule(std::size_t num_layers, std::size_t offset = 0);

/// Returns cfg with the global base replaced; the local base is untouched.
RopeConfig scale_theta(const RopeConfig& cfg, double new_global_theta);

} // namespace rrkit
