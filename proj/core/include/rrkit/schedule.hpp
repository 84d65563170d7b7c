#pragma once

#include <cmath>
#include <cstdint>

#include "rrkit/errors.hpp"

namespace rrkit {

/// Warmup-stable-decay learning rate schedule. Linear warmup to peak_lr,
/// a constant segment at peak_lr, then a 1-sqrt decay
///   lr(t) = decay_start_lr * (1 - sqrt(t / decay_steps))
/// for t steps into the decay segment, clamped at zero past its end.
/// Defaults carry the usual 8e-4 peak and 3e-4 decay start.
struct LrScheduleConfig {
    double peak_lr = 8e-4;
    std::int64_t warmup_steps = 0;
    std::int64_t stable_steps = 0;
    std::int64_t decay_steps = 0;
    double decay_start_lr = 3e-4;
};

inline double lr_at_step(std::int64_t step, const LrScheduleConfig& cfg) {
    if (!(cfg.peak_lr > 0.0) || !(cfg.decay_start_lr > 0.0)) {
        throw InvalidConfig("lr_at_step: learning rates must be positive");
    }
    if (cfg.warmup_steps < 0 || cfg.stable_steps < 0 || cfg.decay_steps < 0 ||
        cfg.warmup_steps + cfg.stable_steps + cfg.decay_steps <= 0) {
        throw InvalidConfig("lr_at_step: schedule must span at least one step");
    }
    if (step < 0) {
        step = 0;
    }
    if (step < cfg.warmup_steps) {
        return cfg.peak_lr * static_cast<double>(step) / static_cast<double>(cfg.warmup_steps);
    }
    step -= cfg.warmup_steps;
    if (step < cfg.stable_steps) {
        return cfg.peak_lr;
    }
    step -= cfg.stable_steps;
    if (step >= cfg.decay_steps) {
        return 0.0;
    }
    const double frac = static_cast<double>(step) / static_cast<double>(cfg.decay_steps);
    return cfg.decay_start_lr * (1.0 - std::sqrt(frac));
}

} // namespace rrkit
