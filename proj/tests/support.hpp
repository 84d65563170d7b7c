#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "rrkit/embedding.hpp"
#include "rrkit/random.hpp"

namespace testsupport {

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
    return rrkit::detail::uniform_real(rng, lo, hi);
}

inline rrkit::Embedding random_embedding(std::mt19937_64& rng, std::size_t dim, double lo = -1.0,
                                         double hi = 1.0) {
    rrkit::Embedding e;
    e.values.resize(dim);
    double norm = 0.0;
    do {
        norm = 0.0;
        for (auto& x : e.values) {
            x = uniform(rng, lo, hi);
            norm += x * x;
        }
    } while (norm == 0.0);
    return e;
}

/// Central finite differences of a scalar function over a flat parameter
/// vector accessed through get/set callbacks.
struct GradCheck {
    double max_rel_err = 0.0;
    std::size_t coords = 0;
};

inline GradCheck finite_difference_check(const std::function<double()>& value,
                                         const std::function<double&(std::size_t)>& param,
                                         const std::vector<double>& analytic, double h = 1e-5,
                                         double denom_floor = 1e-6) {
    GradCheck result;
    result.coords = analytic.size();
    for (std::size_t i = 0; i < analytic.size(); ++i) {
        double& x = param(i);
        const double saved = x;
        x = saved + h;
        const double up = value();
        x = saved - h;
        const double down = value();
        x = saved;
        const double fd = (up - down) / (2.0 * h);
        const double denom = std::max({std::abs(fd), std::abs(analytic[i]), denom_floor});
        result.max_rel_err = std::max(result.max_rel_err, std::abs(fd - analytic[i]) / denom);
    }
    return result;
}

} // namespace testsupport
