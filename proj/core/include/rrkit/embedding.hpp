#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "rrkit/errors.hpp"

namespace rrkit {

/// Fixed-dimension dense vector. The unit all similarity math consumes.
struct Embedding {
    std::vector<double> values;

    Embedding() = default;
    explicit Embedding(std::vector<double> v) : values(std::move(v)) {}

    std::size_t dim() const noexcept { return values.size(); }

    double norm() const {
        double s = 0.0;
        for (double x : values) {
            s += x * x;
        }
        return std::sqrt(s);
    }
};

inline double dot(const Embedding& u, const Embedding& v) {
    double s = 0.0;
    for (std::size_t i = 0; i < u.values.size(); ++i) {
        s += u.values[i] * v.values[i];
    }
    return s;
}

/// Plain cosine similarity. Rejects dimension mismatches and zero-norm inputs.
inline double cosine_similarity(const Embedding& u, const Embedding& v) {
    if (u.dim() != v.dim()) {
        throw InvalidInput("cosine_similarity: dimension mismatch (" +
                           std::to_string(u.dim()) + " vs " + std::to_string(v.dim()) + ")");
    }
    if (u.dim() == 0) {
        throw InvalidInput("cosine_similarity: empty vectors");
    }
    const double nu = u.norm();
    const double nv = v.norm();
    if (nu == 0.0 || nv == 0.0) {
        throw InvalidInput("cosine_similarity: zero-norm input");
    }
    return dot(u, v) / (nu * nv);
}

/// Temperature-scaled cosine similarity s(u, v) = cos(u, v) / tau.
inline double scaled_similarity(const Embedding& u, const Embedding& v, double tau) {
    if (!(tau > 0.0)) {
        throw InvalidConfig("scaled_similarity: tau must be positive");
    }
    return cosine_similarity(u, v) / tau;
}

} // namespace rrkit
