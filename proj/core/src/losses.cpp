#include "rrkit/losses.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rrkit/errors.hpp"

namespace rrkit {

namespace {

double log_add_exp(double a, double b) {
    const double hi = std::max(a, b);
    const double lo = std::min(a, b);
    return hi + std::log1p(std::exp(lo - hi));
}

// One exp term of a partition function: w * e^{s(a,b)} where a, b address
// embeddings in the batch. slot < 0 addresses queries[idx], otherwise
// passages[idx][slot].
struct SimTerm {
    double scaled_sim;
    double weight;
    int a_idx;
    int a_slot;
    int b_idx;
    int b_slot;
};

struct BatchView {
    const TrainingBatch& batch;
    std::vector<double> query_norms;
    std::vector<std::vector<double>> passage_norms;

    const Embedding& at(int idx, int slot) const {
        return slot < 0 ? batch.queries[static_cast<std::size_t>(idx)]
                        : batch.passages[static_cast<std::size_t>(idx)][static_cast<std::size_t>(slot)];
    }
    double norm_at(int idx, int slot) const {
        return slot < 0 ? query_norms[static_cast<std::size_t>(idx)]
                        : passage_norms[static_cast<std::size_t>(idx)][static_cast<std::size_t>(slot)];
    }
};

// d cos(u,v)/du = v/(|u||v|) - cos * u/|u|^2, chained with s = cos/tau and the
// upstream coefficient.
void accumulate_similarity_grad(const Embedding& u, double nu, const Embedding& v, double nv,
                                double coeff_over_tau, std::vector<double>& grad_u,
                                std::vector<double>& grad_v) {
    const double c = dot(u, v) / (nu * nv);
    const double inv_uv = 1.0 / (nu * nv);
    const double cu = c / (nu * nu);
    const double cv = c / (nv * nv);
    for (std::size_t d = 0; d < u.values.size(); ++d) {
        grad_u[d] += coeff_over_tau * (v.values[d] * inv_uv - cu * u.values[d]);
        grad_v[d] += coeff_over_tau * (u.values[d] * inv_uv - cv * v.values[d]);
    }
}

} // namespace

ContrastiveResult contrastive_loss(const TrainingBatch& batch, const ContrastiveConfig& cfg) {
    if (!(cfg.tau > 0.0)) {
        throw InvalidConfig("contrastive_loss: tau must be positive");
    }
    if (cfg.alpha < 0.0 || cfg.beta < 0.0 || cfg.gamma < 0.0) {
        throw InvalidConfig("contrastive_loss: alpha, beta, gamma must be nonnegative");
    }
    const std::size_t n = batch.queries.size();
    if (n == 0) {
        throw InvalidInput("contrastive_loss: empty batch");
    }
    if (batch.passages.size() != n) {
        throw InvalidInput("contrastive_loss: queries and passage lists disagree in count");
    }
    const std::size_t dim = batch.queries[0].dim();
    if (dim == 0) {
        throw InvalidInput("contrastive_loss: zero-dimensional embeddings");
    }

    BatchView view{batch, {}, {}};
    view.query_norms.resize(n);
    view.passage_norms.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (batch.queries[i].dim() != dim) {
            throw InvalidInput("contrastive_loss: query " + std::to_string(i) + " dimension mismatch");
        }
        view.query_norms[i] = batch.queries[i].norm();
        if (view.query_norms[i] == 0.0) {
            throw InvalidInput("contrastive_loss: query " + std::to_string(i) + " has zero norm");
        }
        if (batch.passages[i].empty()) {
            throw InvalidInput("contrastive_loss: query " + std::to_string(i) + " has no passages");
        }
        view.passage_norms[i].resize(batch.passages[i].size());
        for (std::size_t j = 0; j < batch.passages[i].size(); ++j) {
            if (batch.passages[i][j].dim() != dim) {
                throw InvalidInput("contrastive_loss: passage dimension mismatch");
            }
            view.passage_norms[i][j] = batch.passages[i][j].norm();
            if (view.passage_norms[i][j] == 0.0) {
                throw InvalidInput("contrastive_loss: passage has zero norm");
            }
        }
    }

    auto scaled = [&](int ai, int as, int bi, int bs) {
        const Embedding& a = view.at(ai, as);
        const Embedding& b = view.at(bi, bs);
        return dot(a, b) / (view.norm_at(ai, as) * view.norm_at(bi, bs) * cfg.tau);
    };

    ContrastiveResult res;
    res.per_query.resize(n);
    res.grad_queries.assign(n, std::vector<double>(dim, 0.0));
    res.grad_passages.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        res.grad_passages[i].assign(batch.passages[i].size(), std::vector<double>(dim, 0.0));
    }

    const double inv_n = 1.0 / static_cast<double>(n);
    double total = 0.0;

    for (std::size_t i = 0; i < n; ++i) {
        const int qi = static_cast<int>(i);
        std::vector<SimTerm> terms;
        terms.push_back({scaled(qi, -1, qi, 0), 1.0, qi, -1, qi, 0});
        if (cfg.alpha > 0.0) {
            for (std::size_t j = 1; j < batch.passages[i].size(); ++j) {
                terms.push_back({scaled(qi, -1, qi, static_cast<int>(j)), cfg.alpha, qi, -1, qi,
                                 static_cast<int>(j)});
            }
        }
        if (cfg.beta > 0.0) {
            for (std::size_t o = 0; o < n; ++o) {
                if (o == i) continue;
                terms.push_back(
                    {scaled(qi, -1, static_cast<int>(o), -1), cfg.beta, qi, -1, static_cast<int>(o), -1});
            }
        }
        if (cfg.gamma > 0.0) {
            for (std::size_t j = 1; j < batch.passages[i].size(); ++j) {
                terms.push_back(
                    {scaled(qi, 0, qi, static_cast<int>(j)), cfg.gamma, qi, 0, qi, static_cast<int>(j)});
            }
        }

        double m = terms[0].scaled_sim;
        for (const SimTerm& t : terms) {
            m = std::max(m, t.scaled_sim);
        }
        double z = 0.0;
        for (const SimTerm& t : terms) {
            z += t.weight * std::exp(t.scaled_sim - m);
        }
        const double positive_sim = terms[0].scaled_sim;
        const double loss_i = -positive_sim + m + std::log(z);
        res.per_query[i] = loss_i;
        total += loss_i;

        // dL/ds for each term is its softmax-like coefficient; the positive
        // term additionally carries the -1 from -s(q_i, p_i0).
        for (std::size_t t = 0; t < terms.size(); ++t) {
            double coeff = terms[t].weight * std::exp(terms[t].scaled_sim - m) / z;
            if (t == 0) {
                coeff -= 1.0;
            }
            if (coeff == 0.0) continue;
            const double upstream = inv_n * coeff / cfg.tau;
            const Embedding& a = view.at(terms[t].a_idx, terms[t].a_slot);
            const Embedding& b = view.at(terms[t].b_idx, terms[t].b_slot);
            auto& ga = terms[t].a_slot < 0
                           ? res.grad_queries[static_cast<std::size_t>(terms[t].a_idx)]
                           : res.grad_passages[static_cast<std::size_t>(terms[t].a_idx)]
                                              [static_cast<std::size_t>(terms[t].a_slot)];
            auto& gb = terms[t].b_slot < 0
                           ? res.grad_queries[static_cast<std::size_t>(terms[t].b_idx)]
                           : res.grad_passages[static_cast<std::size_t>(terms[t].b_idx)]
                                              [static_cast<std::size_t>(terms[t].b_slot)];
            accumulate_similarity_grad(a, view.norm_at(terms[t].a_idx, terms[t].a_slot), b,
                                       view.norm_at(terms[t].b_idx, terms[t].b_slot), upstream, ga, gb);
        }
    }

    res.value = total * inv_n;
    return res;
}

DistillationResult distillation_loss(const std::vector<std::vector<double>>& student_scores,
                                     const std::vector<std::vector<double>>& teacher_scores,
                                     double tau_kd) {
    if (!(tau_kd > 0.0)) {
        throw InvalidConfig("distillation_loss: tau_kd must be positive");
    }
    if (student_scores.size() != teacher_scores.size()) {
        throw InvalidInput("distillation_loss: query count mismatch");
    }

    DistillationResult res;
    res.per_query.reserve(student_scores.size());
    res.grad_student.reserve(student_scores.size());

    for (std::size_t i = 0; i < student_scores.size(); ++i) {
        const auto& s = student_scores[i];
        const auto& t = teacher_scores[i];
        if (s.size() != t.size()) {
            throw InvalidInput("distillation_loss: candidate list length mismatch at query " +
                               std::to_string(i));
        }
        if (s.empty()) {
            throw InvalidInput("distillation_loss: empty candidate list at query " + std::to_string(i));
        }
        const std::size_t m = s.size();

        double ms = s[0] / tau_kd;
        double mt = t[0] / tau_kd;
        for (std::size_t j = 1; j < m; ++j) {
            ms = std::max(ms, s[j] / tau_kd);
            mt = std::max(mt, t[j] / tau_kd);
        }
        double zs = 0.0;
        double zt = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
            zs += std::exp(s[j] / tau_kd - ms);
            zt += std::exp(t[j] / tau_kd - mt);
        }
        const double log_zs = std::log(zs);

        double ce = 0.0;
        std::vector<double> grad(m, 0.0);
        for (std::size_t j = 0; j < m; ++j) {
            const double pt = std::exp(t[j] / tau_kd - mt) / zt;
            const double ps = std::exp(s[j] / tau_kd - ms) / zs;
            ce -= pt * (s[j] / tau_kd - ms - log_zs);
            grad[j] = (ps - pt) / tau_kd;
        }
        res.per_query.push_back(ce);
        res.value += ce;
        res.grad_student.push_back(std::move(grad));
    }
    return res;
}

ListwiseResult plistmle_loss(const std::vector<double>& scores,
                             const std::vector<std::size_t>& target_order) {
    const std::size_t n = scores.size();
    if (target_order.size() != n) {
        throw InvalidInput("plistmle_loss: scores and target_order length mismatch");
    }
    std::vector<bool> seen(n, false);
    for (std::size_t idx : target_order) {
        if (idx >= n || seen[idx]) {
            throw InvalidInput("plistmle_loss: target_order is not a permutation of 0..n-1");
        }
        seen[idx] = true;
    }

    ListwiseResult res;
    res.grad_scores.assign(n, 0.0);
    if (n == 0) {
        return res;
    }

    // Suffix log-sum-exp over scores in target order.
    std::vector<double> suffix_lse(n);
    suffix_lse[n - 1] = scores[target_order[n - 1]];
    for (std::size_t i = n - 1; i-- > 0;) {
        suffix_lse[i] = log_add_exp(scores[target_order[i]], suffix_lse[i + 1]);
    }

    for (std::size_t i = 0; i < n; ++i) {
        // alpha for 1-based step i+1: 2^{n-(i+1)} - 1; the final step weighs 0.
        const double alpha = std::exp2(static_cast<double>(n - 1 - i)) - 1.0;
        res.value += alpha * (-scores[target_order[i]] + suffix_lse[i]);
        if (alpha == 0.0) continue;
        res.grad_scores[target_order[i]] -= alpha;
        for (std::size_t r = i; r < n; ++r) {
            res.grad_scores[target_order[r]] +=
                alpha * std::exp(scores[target_order[r]] - suffix_lse[i]);
        }
    }
    return res;
}

} // namespace rrkit
