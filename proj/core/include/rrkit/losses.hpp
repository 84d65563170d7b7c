#pragma once

#include <cstddef>
#include <vector>

#include "rrkit/embedding.hpp"

namespace rrkit {

/// Weights of the partition function terms in the contrastive loss.
/// tau is the similarity temperature; alpha weighs query-negative terms,
/// beta query-query terms (over the other queries in the batch), gamma
/// positive-negative terms (over the query's own negatives).
struct ContrastiveConfig {
    double tau = 1.0;
    double alpha = 1.0;
    double beta = 1.0;
    double gamma = 1.0;
};

/// One query embedding per entry plus an ordered candidate list;
/// passages[i][0] is the positive for queries[i], the rest are negatives.
struct TrainingBatch {
    std::vector<Embedding> queries;
    std::vector<std::vector<Embedding>> passages;
};

struct ContrastiveResult {
    double value = 0.0;
    std::vector<double> per_query;                               // loss of each query before the 1/n mean
    std::vector<std::vector<double>> grad_queries;               // [n][dim]
    std::vector<std::vector<std::vector<double>>> grad_passages; // [n][m_i][dim]
};

/// Softmax contrastive loss over scaled cosine similarities:
///   L = -(1/n) sum_i log( e^{s(q_i,p_i0)} / Z_i )
///   Z_i = e^{s(q_i,p_i0)} + alpha * sum_{j>0} e^{s(q_i,p_ij)}
///       + beta * sum_{i' != i} e^{s(q_i,q_i')} + gamma * sum_{j>0} e^{s(p_i0,p_ij)}
/// Gradients are closed-form with respect to every input embedding.
ContrastiveResult contrastive_loss(const TrainingBatch& batch, const ContrastiveConfig& cfg);

struct DistillationResult {
    double value = 0.0;
    std::vector<double> per_query;
    std::vector<std::vector<double>> grad_student; // same shape as student_scores
};

/// Cross-entropy between teacher and student score distributions, each a
/// temperature-tau_kd softmax over the query's own candidate list:
///   L = -sum_i sum_j P_t(i,j) log P_s(i,j)
DistillationResult distillation_loss(const std::vector<std::vector<double>>& student_scores,
                                     const std::vector<std::vector<double>>& teacher_scores,
                                     double tau_kd);

struct ListwiseResult {
    double value = 0.0;
    std::vector<double> grad_scores;
};

/// Position-weighted listwise MLE (PListMLE) over a target permutation y:
///   L(z, y) = sum_{i=1..n} alpha(i) * ( -z_{y_i} + log sum_{k=i..n} exp(z_{y_k}) )
/// with the NDCG-style decreasing gain alpha(i) = 2^{n-i} - 1. Per-list, no
/// batch reduction; callers average if they batch.
ListwiseResult plistmle_loss(const std::vector<double>& scores,
                             const std::vector<std::size_t>& target_order);

} // namespace rrkit
