#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "rrkit/losses.hpp"
#include "support.hpp"

using namespace rrkit;
using testsupport::random_embedding;

namespace {

TrainingBatch random_batch(std::mt19937_64& rng, std::size_t n_queries, std::size_t n_passages,
                           std::size_t dim) {
    TrainingBatch batch;
    for (std::size_t i = 0; i < n_queries; ++i) {
        batch.queries.push_back(random_embedding(rng, dim));
        std::vector<Embedding> plist;
        for (std::size_t j = 0; j < n_passages; ++j) {
            plist.push_back(random_embedding(rng, dim));
        }
        batch.passages.push_back(std::move(plist));
    }
    return batch;
}

// Straight log-softmax cross entropy over (positive, negatives) similarities,
// the independent oracle for the alpha=1, beta=gamma=0 slice.
double softmax_ce_oracle(const std::vector<double>& sims) {
    double m = sims[0];
    for (double s : sims) m = std::max(m, s);
    double z = 0.0;
    for (double s : sims) z += std::exp(s - m);
    return -(sims[0] - m - std::log(z));
}

} // namespace

TEST_CASE("cosine and scaled similarity known values") {
    Embedding e1{{1.0, 0.0}};
    Embedding e2{{0.0, 1.0}};
    Embedding e3{{1.0, 1.0}};

    CHECK(cosine_similarity(e1, e1) == doctest::Approx(1.0));
    CHECK(cosine_similarity(e1, e2) == doctest::Approx(0.0));
    CHECK(cosine_similarity(e3, e1) == doctest::Approx(0.70710678).epsilon(1e-7));

    CHECK(scaled_similarity(e1, e1, 1.0) == doctest::Approx(1.0));
    CHECK(scaled_similarity(e1, e1, 0.05) == doctest::Approx(20.0));
    CHECK(scaled_similarity(e1, e2, 0.37) == doctest::Approx(0.0));

    CHECK_THROWS_AS(cosine_similarity(e1, Embedding{{1.0, 0.0, 0.0}}), InvalidInput);
    CHECK_THROWS_AS(cosine_similarity(e1, Embedding{{0.0, 0.0}}), InvalidInput);
    CHECK_THROWS_AS(scaled_similarity(e1, e1, 0.0), InvalidConfig);
    CHECK_THROWS_AS(scaled_similarity(e1, e1, -1.0), InvalidConfig);
}

TEST_CASE("cosine similarity stays in [-1, 1] and is symmetric") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        const auto u = random_embedding(rng, 16);
        const auto v = random_embedding(rng, 16);
        const double c = cosine_similarity(u, v);
        CHECK(c <= 1.0 + 1e-12);
        CHECK(c >= -1.0 - 1e-12);
        CHECK(c == doctest::Approx(cosine_similarity(v, u)).epsilon(1e-12));
    }
}

TEST_CASE("contrastive loss hand values") {
    ContrastiveConfig cfg;
    cfg.tau = 1.0;

    SUBCASE("single positive only reduces to zero") {
        TrainingBatch batch;
        batch.queries.push_back(Embedding{{1.0, 0.0}});
        batch.passages.push_back({Embedding{{1.0, 0.0}}});
        cfg.alpha = 1.0;
        cfg.beta = 0.0;
        cfg.gamma = 0.0;
        const auto res = contrastive_loss(batch, cfg);
        CHECK(res.value == doctest::Approx(0.0).epsilon(1e-12));
        for (double g : res.grad_queries[0]) {
            CHECK(std::abs(g) < 1e-12);
        }
    }

    SUBCASE("one negative at cosine zero") {
        // cos(q,p0)=1, cos(q,p1)=0 -> -1 + log(e + 1) = log(1 + e^-1)
        TrainingBatch batch;
        batch.queries.push_back(Embedding{{1.0, 0.0}});
        batch.passages.push_back({Embedding{{1.0, 0.0}}, Embedding{{0.0, 1.0}}});
        cfg.alpha = 1.0;
        cfg.beta = 0.0;
        cfg.gamma = 0.0;
        const auto res = contrastive_loss(batch, cfg);
        CHECK(res.value == doctest::Approx(0.3132616875182228).epsilon(1e-10));
    }

    SUBCASE("second query joins through the beta term") {
        // Z_1 gains e^{s(q1,q2)} = 1, so query 1's loss is log(1 + 2 e^-1).
        TrainingBatch batch;
        batch.queries.push_back(Embedding{{1.0, 0.0, 0.0}});
        batch.queries.push_back(Embedding{{0.0, 0.0, 1.0}});
        batch.passages.push_back({Embedding{{1.0, 0.0, 0.0}}, Embedding{{0.0, 1.0, 0.0}}});
        batch.passages.push_back({Embedding{{0.0, 0.0, 1.0}}});
        cfg.alpha = 1.0;
        cfg.beta = 1.0;
        cfg.gamma = 0.0;
        const auto res = contrastive_loss(batch, cfg);
        CHECK(res.per_query[0] == doctest::Approx(0.5514447139320511).epsilon(1e-10));
    }
}

TEST_CASE("contrastive loss validates inputs") {
    ContrastiveConfig cfg;
    TrainingBatch empty;
    CHECK_THROWS_AS(contrastive_loss(empty, cfg), InvalidInput);

    TrainingBatch no_passages;
    no_passages.queries.push_back(Embedding{{1.0, 0.0}});
    no_passages.passages.push_back({});
    CHECK_THROWS_AS(contrastive_loss(no_passages, cfg), InvalidInput);

    TrainingBatch mixed_dim;
    mixed_dim.queries.push_back(Embedding{{1.0, 0.0}});
    mixed_dim.passages.push_back({Embedding{{1.0, 0.0, 0.0}}});
    CHECK_THROWS_AS(contrastive_loss(mixed_dim, cfg), InvalidInput);

    TrainingBatch ok;
    ok.queries.push_back(Embedding{{1.0, 0.0}});
    ok.passages.push_back({Embedding{{1.0, 0.0}}});
    ContrastiveConfig bad_tau = cfg;
    bad_tau.tau = 0.0;
    CHECK_THROWS_AS(contrastive_loss(ok, bad_tau), InvalidConfig);
}

TEST_CASE("contrastive loss with alpha=1, beta=gamma=0 matches softmax cross-entropy") {
    std::mt19937_64 rng(23);
    ContrastiveConfig cfg;
    cfg.tau = 0.5;
    cfg.alpha = 1.0;
    cfg.beta = 0.0;
    cfg.gamma = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        const auto batch = random_batch(rng, 3, 4, 6);
        const auto res = contrastive_loss(batch, cfg);
        double expected = 0.0;
        for (std::size_t i = 0; i < batch.queries.size(); ++i) {
            std::vector<double> sims;
            for (const auto& p : batch.passages[i]) {
                sims.push_back(scaled_similarity(batch.queries[i], p, cfg.tau));
            }
            expected += softmax_ce_oracle(sims);
        }
        expected /= static_cast<double>(batch.queries.size());
        CHECK(res.value == doctest::Approx(expected).epsilon(1e-10));
    }
}

TEST_CASE("contrastive loss strictly decreases when the positive similarity rises") {
    std::mt19937_64 rng(31);
    ContrastiveConfig cfg;
    cfg.tau = 0.7;
    // gamma = 0 so that moving p_00 changes s(q_0, p_00) and nothing else;
    // alpha and beta terms never involve the positive embedding.
    cfg.gamma = 0.0;
    int exercised = 0;
    for (int trial = 0; trial < 40; ++trial) {
        auto batch = random_batch(rng, 2, 3, 8);
        const double before = contrastive_loss(batch, cfg).value;
        const auto& q = batch.queries[0];
        auto& pos = batch.passages[0][0];
        const double c0 = cosine_similarity(q, pos);
        Embedding moved = pos;
        for (std::size_t d = 0; d < q.dim(); ++d) {
            moved.values[d] = 0.5 * pos.values[d] / pos.norm() + 0.5 * q.values[d] / q.norm();
        }
        if (cosine_similarity(q, moved) <= c0) continue;
        ++exercised;
        pos = moved;
        const double after = contrastive_loss(batch, cfg).value;
        CHECK(after < before);
    }
    CHECK(exercised > 20);
}

TEST_CASE("contrastive gradients match finite differences across weight settings") {
    std::mt19937_64 rng(47);
    for (double alpha : {0.0, 1.0}) {
        for (double beta : {0.0, 0.5}) {
            for (double gamma : {0.0, 1.0}) {
                ContrastiveConfig cfg;
                cfg.tau = 0.8;
                cfg.alpha = alpha;
                cfg.beta = beta;
                cfg.gamma = gamma;
                auto batch = random_batch(rng, 3, 3, 5);

                const auto res = contrastive_loss(batch, cfg);
                std::vector<double> analytic;
                std::vector<double*> slots;
                for (std::size_t i = 0; i < batch.queries.size(); ++i) {
                    for (std::size_t d = 0; d < batch.queries[i].dim(); ++d) {
                        analytic.push_back(res.grad_queries[i][d]);
                        slots.push_back(&batch.queries[i].values[d]);
                    }
                    for (std::size_t j = 0; j < batch.passages[i].size(); ++j) {
                        for (std::size_t d = 0; d < batch.passages[i][j].dim(); ++d) {
                            analytic.push_back(res.grad_passages[i][j][d]);
                            slots.push_back(&batch.passages[i][j].values[d]);
                        }
                    }
                }
                const auto check = testsupport::finite_difference_check(
                    [&]() { return contrastive_loss(batch, cfg).value; },
                    [&](std::size_t i) -> double& { return *slots[i]; }, analytic);
                CHECK(check.max_rel_err < 1e-4);
            }
        }
    }
}

TEST_CASE("contrastive loss stays finite at sharp temperatures") {
    std::mt19937_64 rng(37);
    ContrastiveConfig cfg;
    cfg.tau = 0.01;
    for (int trial = 0; trial < 10; ++trial) {
        const auto batch = random_batch(rng, 3, 4, 8);
        const auto res = contrastive_loss(batch, cfg);
        CHECK(std::isfinite(res.value));
        for (const auto& gq : res.grad_queries) {
            for (double g : gq) {
                CHECK(std::isfinite(g));
            }
        }
        for (const auto& plist : res.grad_passages) {
            for (const auto& gp : plist) {
                for (double g : gp) {
                    CHECK(std::isfinite(g));
                }
            }
        }
    }
}

TEST_CASE("distillation loss hand values") {
    SUBCASE("single candidate is a point mass") {
        const auto res = distillation_loss({{3.2}}, {{-1.0}}, 1.0);
        CHECK(res.value == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(res.grad_student[0][0] == doctest::Approx(0.0).epsilon(1e-12));
    }
    SUBCASE("identical flat distributions give ln 2 and zero gradient") {
        const auto res = distillation_loss({{0.3, 0.3}}, {{0.3, 0.3}}, 1.0);
        CHECK(res.value == doctest::Approx(0.6931471805599453).epsilon(1e-12));
        CHECK(std::abs(res.grad_student[0][0]) < 1e-15);
        CHECK(std::abs(res.grad_student[0][1]) < 1e-15);
    }
    SUBCASE("teacher (2,0) student (1,0)") {
        const auto res = distillation_loss({{1.0, 0.0}}, {{2.0, 0.0}}, 1.0);
        CHECK(res.value == doctest::Approx(0.4324646095403404).epsilon(1e-10));
    }
    SUBCASE("length mismatch rejected") {
        CHECK_THROWS_AS(distillation_loss({{1.0, 2.0}}, {{1.0}}, 1.0), InvalidInput);
        CHECK_THROWS_AS(distillation_loss({{1.0}}, {{1.0}}, 0.0), InvalidConfig);
    }
}

TEST_CASE("distillation loss is bounded below by the teacher entropy") {
    std::mt19937_64 rng(59);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<std::vector<double>> student(2), teacher(2);
        for (int q = 0; q < 2; ++q) {
            for (int j = 0; j < 4; ++j) {
                student[q].push_back(testsupport::uniform(rng, -2.0, 2.0));
                teacher[q].push_back(testsupport::uniform(rng, -2.0, 2.0));
            }
        }
        const double tau = testsupport::uniform(rng, 0.3, 3.0);
        const auto res = distillation_loss(student, teacher, tau);
        // Teacher entropy per query, computed directly.
        double entropy = 0.0;
        for (const auto& t : teacher) {
            const double m = *std::max_element(t.begin(), t.end()) / tau;
            double z = 0.0;
            for (double x : t) z += std::exp(x / tau - m);
            for (double x : t) {
                const double p = std::exp(x / tau - m) / z;
                entropy -= p * std::log(p);
            }
        }
        CHECK(res.value >= entropy - 1e-9);

        const auto self = distillation_loss(teacher, teacher, tau);
        CHECK(self.value == doctest::Approx(entropy).epsilon(1e-9));
    }
}

TEST_CASE("distillation gradients match finite differences") {
    std::mt19937_64 rng(61);
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<std::vector<double>> student(3), teacher(3);
        for (int q = 0; q < 3; ++q) {
            for (int j = 0; j < 5; ++j) {
                student[q].push_back(testsupport::uniform(rng, -2.0, 2.0));
                teacher[q].push_back(testsupport::uniform(rng, -2.0, 2.0));
            }
        }
        const double tau = testsupport::uniform(rng, 0.4, 2.5);
        const auto res = distillation_loss(student, teacher, tau);
        std::vector<double> analytic;
        std::vector<double*> slots;
        for (int q = 0; q < 3; ++q) {
            for (int j = 0; j < 5; ++j) {
                analytic.push_back(res.grad_student[q][j]);
                slots.push_back(&student[q][j]);
            }
        }
        const auto check = testsupport::finite_difference_check(
            [&]() { return distillation_loss(student, teacher, tau).value; },
            [&](std::size_t i) -> double& { return *slots[i]; }, analytic);
        CHECK(check.max_rel_err < 1e-4);
    }
}

TEST_CASE("plistmle hand values and order sensitivity") {
    SUBCASE("singleton list costs nothing") {
        const auto res = plistmle_loss({4.2}, {0});
        CHECK(res.value == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(res.grad_scores[0] == doctest::Approx(0.0).epsilon(1e-12));
    }
    SUBCASE("correct order on (2,1)") {
        const auto res = plistmle_loss({2.0, 1.0}, {0, 1});
        CHECK(res.value == doctest::Approx(0.3132616875182228).epsilon(1e-10));
    }
    SUBCASE("swapped order costs a full unit more") {
        const auto good = plistmle_loss({2.0, 1.0}, {0, 1});
        const auto bad = plistmle_loss({2.0, 1.0}, {1, 0});
        CHECK(bad.value == doctest::Approx(1.3132616875182228).epsilon(1e-10));
        CHECK(bad.value > good.value);
    }
    SUBCASE("non-permutations rejected") {
        CHECK_THROWS_AS(plistmle_loss({1.0, 2.0}, {0, 0}), InvalidInput);
        CHECK_THROWS_AS(plistmle_loss({1.0, 2.0}, {0, 2}), InvalidInput);
        CHECK_THROWS_AS(plistmle_loss({1.0, 2.0}, {0}), InvalidInput);
    }
}

TEST_CASE("plistmle is invariant to shifting all scores") {
    std::mt19937_64 rng(71);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 2 + trial % 5;
        std::vector<double> scores;
        for (std::size_t i = 0; i < n; ++i) {
            scores.push_back(testsupport::uniform(rng, -3.0, 3.0));
        }
        std::vector<std::size_t> order(n);
        for (std::size_t i = 0; i < n; ++i) order[i] = i;
        for (std::size_t i = n; i-- > 1;) {
            std::swap(order[i], order[rrkit::detail::bounded_u64(rng, i + 1)]);
        }
        const double shift = testsupport::uniform(rng, -5.0, 5.0);
        auto shifted = scores;
        for (auto& s : shifted) s += shift;
        CHECK(plistmle_loss(scores, order).value ==
              doctest::Approx(plistmle_loss(shifted, order).value).epsilon(1e-9));
    }
}

TEST_CASE("plistmle gradients match finite differences") {
    std::mt19937_64 rng(73);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 2 + trial % 6;
        std::vector<double> scores;
        for (std::size_t i = 0; i < n; ++i) {
            scores.push_back(testsupport::uniform(rng, -2.0, 2.0));
        }
        std::vector<std::size_t> order(n);
        for (std::size_t i = 0; i < n; ++i) order[i] = i;
        for (std::size_t i = n; i-- > 1;) {
            std::swap(order[i], order[rrkit::detail::bounded_u64(rng, i + 1)]);
        }
        const auto res = plistmle_loss(scores, order);
        const auto check = testsupport::finite_difference_check(
            [&]() { return plistmle_loss(scores, order).value; },
            [&](std::size_t i) -> double& { return scores[i]; }, res.grad_scores);
        CHECK(check.max_rel_err < 1e-4);
    }
}
