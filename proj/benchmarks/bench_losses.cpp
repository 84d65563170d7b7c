#include <benchmark/benchmark.h>

#include <random>

#include "rrkit/losses.hpp"
#include "rrkit/random.hpp"

namespace {

rrkit::Embedding random_embedding(std::mt19937_64& rng, std::size_t dim) {
    rrkit::Embedding e;
    e.values.resize(dim);
    for (auto& x : e.values) {
        x = rrkit::detail::uniform_real(rng, -1.0, 1.0);
    }
    return e;
}

void BM_ContrastiveLoss(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const std::size_t dim = 256;
    std::mt19937_64 rng(7);
    rrkit::TrainingBatch batch;
    for (std::size_t i = 0; i < n; ++i) {
        batch.queries.push_back(random_embedding(rng, dim));
        std::vector<rrkit::Embedding> plist;
        for (int j = 0; j < 4; ++j) {
            plist.push_back(random_embedding(rng, dim));
        }
        batch.passages.push_back(std::move(plist));
    }
    rrkit::ContrastiveConfig cfg;
    cfg.tau = 0.05;
    for (auto _ : state) {
        benchmark::DoNotOptimize(rrkit::contrastive_loss(batch, cfg));
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                            static_cast<std::int64_t>(n));
}
BENCHMARK(BM_ContrastiveLoss)->Arg(8)->Arg(32)->Arg(128);

void BM_PlistmleLoss(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    std::mt19937_64 rng(9);
    std::vector<double> scores;
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) {
        scores.push_back(rrkit::detail::uniform_real(rng, -2.0, 2.0));
        order[i] = i;
    }
    for (std::size_t i = n; i-- > 1;) {
        std::swap(order[i], order[rrkit::detail::bounded_u64(rng, i + 1)]);
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(rrkit::plistmle_loss(scores, order));
    }
}
BENCHMARK(BM_PlistmleLoss)->Arg(8)->Arg(20)->Arg(64);

void BM_DistillationLoss(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    std::mt19937_64 rng(11);
    std::vector<std::vector<double>> student(n), teacher(n);
    for (std::size_t q = 0; q < n; ++q) {
        for (int j = 0; j < 4; ++j) {
            student[q].push_back(rrkit::detail::uniform_real(rng, -2.0, 2.0));
            teacher[q].push_back(rrkit::detail::uniform_real(rng, -2.0, 2.0));
        }
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(rrkit::distillation_loss(student, teacher, 1.0));
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                            static_cast<std::int64_t>(n));
}
BENCHMARK(BM_DistillationLoss)->Arg(32)->Arg(256);

} // namespace
