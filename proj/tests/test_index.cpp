#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <random>

#include "rrkit/index.hpp"
#include "support.hpp"

using namespace rrkit;
using testsupport::random_embedding;

namespace {

// Full-sort oracle, written independently of the index scan.
std::vector<ScoredHit> oracle_top_k(const std::vector<std::pair<std::string, Embedding>>& corpus,
                                    const Embedding& query, std::size_t k) {
    std::vector<ScoredHit> all;
    for (const auto& [id, emb] : corpus) {
        all.push_back({id, cosine_similarity(query, emb)});
    }
    std::sort(all.begin(), all.end(), [](const ScoredHit& a, const ScoredHit& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.doc_id < b.doc_id;
    });
    if (all.size() > k) all.resize(k);
    return all;
}

} // namespace

TEST_CASE("index add and retrieve basics") {
    VectorIndex index(3);
    Embedding e1{{1.0, 0.0, 0.0}};
    Embedding e2{{0.0, 1.0, 0.0}};
    Embedding e3{{0.0, 0.0, 1.0}};
    index.add("a", e1);
    index.add("b", e2);
    index.add("c", e3);

    const auto hits = index.top_k(e1, 3);
    REQUIRE(hits.size() == 3);
    CHECK(hits[0].doc_id == "a");
    CHECK(hits[0].score == doctest::Approx(1.0));
    CHECK(hits[1].score == doctest::Approx(0.0));
    CHECK(hits[2].score == doctest::Approx(0.0));
    // ties broken by ascending doc id
    CHECK(hits[1].doc_id == "b");
    CHECK(hits[2].doc_id == "c");

    CHECK_THROWS_AS(index.add("a", e2), InvalidInput);
    CHECK_THROWS_AS(index.add("d", Embedding{{1.0, 0.0}}), InvalidInput);
    CHECK_THROWS_AS(index.add("e", Embedding{{0.0, 0.0, 0.0}}), InvalidInput);
}

TEST_CASE("top_k saturates at index size and handles empty index") {
    VectorIndex index(2);
    CHECK(index.top_k(Embedding{{1.0, 0.0}}, 5).empty());
    index.add("only", Embedding{{0.5, 0.5}});
    const auto hits = index.top_k(Embedding{{1.0, 0.0}}, 10);
    CHECK(hits.size() == 1);
    CHECK_THROWS_AS(index.top_k(Embedding{{1.0, 0.0}}, 0), InvalidInput);
}

TEST_CASE("top_k equals the full-sort oracle on random corpora") {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t dim = 8;
        VectorIndex index(dim);
        std::vector<std::pair<std::string, Embedding>> corpus;
        for (int d = 0; d < 50; ++d) {
            const std::string id = "doc" + std::to_string(d);
            const auto e = random_embedding(rng, dim);
            corpus.emplace_back(id, e);
            index.add(id, e);
        }
        const auto query = random_embedding(rng, dim);
        for (std::size_t k : {1ul, 10ul, 50ul, 80ul}) {
            const auto got = index.top_k(query, k);
            const auto want = oracle_top_k(corpus, query, k);
            REQUIRE(got.size() == want.size());
            for (std::size_t i = 0; i < got.size(); ++i) {
                CHECK(got[i].doc_id == want[i].doc_id);
                CHECK(got[i].score == doctest::Approx(want[i].score).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("batched queries match one-by-one results across worker counts") {
    std::mt19937_64 rng(2025);
    VectorIndex index(6);
    for (int d = 0; d < 64; ++d) {
        index.add("doc" + std::to_string(d), random_embedding(rng, 6));
    }
    std::vector<Embedding> queries;
    for (int q = 0; q < 17; ++q) {
        queries.push_back(random_embedding(rng, 6));
    }
    const auto serial = index.top_k_batch(queries, 5, 1);
    const auto parallel = index.top_k_batch(queries, 5, 4);
    REQUIRE(serial.size() == parallel.size());
    for (std::size_t q = 0; q < queries.size(); ++q) {
        REQUIRE(serial[q].size() == parallel[q].size());
        for (std::size_t i = 0; i < serial[q].size(); ++i) {
            CHECK(serial[q][i].doc_id == parallel[q][i].doc_id);
            CHECK(serial[q][i].score == parallel[q][i].score);
        }
    }
}

TEST_CASE("index persists through the cache format") {
    const auto path = std::filesystem::temp_directory_path() / "rrkit_index_persist.rrkv";
    std::mt19937_64 rng(2026);
    VectorIndex index(5);
    for (int d = 0; d < 10; ++d) {
        // binary32-exact values so save/load preserves scores bitwise
        auto e = random_embedding(rng, 5);
        for (auto& x : e.values) x = static_cast<double>(static_cast<float>(x));
        index.add("doc" + std::to_string(d), e);
    }
    index.save(path.string());
    const auto loaded = VectorIndex::load(path.string());
    CHECK(loaded.size() == index.size());
    CHECK(loaded.dim() == index.dim());

    const auto query = random_embedding(rng, 5);
    const auto a = index.top_k(query, 10);
    const auto b = loaded.top_k(query, 10);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].doc_id == b[i].doc_id);
        CHECK(a[i].score == b[i].score);
    }
    std::filesystem::remove(path);
}

TEST_CASE("cosine_to and embedding_of address entries by id") {
    VectorIndex index(2);
    index.add("x", Embedding{{3.0, 4.0}});
    const Embedding q{{1.0, 0.0}};
    CHECK(index.cosine_to("x", q) == doctest::Approx(0.6));
    CHECK(index.embedding_of("x").values == std::vector<double>{3.0, 4.0});
    CHECK_THROWS_AS(index.cosine_to("missing", q), InvalidInput);
    CHECK_THROWS_AS(index.embedding_of("missing"), InvalidInput);
}
