#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include "rrkit/errors.hpp"
#include "rrkit/pretrain.hpp"

using namespace rrkit;

TEST_CASE("table sequence layout") {
    SUBCASE("1x1 table") {
        TableDoc t;
        t.id = "t1";
        t.headers = {"price"};
        t.cells = {{"5"}};
        t.summary = {"cost", "table"};
        const auto seq = build_table_sequence(t);
        CHECK(seq.table_tokens == std::vector<std::string>{"[CLS]", "price", "[SEP]", "5", "[SEP]"});
        CHECK(seq.summary_tokens == std::vector<std::string>{"[CLS]", "cost", "table"});
    }
    SUBCASE("degenerate empty table") {
        TableDoc t;
        t.id = "t2";
        t.summary = {"empty"};
        const auto seq = build_table_sequence(t);
        CHECK(seq.table_tokens == std::vector<std::string>{"[CLS]", "[SEP]", "[SEP]"});
    }
    SUBCASE("2x2 cells appear row-major") {
        TableDoc t;
        t.id = "t3";
        t.headers = {"a", "b"};
        t.cells = {{"r0c0", "r0c1"}, {"r1c0", "r1c1"}};
        t.summary = {"s"};
        const auto seq = build_table_sequence(t);
        CHECK(seq.table_tokens == std::vector<std::string>{"[CLS]", "a", "b", "[SEP]", "r0c0",
                                                           "r0c1", "r1c0", "r1c1", "[SEP]"});
    }
    SUBCASE("metadata lands after the summary") {
        TableDoc t;
        t.id = "t4";
        t.summary = {"s1"};
        t.metadata = {"m1", "m2"};
        const auto seq = build_table_sequence(t);
        CHECK(seq.summary_tokens == std::vector<std::string>{"[CLS]", "s1", "m1", "m2"});
    }
    SUBCASE("ragged cells and missing summaries rejected") {
        TableDoc ragged;
        ragged.id = "bad";
        ragged.cells = {{"a", "b"}, {"c"}};
        ragged.summary = {"s"};
        CHECK_THROWS_AS(build_table_sequence(ragged), InvalidInput);

        TableDoc no_summary;
        no_summary.id = "bad2";
        CHECK_THROWS_AS(build_table_sequence(no_summary), InvalidInput);
        no_summary.synthetic_pending = true;
        CHECK_NOTHROW(build_table_sequence(no_summary));
    }
}

TEST_CASE("table sequence round-trips through the separators") {
    TableDoc t;
    t.id = "rt";
    t.headers = {"h1", "h2", "h3"};
    t.cells = {{"x", "y"}, {"z", "w"}};
    t.summary = {"sum"};
    const auto seq = build_table_sequence(t);
    const auto split = split_table_sequence(seq.table_tokens);
    CHECK(split.headers == t.headers);
    CHECK(split.cells == std::vector<std::string>{"x", "y", "z", "w"});
}

TEST_CASE("mask sampling honors ratio and determinism") {
    const auto enc = sample_masks(10, 0.2, 42);
    CHECK(enc.positions.size() == 2);
    const auto dec = sample_masks(10, 0.6, 42);
    CHECK(dec.positions.size() == 6);

    const auto again = sample_masks(10, 0.6, 42);
    CHECK(dec.positions == again.positions);
    const auto other_seed = sample_masks(10, 0.6, 43);
    CHECK(dec.positions != other_seed.positions);

    for (std::size_t p : dec.positions) {
        CHECK(p < 10);
    }
    std::set<std::size_t> uniq(dec.positions.begin(), dec.positions.end());
    CHECK(uniq.size() == dec.positions.size());
    CHECK(std::is_sorted(dec.positions.begin(), dec.positions.end()));

    CHECK_THROWS_AS(sample_masks(10, 0.0, 1), InvalidConfig);
    CHECK_THROWS_AS(sample_masks(10, 1.0, 1), InvalidConfig);
}

TEST_CASE("mask counts round half away from zero") {
    CHECK(sample_masks(10, 0.25, 7).positions.size() == 3);  // 2.5 -> 3
    CHECK(sample_masks(10, 0.34, 7).positions.size() == 3);
    CHECK(sample_masks(3, 0.5, 7).positions.size() == 2);    // 1.5 -> 2
    CHECK(sample_masks(1, 0.2, 7).positions.size() == 0);
}

TEST_CASE("m1 attention mask structure") {
    SUBCASE("keep_ratio 1 attends to everything but self") {
        const auto mat = m1_attention_mask(4, 1.0, 9);
        for (std::size_t col = 0; col < 4; ++col) {
            CHECK(mat.at(0, col));
        }
        for (std::size_t row = 1; row < 4; ++row) {
            for (std::size_t col = 0; col < 4; ++col) {
                CHECK(mat.at(row, col) == (col != row));
            }
        }
    }
    SUBCASE("cls column always visible, diagonal never") {
        const auto mat = m1_attention_mask(16, 0.4, 5);
        for (std::size_t row = 0; row < 16; ++row) {
            CHECK(mat.at(row, 0));
            if (row > 0) {
                CHECK_FALSE(mat.at(row, row));
            }
        }
    }
    SUBCASE("row subset size follows keep_ratio") {
        const auto mat = m1_attention_mask(11, 0.4, 5);
        for (std::size_t row = 1; row < 11; ++row) {
            std::size_t count = 0;
            for (std::size_t col = 0; col < 11; ++col) {
                if (mat.at(row, col)) ++count;
            }
            CHECK(count == 4); // round(0.4 * 10)
        }
    }
    SUBCASE("deterministic per seed") {
        const auto a = m1_attention_mask(12, 0.5, 77);
        const auto b = m1_attention_mask(12, 0.5, 77);
        CHECK(a.allow == b.allow);
    }
    CHECK_THROWS_AS(m1_attention_mask(1, 0.5, 0), InvalidConfig);
    CHECK_THROWS_AS(m1_attention_mask(8, 0.0, 0), InvalidConfig);
    CHECK_THROWS_AS(m1_attention_mask(8, 1.5, 0), InvalidConfig);
}

TEST_CASE("table decoder loss") {
    MaskPlan mask;
    mask.positions = {1, 3};

    SUBCASE("point masses on the truth cost nothing") {
        const std::vector<std::vector<double>> preds = {{0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}};
        CHECK(table_decoder_loss(preds, mask, {0, 1, 0, 2}) == doctest::Approx(0.0));
    }
    SUBCASE("uniform prediction costs ln V") {
        MaskPlan one;
        one.positions = {0};
        const std::vector<std::vector<double>> preds = {{0.25, 0.25, 0.25, 0.25}};
        CHECK(table_decoder_loss(preds, one, {2}) == doctest::Approx(std::log(4.0)));
    }
    SUBCASE("probabilities 0.5 and 0.25 on the truth") {
        const std::vector<std::vector<double>> preds = {{0.5, 0.5}, {0.25, 0.75}};
        CHECK(table_decoder_loss(preds, mask, {9, 0, 9, 0}) ==
              doctest::Approx(std::log(2.0) + std::log(4.0)).epsilon(1e-12));
    }
    SUBCASE("unnormalized distributions rejected") {
        const std::vector<std::vector<double>> preds = {{0.5, 0.4}, {0.25, 0.75}};
        CHECK_THROWS_AS(table_decoder_loss(preds, mask, {0, 0, 0, 0}), InvalidInput);
    }
    SUBCASE("coverage mismatch rejected") {
        const std::vector<std::vector<double>> preds = {{1.0}};
        CHECK_THROWS_AS(table_decoder_loss(preds, mask, {0, 0, 0, 0}), InvalidInput);
    }
    SUBCASE("loss is nonnegative and zero only at certainty") {
        const std::vector<std::vector<double>> preds = {{0.9, 0.1}, {1.0, 0.0}};
        const double v = table_decoder_loss(preds, mask, {0, 0, 0, 0});
        CHECK(v > 0.0);
    }
}

TEST_CASE("table corpus loads from line-delimited records") {
    const auto path = std::filesystem::temp_directory_path() / "rrkit_tables_test.jsonl";
    {
        std::ofstream out(path);
        out << R"({"id":"t1","headers":["h"],"cells":[["c"]],"summary":"a table"})" << '\n';
        out << R"({"id":"t2","headers":[],"cells":[],"summary":"","synthetic_pending":true})" << '\n';
    }
    const auto tables = load_table_corpus(path.string());
    REQUIRE(tables.size() == 2);
    CHECK(tables[0].id == "t1");
    CHECK(tables[0].summary == std::vector<std::string>{"a", "table"});
    CHECK(tables[1].synthetic_pending);
    std::filesystem::remove(path);
}
