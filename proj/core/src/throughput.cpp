#include "rrkit/throughput.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>

#include <json.hpp>

#include "rrkit/errors.hpp"
#include "rrkit/random.hpp"
#include "rrkit/tokenizer.hpp"

namespace rrkit {

namespace {

double median(std::vector<double> xs) {
    std::sort(xs.begin(), xs.end());
    const std::size_t n = xs.size();
    if (n % 2 == 1) {
        return xs[n / 2];
    }
    return 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

std::string join_tokens(const std::vector<std::string>& tokens, std::size_t lo, std::size_t hi) {
    std::string out;
    for (std::size_t i = lo; i < hi; ++i) {
        if (i > lo) out.push_back(' ');
        out += tokens[i];
    }
    return out;
}

} // namespace

ThroughputReport measure_throughput(const std::vector<Document>& corpus, const BatchEmbedFn& embed,
                                    const ThroughputConfig& cfg) {
    if (corpus.empty()) {
        throw InvalidInput("measure_throughput: corpus must be non-empty");
    }
    if (cfg.repeats == 0 || cfg.batch_size == 0) {
        throw InvalidConfig("measure_throughput: repeats and batch_size must be positive");
    }

    ThroughputReport report;
    report.total_docs = corpus.size();
    report.chunk_size = cfg.chunking.chunk_size;
    report.overlap = cfg.chunking.overlap;
    report.batch_size = cfg.batch_size;

    const WhitespaceTokenizer tokenizer;

    for (std::size_t rep = 0; rep < cfg.repeats; ++rep) {
        RepeatTiming timing;
        std::size_t chunks_this_rep = 0;
        std::map<std::size_t, std::size_t> histogram;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            std::vector<std::string> pending;
            pending.reserve(cfg.batch_size);
            for (const auto& doc : corpus) {
                const auto tokens = tokenizer.tokenize(doc.text);
                for (const auto& [lo, hi] : chunk_spans(tokens.size(), cfg.chunking)) {
                    ++chunks_this_rep;
                    ++histogram[hi - lo];
                    pending.push_back(join_tokens(tokens, lo, hi));
                    if (pending.size() == cfg.batch_size) {
                        embed(pending);
                        pending.clear();
                    }
                }
            }
            if (!pending.empty()) {
                embed(pending);
            }
        } catch (const std::exception& e) {
            timing.ok = false;
            timing.error = e.what();
        }
        const auto t1 = std::chrono::steady_clock::now();
        timing.wall_seconds = std::chrono::duration<double>(t1 - t0).count();
        if (timing.ok) {
            report.total_chunks = chunks_this_rep;
            report.chunk_length_histogram = std::move(histogram);
        }
        report.repeats.push_back(std::move(timing));
    }

    std::vector<double> walls;
    for (const auto& rep : report.repeats) {
        if (rep.ok) walls.push_back(rep.wall_seconds);
    }
    if (!walls.empty()) {
        const double med = median(std::move(walls));
        report.docs_per_second =
            med > 0.0 ? static_cast<double>(report.total_docs) / med : 0.0;
    }
    return report;
}

std::string report_to_json(const ThroughputReport& report) {
    nlohmann::json j;
    j["total_docs"] = report.total_docs;
    j["total_chunks"] = report.total_chunks;
    j["docs_per_second"] = report.docs_per_second;
    j["chunk_size"] = report.chunk_size;
    j["overlap"] = report.overlap;
    j["batch_size"] = report.batch_size;
    j["includes_tokenization"] = report.includes_tokenization;
    j["repeats"] = nlohmann::json::array();
    for (const auto& rep : report.repeats) {
        j["repeats"].push_back({{"wall_seconds", rep.wall_seconds},
                                {"ok", rep.ok},
                                {"error", rep.error}});
    }
    j["chunk_length_histogram"] = nlohmann::json::array();
    for (const auto& [len, count] : report.chunk_length_histogram) {
        j["chunk_length_histogram"].push_back({len, count});
    }
    return j.dump(2);
}

ThroughputReport report_from_json(const std::string& json_text) {
    nlohmann::json j = nlohmann::json::parse(json_text, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
        throw ParseError("throughput report: not a JSON object");
    }
    ThroughputReport report;
    report.total_docs = j.at("total_docs").get<std::size_t>();
    report.total_chunks = j.at("total_chunks").get<std::size_t>();
    report.docs_per_second = j.at("docs_per_second").get<double>();
    report.chunk_size = j.at("chunk_size").get<std::size_t>();
    report.overlap = j.at("overlap").get<std::size_t>();
    report.batch_size = j.at("batch_size").get<std::size_t>();
    report.includes_tokenization = j.at("includes_tokenization").get<bool>();
    for (const auto& rep : j.at("repeats")) {
        report.repeats.push_back(RepeatTiming{rep.at("wall_seconds").get<double>(),
                                              rep.at("ok").get<bool>(),
                                              rep.at("error").get<std::string>()});
    }
    for (const auto& entry : j.at("chunk_length_histogram")) {
        report.chunk_length_histogram[entry.at(0).get<std::size_t>()] =
            entry.at(1).get<std::size_t>();
    }
    return report;
}

double relative_speed(double other_docs_per_second, double reference_docs_per_second) {
    if (!(reference_docs_per_second > 0.0)) {
        throw InvalidInput("relative_speed: reference must be positive");
    }
    return other_docs_per_second / reference_docs_per_second - 1.0;
}

std::string format_relative_speed(double other_docs_per_second,
                                  double reference_docs_per_second) {
    const double pct = 100.0 * relative_speed(other_docs_per_second, reference_docs_per_second);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.1f%%", pct);
    return buf;
}

std::vector<Document> synth_corpus(std::size_t n_docs, const LengthDistribution& lengths,
                                   std::uint64_t seed) {
    if (n_docs == 0) {
        throw InvalidInput("synth_corpus: n_docs must be at least 1");
    }
    if (!(lengths.mean_chars > 0.0) || lengths.min_chars > lengths.max_chars ||
        static_cast<double>(lengths.min_chars) > lengths.mean_chars ||
        lengths.mean_chars > static_cast<double>(lengths.max_chars)) {
        throw InvalidConfig("synth_corpus: inconsistent length distribution");
    }

    std::mt19937_64 rng(seed);
    const double mu = std::log(lengths.mean_chars) - 0.5 * lengths.log_sigma * lengths.log_sigma;
    std::vector<double> raw(n_docs);
    for (auto& r : raw) {
        r = std::exp(mu + lengths.log_sigma * detail::standard_normal(rng));
    }

    // Multiplicative fixed point: rescale so the clamped mean hits the target.
    auto clamped = [&](double x) {
        return std::min(static_cast<double>(lengths.max_chars),
                        std::max(static_cast<double>(lengths.min_chars), x));
    };
    double scale = 1.0;
    for (int iter = 0; iter < 8; ++iter) {
        double mean = 0.0;
        for (double r : raw) {
            mean += clamped(r * scale);
        }
        mean /= static_cast<double>(n_docs);
        scale *= lengths.mean_chars / mean;
    }

    std::vector<Document> docs;
    docs.reserve(n_docs);
    std::string text;
    for (std::size_t i = 0; i < n_docs; ++i) {
        const auto len = static_cast<std::size_t>(std::llround(clamped(raw[i] * scale)));
        text.clear();
        text.reserve(len + 12);
        while (text.size() < len) {
            const std::size_t word_len = 3 + detail::bounded_u64(rng, 7);
            for (std::size_t c = 0; c < word_len; ++c) {
                text.push_back(static_cast<char>('a' + detail::bounded_u64(rng, 26)));
            }
            text.push_back(' ');
        }
        text.resize(len);
        char id[32];
        std::snprintf(id, sizeof(id), "synth-%06zu", i);
        docs.push_back(Document{id, text});
    }
    return docs;
}

} // namespace rrkit
