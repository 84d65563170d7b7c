#include "rrkit/embedder.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <memory>
#include <mutex>
#include <thread>
#include <unordered_map>

#include <httplib.h>
#include <json.hpp>

#include "rrkit/cache.hpp"
#include "rrkit/errors.hpp"
#include "rrkit/random.hpp"
#include "rrkit/tokenizer.hpp"

namespace rrkit {

namespace {

void quantize_to_binary32(Embedding& e) {
    for (double& x : e.values) {
        x = static_cast<double>(static_cast<float>(x));
    }
}

void l2_normalize(Embedding& e, const char* who) {
    const double n = e.norm();
    if (n == 0.0) {
        throw ProtocolError(std::string(who) + ": zero-norm embedding cannot be normalized");
    }
    for (double& x : e.values) {
        x /= n;
    }
}

struct UrlParts {
    std::string base; // scheme://host[:port]
    std::string path; // leading slash
};

UrlParts split_url(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) {
        throw InvalidConfig("remote embedder: endpoint must be an http(s) URL: " + url);
    }
    const auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) {
        return {url, "/"};
    }
    return {url.substr(0, path_start), url.substr(path_start)};
}

std::vector<Embedding> remote_call(const EmbedderSpec& spec, const UrlParts& url,
                                   const std::vector<std::string>& texts) {
    nlohmann::json req;
    req["texts"] = texts;
    const std::string body = req.dump();

    httplib::Client cli(url.base);
    cli.set_connection_timeout(10, 0);
    cli.set_read_timeout(60, 0);
    httplib::Headers headers;
    if (const char* token = std::getenv("RRKIT_EMBED_TOKEN")) {
        headers.emplace("Authorization", std::string("Bearer ") + token);
    }

    std::size_t attempts = 0;
    httplib::Result res{nullptr, httplib::Error::Unknown};
    for (; attempts <= spec.max_retries; ++attempts) {
        res = cli.Post(url.path, headers, body, "application/json");
        if (res && res->status < 500) {
            break;
        }
    }
    if (!res || res->status >= 500) {
        const std::string why = res ? ("HTTP " + std::to_string(res->status))
                                    : httplib::to_string(res.error());
        throw TransportError("remote embedder: " + why + " after " +
                             std::to_string(std::min(attempts + 1, spec.max_retries + 1)) +
                             " attempt(s) against " + url.base + url.path);
    }
    if (res->status != 200) {
        throw ProtocolError("remote embedder: unexpected HTTP " + std::to_string(res->status));
    }

    nlohmann::json resp = nlohmann::json::parse(res->body, nullptr, false);
    if (resp.is_discarded() || !resp.is_object() || !resp.contains("embeddings") ||
        !resp["embeddings"].is_array()) {
        throw ProtocolError("remote embedder: response is not {\"embeddings\": [[...]]}");
    }
    const auto& arr = resp["embeddings"];
    if (arr.size() != texts.size()) {
        throw ProtocolError("remote embedder: got " + std::to_string(arr.size()) +
                            " embeddings for " + std::to_string(texts.size()) + " texts");
    }
    std::vector<Embedding> out;
    out.reserve(arr.size());
    for (const auto& row : arr) {
        Embedding e;
        e.values = row.get<std::vector<double>>();
        if (e.dim() != spec.dim) {
            throw ProtocolError("remote embedder: dimension " + std::to_string(e.dim()) +
                                " does not match configured " + std::to_string(spec.dim));
        }
        for (double x : e.values) {
            if (!std::isfinite(x)) {
                throw ProtocolError("remote embedder: non-finite value in embedding");
            }
        }
        l2_normalize(e, "remote embedder");
        quantize_to_binary32(e);
        out.push_back(std::move(e));
    }
    return out;
}

std::vector<Embedding> remote_embed(const EmbedderSpec& spec, const std::vector<std::string>& texts) {
    EmbedderSpec eff = spec;
    if (const char* ep = std::getenv("RRKIT_EMBED_ENDPOINT")) {
        eff.endpoint = ep;
    }
    if (eff.endpoint.empty()) {
        throw InvalidConfig("remote embedder: no endpoint configured");
    }
    const UrlParts url = split_url(eff.endpoint);
    const std::size_t batch = std::max<std::size_t>(1, eff.batch_size);
    const std::size_t n_batches = (texts.size() + batch - 1) / batch;

    std::vector<Embedding> out(texts.size());
    std::atomic<std::size_t> next{0};
    std::mutex err_mu;
    std::exception_ptr first_error;

    auto worker = [&]() {
        for (;;) {
            const std::size_t b = next.fetch_add(1);
            if (b >= n_batches) return;
            {
                std::lock_guard<std::mutex> lock(err_mu);
                if (first_error) return;
            }
            const std::size_t lo = b * batch;
            const std::size_t hi = std::min(lo + batch, texts.size());
            try {
                std::vector<std::string> slice(texts.begin() + static_cast<std::ptrdiff_t>(lo),
                                               texts.begin() + static_cast<std::ptrdiff_t>(hi));
                auto got = remote_call(eff, url, slice);
                for (std::size_t i = lo; i < hi; ++i) {
                    out[i] = std::move(got[i - lo]);
                }
            } catch (...) {
                std::lock_guard<std::mutex> lock(err_mu);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };

    const std::size_t workers = std::max<std::size_t>(1, std::min(eff.max_in_flight, n_batches));
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back(worker);
        }
        for (auto& t : pool) {
            t.join();
        }
    }
    if (first_error) {
        std::rethrow_exception(first_error);
    }
    return out;
}

std::string content_key(const std::string& text) {
    const std::uint64_t h = detail::fnv1a64(text.data(), text.size());
    char buf[20];
    std::snprintf(buf, sizeof(buf), "t%016llx", static_cast<unsigned long long>(h));
    return buf;
}

// Cache-backed memoization over the underlying provider; writes are exclusive.
class CachedEmbedder {
public:
    explicit CachedEmbedder(const EmbedderSpec& spec) : spec_(spec) {
        if (spec_.cache_path.empty()) {
            throw InvalidConfig("cached embedder: cache_path is required");
        }
        EmbedderSpec inner_spec = spec_;
        inner_spec.kind = spec_.endpoint.empty() ? EmbedderKind::Toy : EmbedderKind::Remote;
        inner_spec.cache_path.clear();
        inner_ = make_embedder(inner_spec);
        if (std::filesystem::exists(spec_.cache_path)) {
            CacheData data = cache_read(spec_.cache_path);
            if (data.dim != spec_.dim && data.embeddings.size() > 0) {
                throw InvalidConfig("cached embedder: cache dimension " + std::to_string(data.dim) +
                                    " does not match configured " + std::to_string(spec_.dim));
            }
            for (std::size_t i = 0; i < data.ids.size(); ++i) {
                by_key_.emplace(data.ids[i], std::move(data.embeddings[i]));
            }
        }
    }

    std::vector<Embedding> operator()(const std::vector<std::string>& texts) {
        std::lock_guard<std::mutex> lock(mu_);
        std::vector<std::string> miss_texts;
        std::vector<std::size_t> miss_slots;
        std::vector<Embedding> out(texts.size());
        for (std::size_t i = 0; i < texts.size(); ++i) {
            const auto it = by_key_.find(content_key(texts[i]));
            if (it != by_key_.end()) {
                out[i] = it->second;
            } else {
                miss_texts.push_back(texts[i]);
                miss_slots.push_back(i);
            }
        }
        if (!miss_texts.empty()) {
            auto fresh = inner_(miss_texts);
            for (std::size_t m = 0; m < miss_slots.size(); ++m) {
                out[miss_slots[m]] = fresh[m];
                by_key_[content_key(miss_texts[m])] = std::move(fresh[m]);
            }
            persist();
        }
        return out;
    }

private:
    void persist() const {
        std::vector<std::string> ids;
        std::vector<Embedding> embs;
        ids.reserve(by_key_.size());
        embs.reserve(by_key_.size());
        std::vector<const std::string*> keys;
        keys.reserve(by_key_.size());
        for (const auto& kv : by_key_) {
            keys.push_back(&kv.first);
        }
        std::sort(keys.begin(), keys.end(),
                  [](const std::string* a, const std::string* b) { return *a < *b; });
        for (const std::string* k : keys) {
            ids.push_back(*k);
            embs.push_back(by_key_.at(*k));
        }
        cache_write(spec_.cache_path, ids, embs, spec_.dim);
    }

    EmbedderSpec spec_;
    BatchEmbedFn inner_;
    std::unordered_map<std::string, Embedding> by_key_;
    std::mutex mu_;
};

} // namespace

Embedding toy_embed(const std::string& text, std::size_t dim, std::uint64_t seed) {
    if (dim == 0) {
        throw InvalidConfig("toy_embed: dim must be positive");
    }
    static const WhitespaceTokenizer tokenizer;
    Embedding e;
    e.values.assign(dim, 0.0);

    std::uint64_t seed_bytes[1] = {seed};
    const std::uint64_t seeded_basis = detail::fnv1a64(seed_bytes, sizeof(seed_bytes));
    for (const std::string& token : tokenizer.tokenize(text)) {
        const std::uint64_t h = detail::fnv1a64(token.data(), token.size(), seeded_basis);
        const std::size_t bucket = static_cast<std::size_t>(h % dim);
        const double sign = ((h >> 32) & 1u) ? 1.0 : -1.0;
        e.values[bucket] += sign;
    }

    const double n = e.norm();
    if (n == 0.0) {
        e.values[0] = 1.0;
        return e;
    }
    for (double& x : e.values) {
        x /= n;
    }
    quantize_to_binary32(e);
    return e;
}

BatchEmbedFn make_embedder(const EmbedderSpec& spec) {
    if (spec.dim == 0) {
        throw InvalidConfig("embedder: dim must be positive");
    }
    switch (spec.kind) {
    case EmbedderKind::Toy:
        return [spec](const std::vector<std::string>& texts) {
            if (texts.empty()) {
                throw InvalidInput("embed_batch: texts must be non-empty");
            }
            std::vector<Embedding> out;
            out.reserve(texts.size());
            for (const auto& t : texts) {
                out.push_back(toy_embed(t, spec.dim, spec.seed));
            }
            return out;
        };
    case EmbedderKind::Remote:
        return [spec](const std::vector<std::string>& texts) {
            if (texts.empty()) {
                throw InvalidInput("embed_batch: texts must be non-empty");
            }
            return remote_embed(spec, texts);
        };
    case EmbedderKind::Cached: {
        auto state = std::make_shared<CachedEmbedder>(spec);
        return [state](const std::vector<std::string>& texts) {
            if (texts.empty()) {
                throw InvalidInput("embed_batch: texts must be non-empty");
            }
            return (*state)(texts);
        };
    }
    }
    throw InvalidConfig("embedder: unknown kind");
}

std::vector<Embedding> embed_batch(const std::vector<std::string>& texts, const EmbedderSpec& spec) {
    return make_embedder(spec)(texts);
}

} // namespace rrkit
