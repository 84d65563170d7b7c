#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "rrkit/embedding.hpp"

namespace rrkit {

enum class EmbedderKind { Toy, Remote, Cached };

/// Selects and parameterizes an embedding provider.
///   Toy:    deterministic feature-hash embedder, fully fixed by (dim, seed).
///   Remote: HTTP JSON service; POST {"texts": [...]} to `endpoint`, expects
///           {"embeddings": [[...] ...]}. Requests carry at most `batch_size`
///           texts and at most `max_in_flight` run concurrently. The
///           RRKIT_EMBED_ENDPOINT env var overrides `endpoint`; if
///           RRKIT_EMBED_TOKEN is set it is sent as a bearer token.
///   Cached: memoizes the underlying provider (remote when `endpoint` is set,
///           toy otherwise) in the binary cache file at `cache_path`, keyed by
///           text content.
/// Every provider returns one L2-normalized dim-length vector per input text,
/// rounded to binary32 precision so persisted values round-trip exactly.
struct EmbedderSpec {
    EmbedderKind kind = EmbedderKind::Toy;
    std::size_t dim = 64;
    std::uint64_t seed = 0;
    std::string endpoint;
    std::string cache_path;
    std::size_t batch_size = 128;
    std::size_t max_retries = 2;
    std::size_t max_in_flight = 4;
};

using BatchEmbedFn = std::function<std::vector<Embedding>(const std::vector<std::string>&)>;

/// Single-text toy embedding: whitespace tokens are feature-hashed into dim
/// signed buckets with a seeded 64-bit hash, then L2-normalized. A text whose
/// accumulator is all zero maps to the first basis vector.
Embedding toy_embed(const std::string& text, std::size_t dim, std::uint64_t seed);

/// Builds a batch embedding function for the given provider.
BatchEmbedFn make_embedder(const EmbedderSpec& spec);

/// One-shot convenience around make_embedder. texts must be non-empty.
std::vector<Embedding> embed_batch(const std::vector<std::string>& texts, const EmbedderSpec& spec);

} // namespace rrkit
