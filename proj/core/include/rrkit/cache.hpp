#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "rrkit/embedding.hpp"

namespace rrkit {

/// Binary embedding cache. Layout, all integers little-endian:
///   magic   8 bytes "RRKVECF\0"
///   version u32 (currently 1)
///   dim     u32
///   count   u64
///   id table: count entries of (u32 byte length, raw UTF-8 bytes)
///   payload: count*dim IEEE-754 binary32 values, row-major
///   checksum: u64 FNV-1a over every preceding byte
/// Values are stored at binary32 precision so round-trips are bit-exact across
/// platforms; the vector index persists itself in this same format.
struct CacheData {
    std::size_t dim = 0;
    std::vector<std::string> ids;
    std::vector<Embedding> embeddings;
};

/// dim may be left 0 to infer it from the first embedding (required when
/// writing an empty cache of known dimension).
void cache_write(const std::string& path, const std::vector<std::string>& ids,
                 const std::vector<Embedding>& embeddings, std::size_t dim = 0);

CacheData cache_read(const std::string& path);

} // namespace rrkit
