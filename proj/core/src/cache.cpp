#include "rrkit/cache.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <unordered_set>

#include "rrkit/errors.hpp"
#include "rrkit/random.hpp"

namespace rrkit {

namespace {

constexpr char kMagic[8] = {'R', 'R', 'K', 'V', 'E', 'C', 'F', '\0'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::string& buf, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) {
        buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
    }
}

void put_u64(std::string& buf, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
        buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
    }
}

std::uint32_t get_u32(const std::string& buf, std::size_t off) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
        v |= static_cast<std::uint32_t>(static_cast<unsigned char>(buf[off + i])) << (8 * i);
    }
    return v;
}

std::uint64_t get_u64(const std::string& buf, std::size_t off) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
        v |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf[off + i])) << (8 * i);
    }
    return v;
}

} // namespace

void cache_write(const std::string& path, const std::vector<std::string>& ids,
                 const std::vector<Embedding>& embeddings, std::size_t dim) {
    if (ids.size() != embeddings.size()) {
        throw InvalidInput("cache_write: ids and embeddings disagree in count");
    }
    std::unordered_set<std::string> seen;
    for (const auto& id : ids) {
        if (!seen.insert(id).second) {
            throw InvalidInput("cache_write: duplicate id \"" + id + "\"");
        }
    }
    if (dim == 0 && !embeddings.empty()) {
        dim = embeddings.front().dim();
    }
    for (const auto& e : embeddings) {
        if (e.dim() != dim) {
            throw InvalidInput("cache_write: embedding dimension mismatch");
        }
    }

    std::string buf;
    buf.reserve(24 + ids.size() * 16 + embeddings.size() * dim * 4 + 8);
    buf.append(kMagic, sizeof(kMagic));
    put_u32(buf, kVersion);
    put_u32(buf, static_cast<std::uint32_t>(dim));
    put_u64(buf, static_cast<std::uint64_t>(ids.size()));
    for (const auto& id : ids) {
        put_u32(buf, static_cast<std::uint32_t>(id.size()));
        buf.append(id);
    }
    for (const auto& e : embeddings) {
        for (double x : e.values) {
            put_u32(buf, std::bit_cast<std::uint32_t>(static_cast<float>(x)));
        }
    }
    put_u64(buf, detail::fnv1a64(buf.data(), buf.size()));

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cache_write: cannot open " + path);
    }
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!out) {
        throw IoError("cache_write: short write to " + path);
    }
}

CacheData cache_read(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cache_read: cannot open " + path);
    }
    std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    if (buf.size() < 24 + 8) {
        throw IntegrityError("cache_read: " + path + " truncated before header end");
    }
    if (std::memcmp(buf.data(), kMagic, sizeof(kMagic)) != 0) {
        throw IntegrityError("cache_read: " + path + " has a corrupt header (bad magic)");
    }
    if (get_u32(buf, 8) != kVersion) {
        throw IntegrityError("cache_read: " + path + " has unsupported version " +
                             std::to_string(get_u32(buf, 8)));
    }
    const std::size_t dim = get_u32(buf, 12);
    const std::uint64_t count = get_u64(buf, 16);

    const std::uint64_t stored = get_u64(buf, buf.size() - 8);
    const std::uint64_t computed = detail::fnv1a64(buf.data(), buf.size() - 8);
    if (stored != computed) {
        throw IntegrityError("cache_read: " + path + " checksum mismatch");
    }

    // each id entry takes at least 4 bytes, so count is bounded by file size
    if (count > (buf.size() - 24 - 8) / 4) {
        throw IntegrityError("cache_read: " + path + " declares an impossible entry count");
    }

    CacheData data;
    data.dim = dim;
    data.ids.reserve(count);
    data.embeddings.reserve(count);

    std::size_t off = 24;
    const std::size_t payload_end = buf.size() - 8;
    for (std::uint64_t i = 0; i < count; ++i) {
        if (off + 4 > payload_end) {
            throw IntegrityError("cache_read: " + path + " truncated inside id table");
        }
        const std::uint32_t len = get_u32(buf, off);
        off += 4;
        if (off + len > payload_end) {
            throw IntegrityError("cache_read: " + path + " truncated inside id table");
        }
        data.ids.emplace_back(buf.data() + off, len);
        off += len;
    }
    if (payload_end - off != count * dim * 4) {
        throw IntegrityError("cache_read: " + path + " payload size mismatch");
    }
    for (std::uint64_t i = 0; i < count; ++i) {
        Embedding e;
        e.values.resize(dim);
        for (std::size_t d = 0; d < dim; ++d) {
            const float f = std::bit_cast<float>(get_u32(buf, off));
            off += 4;
            e.values[d] = static_cast<double>(f);
        }
        data.embeddings.push_back(std::move(e));
    }
    return data;
}

} // namespace rrkit
