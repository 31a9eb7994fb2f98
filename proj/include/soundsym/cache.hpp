#pragma once

#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>

#include "soundsym/embedding.hpp"

namespace soundsym {

enum class CacheKind { Text, ImageMean };

struct CacheKey {
    std::string backend_id;
    std::string model_id;
    CacheKind kind = CacheKind::Text;
    std::string prompt;

    /// Canonical UTF-8 form: compact JSON with keys in sorted order.
    std::string canonical() const;
    bool operator==(const CacheKey&) const = default;
};

/// Append-only JSON Lines store of embeddings. Each record carries its key and
/// the little-endian f32 components in base64; later records for a key shadow
/// earlier ones. Appends are single write(2) calls under an exclusive flock, so
/// several processes may share one file.
class EmbeddingCache {
public:
    /// Opens (creating if needed) and indexes the store. Throws
    /// StoreCorruptionError naming the first malformed record.
    explicit EmbeddingCache(std::filesystem::path path);

    std::optional<EmbeddingVector> get(const CacheKey& key) const;
    void put(const CacheKey& key, const EmbeddingVector& vec);

    /// Re-reads the file to pick up records appended by other writers.
    void reload();

    std::size_t size() const;
    const std::filesystem::path& path() const { return path_; }

    static std::string encode_record(const CacheKey& key, const EmbeddingVector& vec);

private:
    std::filesystem::path path_;
    mutable std::mutex mu_;
    std::unordered_map<std::string, EmbeddingVector> index_;
};

}  // namespace soundsym
