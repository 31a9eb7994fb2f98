#include "soundsym/cache.hpp"

#include <fcntl.h>
#include <openssl/evp.h>
#include <sys/file.h>
#include <unistd.h>

#include <bit>
#include <cerrno>
#include <cmath>
#include <cstring>
#include <fstream>
#include <json.hpp>

#include "soundsym/errors.hpp"

namespace soundsym {

static_assert(std::endian::native == std::endian::little, "cache records are little-endian f32");

namespace {

using nlohmann::json;

std::string base64_encode(const std::vector<float>& data) {
    const auto* bytes = reinterpret_cast<const unsigned char*>(data.data());
    const int n = static_cast<int>(data.size() * sizeof(float));
    std::string out(4 * ((n + 2) / 3), '\0');
    int written = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), bytes, n);
    out.resize(static_cast<std::size_t>(written));
    return out;
}

std::vector<float> base64_decode(const std::string& text, std::size_t dim) {
    if (text.size() % 4 != 0) throw FormatError("base64 payload length is not a multiple of 4");
    std::string raw(3 * text.size() / 4, '\0');
    int n = EVP_DecodeBlock(reinterpret_cast<unsigned char*>(raw.data()),
                            reinterpret_cast<const unsigned char*>(text.data()), static_cast<int>(text.size()));
    if (n < 0) throw FormatError("invalid base64 payload");
    // EVP_DecodeBlock keeps the zero bytes produced by '=' padding.
    std::size_t padding = 0;
    if (!text.empty() && text.back() == '=') ++padding;
    if (text.size() > 1 && text[text.size() - 2] == '=') ++padding;
    const std::size_t len = static_cast<std::size_t>(n) - padding;
    if (len != dim * sizeof(float)) {
        throw FormatError("payload holds " + std::to_string(len) + " bytes, expected " +
                          std::to_string(dim * sizeof(float)));
    }
    std::vector<float> out(dim);
    std::memcpy(out.data(), raw.data(), len);
    return out;
}

std::string_view kind_name(CacheKind kind) { return kind == CacheKind::Text ? "TEXT" : "IMAGE_MEAN"; }

CacheKind parse_kind(const std::string& s) {
    if (s == "TEXT") return CacheKind::Text;
    if (s == "IMAGE_MEAN") return CacheKind::ImageMean;
    throw FormatError("unknown cache kind '" + s + "'");
}

json key_json(const CacheKey& key) {
    return json{{"backend_id", key.backend_id},
                {"model_id", key.model_id},
                {"kind", kind_name(key.kind)},
                {"prompt", key.prompt}};
}

class FileLock {
public:
    FileLock(int fd, int op) : fd_(fd) {
        while (::flock(fd_, op) != 0) {
            if (errno != EINTR) throw IoError(std::string("flock failed: ") + std::strerror(errno));
        }
    }
    ~FileLock() { ::flock(fd_, LOCK_UN); }
    FileLock(const FileLock&) = delete;
    FileLock& operator=(const FileLock&) = delete;

private:
    int fd_;
};

class Fd {
public:
    explicit Fd(int fd) : fd_(fd) {}
    ~Fd() {
        if (fd_ >= 0) ::close(fd_);
    }
    Fd(const Fd&) = delete;
    Fd& operator=(const Fd&) = delete;
    int get() const { return fd_; }

private:
    int fd_;
};

}  // namespace

std::string CacheKey::canonical() const { return key_json(*this).dump(); }

std::string EmbeddingCache::encode_record(const CacheKey& key, const EmbeddingVector& vec) {
    std::vector<float> data(vec.values().begin(), vec.values().end());
    json rec{{"key", key_json(key)}, {"dim", data.size()}, {"dtype", "f32"}, {"data_b64", base64_encode(data)}};
    return rec.dump() + "\n";
}

EmbeddingCache::EmbeddingCache(std::filesystem::path path) : path_(std::move(path)) {
    if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
    Fd fd(::open(path_.c_str(), O_CREAT | O_RDONLY, 0644));
    if (fd.get() < 0) throw IoError("cannot open cache " + path_.string() + ": " + std::strerror(errno));
    reload();
}

void EmbeddingCache::reload() {
    Fd fd(::open(path_.c_str(), O_RDONLY));
    if (fd.get() < 0) throw IoError("cannot open cache " + path_.string() + ": " + std::strerror(errno));
    std::string content;
    {
        FileLock lock(fd.get(), LOCK_SH);
        char buf[1 << 16];
        ssize_t n;
        while ((n = ::read(fd.get(), buf, sizeof buf)) > 0) content.append(buf, static_cast<std::size_t>(n));
        if (n < 0) throw IoError("cannot read cache " + path_.string());
    }

    std::unordered_map<std::string, EmbeddingVector> index;
    std::size_t record = 0;
    std::size_t start = 0;
    while (start < content.size()) {
        std::size_t end = content.find('\n', start);
        if (end == std::string::npos) end = content.size();
        std::string_view line(content.data() + start, end - start);
        start = end + 1;
        if (line.empty()) continue;
        try {
            json rec = json::parse(line);
            const json& k = rec.at("key");
            CacheKey key{k.at("backend_id").get<std::string>(), k.at("model_id").get<std::string>(),
                         parse_kind(k.at("kind").get<std::string>()), k.at("prompt").get<std::string>()};
            if (rec.at("dtype").get<std::string>() != "f32") throw FormatError("dtype must be f32");
            auto dim = rec.at("dim").get<std::size_t>();
            std::vector<float> values = base64_decode(rec.at("data_b64").get<std::string>(), dim);
            double sq = 0.0;
            for (float v : values) sq += static_cast<double>(v) * v;
            bool unit = std::abs(std::sqrt(sq) - 1.0) < kUnitNormTolerance;
            index.insert_or_assign(key.canonical(), EmbeddingVector(std::move(values), unit));
        } catch (const std::exception& e) {
            throw StoreCorruptionError("cache " + path_.string() + ": record " + std::to_string(record) +
                                       " is malformed: " + e.what());
        }
        ++record;
    }

    std::lock_guard lock(mu_);
    index_ = std::move(index);
}

std::optional<EmbeddingVector> EmbeddingCache::get(const CacheKey& key) const {
    std::lock_guard lock(mu_);
    auto it = index_.find(key.canonical());
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

void EmbeddingCache::put(const CacheKey& key, const EmbeddingVector& vec) {
    const std::string line = encode_record(key, vec);
    {
        Fd fd(::open(path_.c_str(), O_WRONLY | O_APPEND | O_CREAT, 0644));
        if (fd.get() < 0) throw IoError("cannot append to cache " + path_.string() + ": " + std::strerror(errno));
        FileLock lock(fd.get(), LOCK_EX);
        std::size_t off = 0;
        while (off < line.size()) {
            ssize_t n = ::write(fd.get(), line.data() + off, line.size() - off);
            if (n < 0) {
                if (errno == EINTR) continue;
                throw IoError("cannot append to cache " + path_.string() + ": " + std::strerror(errno));
            }
            off += static_cast<std::size_t>(n);
        }
    }
    std::lock_guard lock(mu_);
    index_.insert_or_assign(key.canonical(), vec);
}

std::size_t EmbeddingCache::size() const {
    std::lock_guard lock(mu_);
    return index_.size();
}

}  // namespace soundsym
