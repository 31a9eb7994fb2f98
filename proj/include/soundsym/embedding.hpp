#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace soundsym {

inline constexpr std::size_t kDefaultEmbeddingDim = 1024;
inline constexpr double kUnitNormTolerance = 1e-6;

/// A point in the joint text-image space. Components are stored as 32-bit
/// floats so cached vectors round-trip bit-exactly; arithmetic is in double.
class EmbeddingVector {
public:
    EmbeddingVector() = default;
    EmbeddingVector(std::vector<float> values, bool normalized)
        : values_(std::move(values)), normalized_(normalized) {}

    /// Normalizes in double precision. Throws ZeroMeanError for a zero vector.
    static EmbeddingVector unit(std::span<const double> raw);
    static EmbeddingVector unit(std::span<const float> raw);

    std::span<const float> values() const { return values_; }
    std::size_t dim() const { return values_.size(); }
    bool normalized() const { return normalized_; }
    double norm() const;

    /// Throws InvalidArgumentError unless flagged normalized and within tolerance.
    void require_unit(const char* what) const;

    bool operator==(const EmbeddingVector&) const = default;

private:
    std::vector<float> values_;
    bool normalized_ = false;
};

double dot(const EmbeddingVector& a, const EmbeddingVector& b);
double cosine(const EmbeddingVector& a, const EmbeddingVector& b);

struct GenerationRequest {
    std::string prompt;
    int n_images = 50;
    std::optional<long long> seed;
    double guidance_scale = 9.0;
    int steps = 20;
    std::string sampler_id = "dpm-solver++";
};

struct GenerationBatch {
    GenerationRequest request;
    std::vector<EmbeddingVector> image_embeddings;
    EmbeddingVector mean_embedding;
    std::size_t centroid_index = 0;
    std::vector<std::string> image_refs;
};

/// Normalized arithmetic mean of per-image unit embeddings. Throws ZeroMeanError
/// when the mean vanishes (norm < 1e-12).
EmbeddingVector mean_embedding(std::span<const EmbeddingVector> images);

/// Index of the embedding with the highest cosine to `mean`; lowest index on ties.
std::size_t centroid_index(std::span<const EmbeddingVector> images, const EmbeddingVector& mean);

/// Assembles a batch from raw per-image vectors (normalized here) and refs.
GenerationBatch make_batch(GenerationRequest request, std::vector<EmbeddingVector> images,
                           std::vector<std::string> refs);

/// image_refs[centroid_index], or "#<index>" when the backend produced no refs.
std::string centroid_image(const GenerationBatch& batch);

}  // namespace soundsym
