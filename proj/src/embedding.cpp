#include "soundsym/embedding.hpp"

#include <cmath>

#include "soundsym/errors.hpp"

namespace soundsym {

namespace {

template <typename T>
EmbeddingVector unit_impl(std::span<const T> raw) {
    double sq = 0.0;
    for (T v : raw) sq += static_cast<double>(v) * static_cast<double>(v);
    const double norm = std::sqrt(sq);
    if (!(norm >= 1e-12)) {
        throw ZeroMeanError("cannot normalize a vector with norm " + std::to_string(norm));
    }
    std::vector<float> out(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
        out[i] = static_cast<float>(static_cast<double>(raw[i]) / norm);
    }
    return EmbeddingVector(std::move(out), true);
}

}  // namespace

EmbeddingVector EmbeddingVector::unit(std::span<const double> raw) { return unit_impl(raw); }
EmbeddingVector EmbeddingVector::unit(std::span<const float> raw) { return unit_impl(raw); }

double EmbeddingVector::norm() const {
    double sq = 0.0;
    for (float v : values_) sq += static_cast<double>(v) * v;
    return std::sqrt(sq);
}

void EmbeddingVector::require_unit(const char* what) const {
    if (!normalized_ || std::abs(norm() - 1.0) >= kUnitNormTolerance) {
        throw InvalidArgumentError(std::string(what) + " must be a unit-normalized embedding");
    }
}

double dot(const EmbeddingVector& a, const EmbeddingVector& b) {
    if (a.dim() != b.dim()) {
        throw DimensionMismatchError("dot product of vectors with dimensions " + std::to_string(a.dim()) +
                                     " and " + std::to_string(b.dim()));
    }
    auto x = a.values();
    auto y = b.values();
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += static_cast<double>(x[i]) * y[i];
    return s;
}

double cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
    if (a.normalized() && b.normalized()) return dot(a, b);
    return dot(a, b) / (a.norm() * b.norm());
}

EmbeddingVector mean_embedding(std::span<const EmbeddingVector> images) {
    if (images.empty()) throw InvalidArgumentError("mean of an empty image batch");
    const std::size_t d = images.front().dim();
    std::vector<double> acc(d, 0.0);
    for (const auto& e : images) {
        if (e.dim() != d) throw DimensionMismatchError("image embeddings of mixed dimension in one batch");
        auto v = e.values();
        for (std::size_t i = 0; i < d; ++i) acc[i] += v[i];
    }
    for (double& x : acc) x /= static_cast<double>(images.size());
    return EmbeddingVector::unit(std::span<const double>(acc));
}

std::size_t centroid_index(std::span<const EmbeddingVector> images, const EmbeddingVector& mean) {
    if (images.empty()) throw InvalidArgumentError("centroid of an empty image batch");
    std::size_t best = 0;
    double best_cos = cosine(images[0], mean);
    for (std::size_t i = 1; i < images.size(); ++i) {
        double c = cosine(images[i], mean);
        if (c > best_cos) {
            best_cos = c;
            best = i;
        }
    }
    return best;
}

GenerationBatch make_batch(GenerationRequest request, std::vector<EmbeddingVector> images,
                           std::vector<std::string> refs) {
    GenerationBatch batch;
    batch.request = std::move(request);
    batch.image_embeddings.reserve(images.size());
    for (auto& e : images) {
        batch.image_embeddings.push_back(e.normalized() ? std::move(e) : EmbeddingVector::unit(e.values()));
    }
    batch.mean_embedding = mean_embedding(batch.image_embeddings);
    batch.centroid_index = centroid_index(batch.image_embeddings, batch.mean_embedding);
    batch.image_refs = std::move(refs);
    return batch;
}

std::string centroid_image(const GenerationBatch& batch) {
    if (batch.image_embeddings.empty()) throw InvalidArgumentError("centroid of an empty batch");
    if (batch.centroid_index < batch.image_refs.size()) return batch.image_refs[batch.centroid_index];
    return "#" + std::to_string(batch.centroid_index);
}

}  // namespace soundsym
