#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "soundsym/cache.hpp"
#include "soundsym/embedding.hpp"
#include "soundsym/errors.hpp"

namespace soundsym {

/// Raised when a generation call returns fewer images than requested. The
/// images that did arrive are kept rather than silently truncated.
class PartialBatchError : public Error {
public:
    PartialBatchError(const std::string& what, int requested, std::vector<EmbeddingVector> partial,
                      std::vector<std::string> refs)
        : Error(SS_ERR_PARTIAL_BATCH, what),
          requested(requested),
          partial(std::move(partial)),
          partial_refs(std::move(refs)) {}

    int requested;
    std::vector<EmbeddingVector> partial;
    std::vector<std::string> partial_refs;
};

/// Source of unit-normalized embeddings. Implementations must be safe to call
/// from up to parallelism() threads at once.
class EmbeddingBackend {
public:
    virtual ~EmbeddingBackend() = default;

    virtual std::string backend_id() const = 0;
    virtual std::string model_id() const = 0;
    virtual std::size_t dim() const = 0;
    virtual int parallelism() const { return 1; }

    virtual EmbeddingVector embed_text(const std::string& prompt) = 0;
    virtual std::vector<EmbeddingVector> embed_texts(const std::vector<std::string>& prompts);

    virtual bool supports_generation() const { return false; }
    virtual GenerationBatch generate_and_embed(const GenerationRequest& req);

    /// Mean image embedding for a prompt; CachedBackend overrides this to
    /// persist only the mean.
    virtual EmbeddingVector embed_image_mean(const GenerationRequest& req);
};

/// Direction from a keyed hash of the prompt, uniform on the sphere.
class HashMockBackend : public EmbeddingBackend {
public:
    explicit HashMockBackend(unsigned long long seed = 0, std::size_t dim = kDefaultEmbeddingDim,
                             std::string model_id = "hash-mock");

    std::string backend_id() const override { return "mock"; }
    std::string model_id() const override { return model_id_; }
    std::size_t dim() const override { return dim_; }
    int parallelism() const override { return 8; }
    EmbeddingVector embed_text(const std::string& prompt) override;
    bool supports_generation() const override { return true; }
    GenerationBatch generate_and_embed(const GenerationRequest& req) override;

private:
    unsigned long long seed_;
    std::size_t dim_;
    std::string model_id_;
};

/// Returns +1 for a sharp item, -1 for a round item, 0 when the prompt carries
/// no labelled item.
using PromptLabeler = std::function<int(const std::string& prompt)>;

struct PlantedAxisParams {
    unsigned long long seed = 0;
    std::size_t dim = kDefaultEmbeddingDim;
    double rho = 1.0;        // signal strength along the hidden axis
    double sigma = 0.1;      // expected norm of the isotropic noise
    double mean_norm = 1.0;  // norm of the shared offset
};

/// Synthetic space with a known sharp/round direction:
/// normalize(mean + rho * label * axis + noise).
class PlantedAxisBackend : public EmbeddingBackend {
public:
    PlantedAxisBackend(PlantedAxisParams params, PromptLabeler labeler, std::string model_id = "planted-axis");

    std::string backend_id() const override { return "planted"; }
    std::string model_id() const override { return model_id_; }
    std::size_t dim() const override { return params_.dim; }
    int parallelism() const override { return 8; }
    EmbeddingVector embed_text(const std::string& prompt) override;
    bool supports_generation() const override { return true; }
    GenerationBatch generate_and_embed(const GenerationRequest& req) override;

    const EmbeddingVector& hidden_axis() const { return axis_; }
    const PlantedAxisParams& params() const { return params_; }

private:
    EmbeddingVector sample(const std::string& stream, int label) const;

    PlantedAxisParams params_;
    PromptLabeler labeler_;
    std::string model_id_;
    EmbeddingVector axis_;
    std::vector<double> offset_;
};

struct LiveBackendOptions {
    std::string server_url;
    std::string model_id = "live";
    std::size_t dim = kDefaultEmbeddingDim;
    int parallelism = 4;
    int timeout_seconds = 600;
    std::size_t text_batch = 64;
};

/// JSON-over-HTTP client for a model server exposing /v1/embed_text and
/// /v1/generate_and_embed.
class LiveBackend : public EmbeddingBackend {
public:
    explicit LiveBackend(LiveBackendOptions options);

    std::string backend_id() const override { return "live"; }
    std::string model_id() const override { return options_.model_id; }
    std::size_t dim() const override { return options_.dim; }
    int parallelism() const override { return options_.parallelism; }
    EmbeddingVector embed_text(const std::string& prompt) override;
    std::vector<EmbeddingVector> embed_texts(const std::vector<std::string>& prompts) override;
    bool supports_generation() const override { return true; }
    GenerationBatch generate_and_embed(const GenerationRequest& req) override;

private:
    std::string post(const std::string& path, const std::string& body) const;

    LiveBackendOptions options_;
    std::string host_;
};

/// Read-through cache in front of another backend.
class CachedBackend : public EmbeddingBackend {
public:
    CachedBackend(std::shared_ptr<EmbeddingBackend> inner, std::shared_ptr<EmbeddingCache> cache);

    std::string backend_id() const override { return inner_->backend_id(); }
    std::string model_id() const override { return inner_->model_id(); }
    std::size_t dim() const override { return inner_->dim(); }
    int parallelism() const override { return inner_->parallelism(); }
    EmbeddingVector embed_text(const std::string& prompt) override;
    std::vector<EmbeddingVector> embed_texts(const std::vector<std::string>& prompts) override;
    bool supports_generation() const override { return inner_->supports_generation(); }
    GenerationBatch generate_and_embed(const GenerationRequest& req) override;
    EmbeddingVector embed_image_mean(const GenerationRequest& req) override;

    const EmbeddingCache& cache() const { return *cache_; }

private:
    std::shared_ptr<EmbeddingBackend> inner_;
    std::shared_ptr<EmbeddingCache> cache_;
};

/// Cache model id for image means: the generation settings are folded in so
/// runs with different batch sizes or samplers never share entries.
std::string image_mean_model_id(const std::string& model_id, const GenerationRequest& req);

/// Embeds `prompts` in order, fanning out to at most backend.parallelism()
/// worker threads.
std::vector<EmbeddingVector> embed_all_text(EmbeddingBackend& backend, const std::vector<std::string>& prompts);
std::vector<EmbeddingVector> embed_all_image_means(EmbeddingBackend& backend,
                                                   const std::vector<GenerationRequest>& requests);

}  // namespace soundsym
