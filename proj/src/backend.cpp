#include "soundsym/backend.hpp"

#include <openssl/sha.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <httplib.h>
#include <json.hpp>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

namespace soundsym {

namespace {

using nlohmann::json;

// Deterministic RNG stream keyed by (seed, label) through SHA-256, so mock
// outputs depend only on the prompt and backend seed.
std::mt19937_64 keyed_rng(unsigned long long seed, const std::string& stream) {
    std::string material = std::to_string(seed) + '\x1f' + stream;
    unsigned char digest[SHA256_DIGEST_LENGTH];
    SHA256(reinterpret_cast<const unsigned char*>(material.data()), material.size(), digest);
    std::vector<std::uint32_t> words(SHA256_DIGEST_LENGTH / 4);
    for (std::size_t i = 0; i < words.size(); ++i) {
        words[i] = std::uint32_t(digest[4 * i]) | std::uint32_t(digest[4 * i + 1]) << 8 |
                   std::uint32_t(digest[4 * i + 2]) << 16 | std::uint32_t(digest[4 * i + 3]) << 24;
    }
    std::seed_seq seq(words.begin(), words.end());
    return std::mt19937_64(seq);
}

std::vector<double> gaussian(unsigned long long seed, const std::string& stream, std::size_t dim, double stddev) {
    auto rng = keyed_rng(seed, stream);
    std::normal_distribution<double> normal(0.0, stddev);
    std::vector<double> out(dim);
    for (double& x : out) x = normal(rng);
    return out;
}

void require_prompt(const std::string& prompt) {
    if (prompt.empty()) throw InvalidArgumentError("prompt must be nonempty");
}

void require_images(const GenerationRequest& req) {
    require_prompt(req.prompt);
    if (req.n_images < 1) throw InvalidArgumentError("n_images must be at least 1");
    if (req.steps < 1) throw InvalidArgumentError("steps must be at least 1");
}

template <typename Fn>
void parallel_for(std::size_t count, int parallelism, Fn&& fn) {
    const std::size_t workers = std::min<std::size_t>(count, static_cast<std::size_t>(std::max(1, parallelism)));
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mu;
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(failure_mu);
                    if (!failure) failure = std::current_exception();
                    next = count;
                }
            }
        });
    }
    pool.clear();
    if (failure) std::rethrow_exception(failure);
}

EmbeddingVector parse_vector(const json& row, std::size_t dim) {
    if (!row.is_array() || row.size() != dim) {
        throw DimensionMismatchError("server vector has " + std::to_string(row.is_array() ? row.size() : 0) +
                                     " components, expected " + std::to_string(dim));
    }
    std::vector<double> raw(dim);
    for (std::size_t i = 0; i < dim; ++i) raw[i] = row[i].get<double>();
    return EmbeddingVector::unit(std::span<const double>(raw));
}

}  // namespace

std::vector<EmbeddingVector> EmbeddingBackend::embed_texts(const std::vector<std::string>& prompts) {
    std::vector<EmbeddingVector> out;
    out.reserve(prompts.size());
    for (const auto& p : prompts) out.push_back(embed_text(p));
    return out;
}

GenerationBatch EmbeddingBackend::generate_and_embed(const GenerationRequest&) {
    throw BackendUnavailableError("backend '" + backend_id() + "' does not support image generation");
}

EmbeddingVector EmbeddingBackend::embed_image_mean(const GenerationRequest& req) {
    return generate_and_embed(req).mean_embedding;
}

// ---------------------------------------------------------------------------

HashMockBackend::HashMockBackend(unsigned long long seed, std::size_t dim, std::string model_id)
    : seed_(seed), dim_(dim), model_id_(std::move(model_id)) {
    if (dim_ == 0) throw InvalidArgumentError("embedding dimension must be positive");
}

EmbeddingVector HashMockBackend::embed_text(const std::string& prompt) {
    require_prompt(prompt);
    auto raw = gaussian(seed_, "text|" + prompt, dim_, 1.0);
    return EmbeddingVector::unit(std::span<const double>(raw));
}

GenerationBatch HashMockBackend::generate_and_embed(const GenerationRequest& req) {
    require_images(req);
    EmbeddingVector centre = embed_text(req.prompt);
    const long long gen_seed = req.seed.value_or(0);
    std::vector<EmbeddingVector> images;
    std::vector<std::string> refs;
    for (int i = 0; i < req.n_images; ++i) {
        std::string stream = "image|" + std::to_string(gen_seed) + "|" + std::to_string(i) + "|" + req.prompt;
        auto raw = gaussian(seed_, stream, dim_, 0.5 / std::sqrt(static_cast<double>(dim_)));
        auto c = centre.values();
        for (std::size_t d = 0; d < dim_; ++d) raw[d] += c[d];
        images.push_back(EmbeddingVector::unit(std::span<const double>(raw)));
        refs.push_back("mock://" + req.prompt + "/" + std::to_string(gen_seed) + "/" + std::to_string(i));
    }
    return make_batch(req, std::move(images), std::move(refs));
}

// ---------------------------------------------------------------------------

PlantedAxisBackend::PlantedAxisBackend(PlantedAxisParams params, PromptLabeler labeler, std::string model_id)
    : params_(params), labeler_(std::move(labeler)), model_id_(std::move(model_id)) {
    if (params_.dim < 2) throw InvalidArgumentError("planted-axis backend needs dimension >= 2");
    if (params_.sigma < 0 || params_.rho < 0) throw InvalidArgumentError("rho and sigma must be nonnegative");
    auto a = gaussian(params_.seed, "hidden-axis", params_.dim, 1.0);
    axis_ = EmbeddingVector::unit(std::span<const double>(a));

    // Shared offset, orthogonal to the axis so it carries no class signal.
    offset_ = gaussian(params_.seed, "shared-offset", params_.dim, 1.0);
    auto ax = axis_.values();
    double proj = 0.0;
    for (std::size_t i = 0; i < params_.dim; ++i) proj += offset_[i] * ax[i];
    double sq = 0.0;
    for (std::size_t i = 0; i < params_.dim; ++i) {
        offset_[i] -= proj * ax[i];
        sq += offset_[i] * offset_[i];
    }
    const double scale = params_.mean_norm / std::sqrt(sq);
    for (double& x : offset_) x *= scale;
}

EmbeddingVector PlantedAxisBackend::sample(const std::string& stream, int label) const {
    const double noise_sd = params_.sigma / std::sqrt(static_cast<double>(params_.dim));
    auto raw = gaussian(params_.seed, stream, params_.dim, noise_sd);
    auto ax = axis_.values();
    for (std::size_t i = 0; i < params_.dim; ++i) {
        raw[i] += offset_[i] + params_.rho * label * static_cast<double>(ax[i]);
    }
    return EmbeddingVector::unit(std::span<const double>(raw));
}

EmbeddingVector PlantedAxisBackend::embed_text(const std::string& prompt) {
    require_prompt(prompt);
    return sample("text|" + prompt, labeler_ ? labeler_(prompt) : 0);
}

GenerationBatch PlantedAxisBackend::generate_and_embed(const GenerationRequest& req) {
    require_images(req);
    const int label = labeler_ ? labeler_(req.prompt) : 0;
    const long long gen_seed = req.seed.value_or(0);
    std::vector<EmbeddingVector> images;
    std::vector<std::string> refs;
    for (int i = 0; i < req.n_images; ++i) {
        std::string tag = std::to_string(gen_seed) + "|" + std::to_string(i) + "|" + req.prompt;
        images.push_back(sample("image|" + tag, label));
        refs.push_back("planted://" + tag);
    }
    return make_batch(req, std::move(images), std::move(refs));
}

// ---------------------------------------------------------------------------

LiveBackend::LiveBackend(LiveBackendOptions options) : options_(std::move(options)) {
    if (options_.server_url.empty()) {
        throw BackendUnavailableError("no model server configured (set SOUNDSYM_SERVER_URL)");
    }
    host_ = options_.server_url;
    while (!host_.empty() && host_.back() == '/') host_.pop_back();
}

std::string LiveBackend::post(const std::string& path, const std::string& body) const {
    httplib::Client client(host_);
    client.set_connection_timeout(std::chrono::seconds(10));
    client.set_read_timeout(std::chrono::seconds(options_.timeout_seconds));
    client.set_write_timeout(std::chrono::seconds(60));
    auto res = client.Post(path, body, "application/json");
    if (!res) {
        throw BackendUnavailableError("model server " + host_ + path + " unreachable: " + httplib::to_string(res.error()));
    }
    json doc;
    try {
        doc = json::parse(res->body);
    } catch (const json::exception&) {
        throw BackendUnavailableError("model server returned non-JSON body (HTTP " + std::to_string(res->status) + ")");
    }
    if (doc.contains("error")) {
        const json& err = doc["error"];
        throw BackendUnavailableError("model server error " + err.value("code", std::string("unknown")) + ": " +
                                      err.value("message", std::string()));
    }
    if (res->status != 200) {
        throw BackendUnavailableError("model server returned HTTP " + std::to_string(res->status));
    }
    return res->body;
}

EmbeddingVector LiveBackend::embed_text(const std::string& prompt) {
    return embed_texts({prompt}).front();
}

std::vector<EmbeddingVector> LiveBackend::embed_texts(const std::vector<std::string>& prompts) {
    for (const auto& p : prompts) require_prompt(p);
    std::vector<EmbeddingVector> out;
    out.reserve(prompts.size());
    for (std::size_t start = 0; start < prompts.size(); start += options_.text_batch) {
        std::size_t end = std::min(prompts.size(), start + options_.text_batch);
        json req{{"prompts", std::vector<std::string>(prompts.begin() + start, prompts.begin() + end)}};
        json doc = json::parse(post("/v1/embed_text", req.dump()));
        const auto dim = doc.at("dim").get<std::size_t>();
        if (dim != options_.dim) {
            throw DimensionMismatchError("server reports dim " + std::to_string(dim) + ", expected " +
                                         std::to_string(options_.dim));
        }
        const json& vectors = doc.at("vectors");
        if (vectors.size() != end - start) {
            throw BackendUnavailableError("server returned " + std::to_string(vectors.size()) + " vectors for " +
                                          std::to_string(end - start) + " prompts");
        }
        for (const auto& row : vectors) out.push_back(parse_vector(row, dim));
    }
    return out;
}

GenerationBatch LiveBackend::generate_and_embed(const GenerationRequest& req) {
    require_images(req);
    json body{{"prompt", req.prompt},
              {"n", req.n_images},
              {"seed", req.seed ? json(*req.seed) : json(nullptr)},
              {"guidance_scale", req.guidance_scale},
              {"steps", req.steps},
              {"sampler", req.sampler_id}};
    json doc = json::parse(post("/v1/generate_and_embed", body.dump()));
    const auto dim = doc.at("dim").get<std::size_t>();
    if (dim != options_.dim) {
        throw DimensionMismatchError("server reports dim " + std::to_string(dim) + ", expected " +
                                     std::to_string(options_.dim));
    }
    std::vector<EmbeddingVector> images;
    for (const auto& row : doc.at("vectors")) images.push_back(parse_vector(row, dim));
    std::vector<std::string> refs;
    if (doc.contains("images")) refs = doc["images"].get<std::vector<std::string>>();
    if (static_cast<int>(images.size()) < req.n_images) {
        throw PartialBatchError("server returned " + std::to_string(images.size()) + " of " +
                                    std::to_string(req.n_images) + " images for '" + req.prompt + "'",
                                req.n_images, std::move(images), std::move(refs));
    }
    return make_batch(req, std::move(images), std::move(refs));
}

// ---------------------------------------------------------------------------

CachedBackend::CachedBackend(std::shared_ptr<EmbeddingBackend> inner, std::shared_ptr<EmbeddingCache> cache)
    : inner_(std::move(inner)), cache_(std::move(cache)) {}

EmbeddingVector CachedBackend::embed_text(const std::string& prompt) {
    CacheKey key{inner_->backend_id(), inner_->model_id(), CacheKind::Text, prompt};
    if (auto hit = cache_->get(key)) {
        if (hit->dim() != inner_->dim()) {
            throw DimensionMismatchError("cached vector for '" + prompt + "' has dimension " +
                                         std::to_string(hit->dim()));
        }
        return *hit;
    }
    EmbeddingVector v = inner_->embed_text(prompt);
    cache_->put(key, v);
    return v;
}

std::vector<EmbeddingVector> CachedBackend::embed_texts(const std::vector<std::string>& prompts) {
    std::vector<EmbeddingVector> out(prompts.size());
    std::vector<std::size_t> missing;
    std::vector<std::string> missing_prompts;
    for (std::size_t i = 0; i < prompts.size(); ++i) {
        auto hit = cache_->get({inner_->backend_id(), inner_->model_id(), CacheKind::Text, prompts[i]});
        if (hit && hit->dim() == inner_->dim()) {
            out[i] = std::move(*hit);
        } else {
            missing.push_back(i);
            missing_prompts.push_back(prompts[i]);
        }
    }
    if (missing.empty()) return out;
    auto fresh = inner_->embed_texts(missing_prompts);
    for (std::size_t j = 0; j < missing.size(); ++j) {
        cache_->put({inner_->backend_id(), inner_->model_id(), CacheKind::Text, missing_prompts[j]}, fresh[j]);
        out[missing[j]] = std::move(fresh[j]);
    }
    return out;
}

GenerationBatch CachedBackend::generate_and_embed(const GenerationRequest& req) {
    GenerationBatch batch = inner_->generate_and_embed(req);
    cache_->put({inner_->backend_id(), image_mean_model_id(inner_->model_id(), req), CacheKind::ImageMean, req.prompt},
                batch.mean_embedding);
    return batch;
}

EmbeddingVector CachedBackend::embed_image_mean(const GenerationRequest& req) {
    CacheKey key{inner_->backend_id(), image_mean_model_id(inner_->model_id(), req), CacheKind::ImageMean,
                 req.prompt};
    if (auto hit = cache_->get(key)) return *hit;
    return generate_and_embed(req).mean_embedding;
}

std::string image_mean_model_id(const std::string& model_id, const GenerationRequest& req) {
    std::ostringstream os;
    os << model_id << "@n=" << req.n_images << ",guidance=" << req.guidance_scale << ",steps=" << req.steps
       << ",sampler=" << req.sampler_id << ",seed=" << (req.seed ? std::to_string(*req.seed) : "random");
    return os.str();
}

std::vector<EmbeddingVector> embed_all_text(EmbeddingBackend& backend, const std::vector<std::string>& prompts) {
    const std::size_t workers = static_cast<std::size_t>(std::max(1, backend.parallelism()));
    const std::size_t chunk = std::max<std::size_t>(1, (prompts.size() + workers * 4 - 1) / (workers * 4));
    const std::size_t chunks = (prompts.size() + chunk - 1) / chunk;
    std::vector<EmbeddingVector> out(prompts.size());
    parallel_for(chunks, backend.parallelism(), [&](std::size_t c) {
        const std::size_t start = c * chunk, end = std::min(prompts.size(), start + chunk);
        std::vector<std::string> slice(prompts.begin() + start, prompts.begin() + end);
        auto vecs = backend.embed_texts(slice);
        for (std::size_t i = 0; i < vecs.size(); ++i) out[start + i] = std::move(vecs[i]);
    });
    return out;
}

std::vector<EmbeddingVector> embed_all_image_means(EmbeddingBackend& backend,
                                                   const std::vector<GenerationRequest>& requests) {
    std::vector<EmbeddingVector> out(requests.size());
    parallel_for(requests.size(), backend.parallelism(),
                 [&](std::size_t i) { out[i] = backend.embed_image_mean(requests[i]); });
    return out;
}

}  // namespace soundsym
