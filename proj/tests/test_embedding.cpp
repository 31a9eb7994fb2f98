#include <doctest.h>

#include <cmath>
#include <random>

#include "soundsym/embedding.hpp"
#include "soundsym/errors.hpp"

using namespace soundsym;

namespace {

EmbeddingVector random_unit(std::mt19937_64& rng, std::size_t dim) {
    std::normal_distribution<double> n;
    std::vector<double> v(dim);
    for (double& x : v) x = n(rng);
    return EmbeddingVector::unit(std::span<const double>(v));
}

}  // namespace

TEST_SUITE("embedding") {

TEST_CASE("unit normalizes and rejects zero vectors") {
    std::vector<double> v{3.0, 4.0};
    auto e = EmbeddingVector::unit(std::span<const double>(v));
    CHECK(e.normalized());
    CHECK(e.values()[0] == doctest::Approx(0.6));
    CHECK(e.values()[1] == doctest::Approx(0.8));
    CHECK(e.norm() == doctest::Approx(1.0));

    std::vector<double> zero(5, 0.0);
    CHECK_THROWS_AS(EmbeddingVector::unit(std::span<const double>(zero)), ZeroMeanError);
}

TEST_CASE("require_unit rejects raw vectors") {
    EmbeddingVector raw({1.0f, 1.0f}, false);
    CHECK_THROWS_AS(raw.require_unit("x"), InvalidArgumentError);
    EmbeddingVector lying({2.0f, 0.0f}, true);
    CHECK_THROWS_AS(lying.require_unit("x"), InvalidArgumentError);
}

TEST_CASE("dot checks dimensions") {
    EmbeddingVector a({1.0f, 0.0f}, true), b({1.0f, 0.0f, 0.0f}, true);
    CHECK_THROWS_AS(dot(a, b), DimensionMismatchError);
}

TEST_CASE("mean of identical images is that image") {
    std::mt19937_64 rng(7);
    auto e = random_unit(rng, 32);
    std::vector<EmbeddingVector> batch(5, e);
    auto m = mean_embedding(batch);
    for (std::size_t i = 0; i < 32; ++i) CHECK(m.values()[i] == doctest::Approx(e.values()[i]).epsilon(1e-6));
    CHECK(centroid_index(batch, m) == 0);
}

TEST_CASE("antipodal images have no mean") {
    std::vector<EmbeddingVector> batch{EmbeddingVector({1.0f, 0.0f}, true), EmbeddingVector({-1.0f, 0.0f}, true)};
    CHECK_THROWS_AS(mean_embedding(batch), ZeroMeanError);
}

TEST_CASE("centroid is the image closest to the mean, lowest index on ties") {
    std::vector<EmbeddingVector> batch{EmbeddingVector({1.0f, 0.0f}, true), EmbeddingVector({0.0f, 1.0f}, true),
                                       EmbeddingVector({0.0f, 1.0f}, true)};
    auto m = mean_embedding(batch);
    CHECK(centroid_index(batch, m) == 1);

    GenerationRequest req;
    req.prompt = "p";
    auto b = make_batch(req, batch, {"a.png", "b.png", "c.png"});
    CHECK(centroid_image(b) == "b.png");
    auto unnamed = make_batch(req, batch, {});
    CHECK(centroid_image(unnamed) == "#1");
}

TEST_CASE("make_batch normalizes raw images") {
    GenerationRequest req;
    req.prompt = "p";
    auto b = make_batch(req, {EmbeddingVector({3.0f, 4.0f}, false)}, {});
    CHECK(b.image_embeddings[0].normalized());
    CHECK(b.mean_embedding.values()[0] == doctest::Approx(0.6));
}

TEST_CASE("cosine of normalized and raw vectors agree") {
    std::mt19937_64 rng(3);
    auto a = random_unit(rng, 16), b = random_unit(rng, 16);
    std::vector<float> scaled(b.values().begin(), b.values().end());
    for (float& x : scaled) x *= 3.0f;
    EmbeddingVector raw(scaled, false);
    CHECK(cosine(a, raw) == doctest::Approx(cosine(a, b)).epsilon(1e-6));
}

}
