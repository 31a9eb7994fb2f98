#include <doctest.h>

#include <cstdlib>

#include "soundsym/config.hpp"
#include "soundsym/errors.hpp"
#include "test_util.hpp"

using namespace soundsym;

TEST_SUITE("config") {

TEST_CASE("empty document gives defaults") {
    Config cfg = parse_config("");
    CHECK(cfg.graphemes.sharp_consonants == "ptkshx");
    CHECK(cfg.graphemes.round_consonants == "bdgmnl");
    CHECK(cfg.backend.kind == "mock");
    CHECK(cfg.backend.dim == 1024);
    CHECK(cfg.backend.n_images == 50);
    CHECK(cfg.backend.guidance_scale == 9.0);
    CHECK(cfg.backend.steps == 20);
    CHECK_FALSE(cfg.backend.generation_seed);
    CHECK(cfg.prompts.adjective == "a 3D rendering of a {w} object");
    CHECK(cfg.prompts.noun_pseudoword == "a 3D rendering of a {w} shaped object");
    CHECK(cfg.adjectives.sharp.size() == 10);
    CHECK(cfg.adjectives.round.size() == 10);
    CHECK_FALSE(cfg.swap_orientation);
    CHECK_FALSE(cfg.lexicon.configured());
}

TEST_CASE("sections override defaults") {
    Config cfg = parse_config(R"(
graphemes:
  sharp_consonants: [p, t]
  round_vowels: u
adjectives:
  sharp: [pointy]
  round: [blobby]
prompts:
  language: fi
backend:
  kind: planted
  dim: 32
  seed: 9
  generation_seed: 5
  planted: {rho: 0.5, sigma: 0.2}
output:
  dir: out
  top_k: 3
experiment:
  swap_orientation: true
)");
    CHECK(cfg.graphemes.sharp_consonants == "pt");
    CHECK(cfg.graphemes.round_vowels == "u");
    CHECK(cfg.adjectives.sharp == std::vector<std::string>{"pointy"});
    CHECK(cfg.language == "fi");
    CHECK(cfg.prompts.id == "fi");
    CHECK(cfg.backend.kind == "planted");
    CHECK(cfg.backend.planted.dim == 32);
    CHECK(cfg.backend.planted.seed == 9);
    CHECK(cfg.backend.planted.rho == 0.5);
    CHECK(cfg.backend.generation_seed == 5);
    CHECK(cfg.output.top_k == 3);
    CHECK(cfg.swap_orientation);
}

TEST_CASE("render then parse round-trips") {
    Config cfg = parse_config("backend: {kind: planted, dim: 16, generation_seed: 3}\nprompts: {set: picture}\n");
    cfg.lexicon.lemmas = "l.csv";
    cfg.output.dir = "some dir/with: colon";
    std::string text = render_config(cfg);
    Config back = parse_config(text);
    CHECK(render_config(back) == text);
    CHECK(back.prompts.id == "picture");
    CHECK(back.prompts.noun_pseudoword == "a picture of a {w} shaped object");
    CHECK(back.output.dir == "some dir/with: colon");
    CHECK(back.backend.generation_seed == 3);
    CHECK(render_config(parse_config(render_config(Config{}))) == render_config(Config{}));
}

TEST_CASE("set_config_key edits nested keys") {
    std::string text = set_config_key("", "backend.kind", "planted");
    text = set_config_key(text, "backend.planted.rho", "2.5");
    text = set_config_key(text, "experiment.swap_orientation", "true");
    Config cfg = parse_config(text);
    CHECK(cfg.backend.kind == "planted");
    CHECK(cfg.backend.planted.rho == 2.5);
    CHECK(cfg.swap_orientation);

    CHECK_THROWS_AS(set_config_key(text, "backend.kind", "quantum"), InvalidArgumentError);
    CHECK_THROWS_AS(set_config_key(text, "backend..kind", "mock"), InvalidArgumentError);
    CHECK_THROWS_AS(set_config_key(text, "backend.dim", "[1, 2"), FormatError);
}

TEST_CASE("malformed configs are rejected") {
    CHECK_THROWS_AS(parse_config("backend: [unclosed"), FormatError);
    CHECK_THROWS_AS(parse_config("- a\n- b\n"), FormatError);
    CHECK_THROWS_AS(parse_config("prompts: {set: klingon}"), FormatError);
    CHECK_THROWS_AS(parse_config("backend: {dim: many}"), FormatError);
    CHECK_THROWS_AS(parse_config("graphemes: {sharp_consonants: [pt]}"), FormatError);
    CHECK_THROWS_AS(parse_config("backend: {mode: dream}"), InvalidArgumentError);
    CHECK_THROWS_AS(parse_config("graphemes: {round_consonants: bdgmnlk}"), InvalidArgumentError);
    CHECK_THROWS_AS(parse_config("prompts: {adjective: 'no slot'}"), InvalidArgumentError);
    CHECK_THROWS_AS(load_config("/nonexistent/soundsym.yaml"), IoError);
}

TEST_CASE("environment fills empty server and cache settings") {
    ::setenv("SOUNDSYM_SERVER_URL", "http://example.invalid:1", 1);
    ::setenv("SOUNDSYM_CACHE_PATH", "/tmp/x.jsonl", 1);
    Config cfg;
    apply_environment(cfg);
    CHECK(cfg.backend.server_url == "http://example.invalid:1");
    CHECK(cfg.backend.cache_path == "/tmp/x.jsonl");
    Config pinned;
    pinned.backend.server_url = "http://pinned";
    apply_environment(pinned);
    CHECK(pinned.backend.server_url == "http://pinned");
    ::unsetenv("SOUNDSYM_SERVER_URL");
    ::unsetenv("SOUNDSYM_CACHE_PATH");
}

TEST_CASE("make_backend builds the configured kind") {
    Config cfg;
    cfg.backend.dim = 8;
    CHECK(make_backend(cfg)->backend_id() == "mock");
    cfg.backend.kind = "planted";
    CHECK(make_backend(cfg)->backend_id() == "planted");
    cfg.backend.kind = "live";
    CHECK_THROWS_AS(make_backend(cfg), BackendUnavailableError);

    testutil::TempDir dir;
    cfg.backend.kind = "mock";
    cfg.backend.cache_path = (dir / "c.jsonl").string();
    auto cached = make_backend(cfg);
    CHECK(dynamic_cast<CachedBackend*>(cached.get()) != nullptr);
    cached->embed_text("x");
    CHECK(EmbeddingCache(dir / "c.jsonl").size() == 1);
}

TEST_CASE("labeler reads sharp and round tokens") {
    auto set = build_stimulus_set(GraphemeClasses{});
    auto label = make_labeler(GraphemeClasses{}, AdjectiveSets{}, set);
    CHECK(label("a 3D rendering of a kitaki shaped object") == 1);
    CHECK(label("a 3D rendering of a bodubo shaped object") == -1);
    CHECK(label("a 3D rendering of a spiky object") == 1);
    CHECK(label("a 3D rendering of a plush object") == -1);
    CHECK(label("a 3D rendering of a kiki shaped object") == 1);
    CHECK(label("a 3D rendering of a bouba shaped object") == -1);
    CHECK(label("a 3D rendering of a banana shaped object") == 0);
}

}
