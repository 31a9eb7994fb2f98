#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "soundsym/backend.hpp"
#include "soundsym/probing.hpp"
#include "soundsym/pseudoword.hpp"

namespace soundsym {

struct BackendConfig {
    std::string kind = "mock";  // mock | planted | live
    std::string model_id;       // empty: backend default
    std::size_t dim = kDefaultEmbeddingDim;
    unsigned long long seed = 0;
    std::string mode = "text";  // text | generate (pseudowords embedded via image means)
    int n_images = 50;
    std::optional<long long> generation_seed;
    double guidance_scale = 9.0;
    int steps = 20;
    std::string sampler = "dpm-solver++";
    int parallelism = 4;
    int timeout_seconds = 600;
    PlantedAxisParams planted;
    std::string server_url;  // falls back to SOUNDSYM_SERVER_URL
    std::string cache_path;  // falls back to SOUNDSYM_CACHE_PATH
};

struct LexiconConfig {
    std::string lemmas;
    std::string aoa;
    std::string concreteness;
    std::string blocklist;
    double aoa_max = 10.0;
    double concreteness_min = 2.5;

    bool configured() const { return !lemmas.empty() && !aoa.empty() && !concreteness.empty(); }
};

struct OutputConfig {
    std::string dir = "soundsym-out";
    int top_k = 15;
};

/// Everything a run needs. Loaded from a YAML file with sections graphemes,
/// adjectives, prompts, backend, lexicon, output and experiment; absent keys
/// keep their defaults.
struct Config {
    GraphemeClasses graphemes;
    AdjectiveSets adjectives;
    PromptTemplates prompts;
    std::string language = "en";
    BackendConfig backend;
    LexiconConfig lexicon;
    OutputConfig output;
    bool swap_orientation = false;  // build both axes as round minus sharp

    void validate() const;
};

/// Parses YAML text. Throws FormatError on malformed documents or unknown
/// prompt sets.
Config parse_config(const std::string& yaml_text);
Config load_config(const std::filesystem::path& path);

/// Effective configuration as a YAML document that parse_config accepts.
std::string render_config(const Config& cfg);

/// Applies SOUNDSYM_SERVER_URL / SOUNDSYM_CACHE_PATH where the config leaves them empty.
void apply_environment(Config& cfg);

/// Sets one dotted key (e.g. "backend.kind") in a YAML document string and returns it.
std::string set_config_key(const std::string& yaml_text, const std::string& key, const std::string& value);

/// Builds the configured backend, wrapped in the on-disk cache when a cache path is set.
std::shared_ptr<EmbeddingBackend> make_backend(const Config& cfg);

/// Labels prompts for the planted-axis mock: +1 if any token is a sharp
/// adjective, sharp pseudoword or sharp special, -1 for round, 0 otherwise.
PromptLabeler make_labeler(const GraphemeClasses& graphemes, const AdjectiveSets& adjectives,
                           const StimulusSet& stimuli);

}  // namespace soundsym
