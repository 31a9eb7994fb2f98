#include "soundsym/config.hpp"

#include <yaml-cpp/yaml.h>

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "soundsym/errors.hpp"

namespace soundsym {

namespace {

std::string letters(const YAML::Node& node, const std::string& key) {
    std::string out;
    if (node.IsSequence()) {
        for (const auto& item : node) {
            auto s = item.as<std::string>();
            if (s.size() != 1) throw FormatError("graphemes." + key + " entries must be single letters, got '" + s + "'");
            out += s;
        }
    } else {
        out = node.as<std::string>();
    }
    return out;
}

template <typename T>
void read(const YAML::Node& section, const char* key, T& target) {
    if (section && section[key]) target = section[key].as<T>();
}

}  // namespace

void Config::validate() const {
    graphemes.validate();
    adjectives.validate();
    fill_template(prompts.adjective, "x");
    fill_template(prompts.noun_pseudoword, "x");
    if (backend.kind != "mock" && backend.kind != "planted" && backend.kind != "live") {
        throw InvalidArgumentError("backend.kind must be mock, planted or live (got '" + backend.kind + "')");
    }
    if (backend.mode != "text" && backend.mode != "generate") {
        throw InvalidArgumentError("backend.mode must be text or generate (got '" + backend.mode + "')");
    }
    if (backend.n_images < 1) throw InvalidArgumentError("backend.n_images must be at least 1");
    if (backend.dim == 0) throw InvalidArgumentError("backend.dim must be positive");
    if (output.top_k < 0) throw InvalidArgumentError("output.top_k must be nonnegative");
}

Config parse_config(const std::string& yaml_text) {
    Config cfg;
    YAML::Node root;
    try {
        root = YAML::Load(yaml_text);
    } catch (const YAML::Exception& e) {
        throw FormatError(std::string("config is not valid YAML: ") + e.what());
    }
    if (root.IsNull()) return cfg;
    if (!root.IsMap()) throw FormatError("config must be a mapping of sections");

    try {
        if (auto g = root["graphemes"]) {
            if (g["sharp_consonants"]) cfg.graphemes.sharp_consonants = letters(g["sharp_consonants"], "sharp_consonants");
            if (g["round_consonants"]) cfg.graphemes.round_consonants = letters(g["round_consonants"], "round_consonants");
            if (g["sharp_vowels"]) cfg.graphemes.sharp_vowels = letters(g["sharp_vowels"], "sharp_vowels");
            if (g["round_vowels"]) cfg.graphemes.round_vowels = letters(g["round_vowels"], "round_vowels");
            if (g["neutral_vowels"]) cfg.graphemes.neutral_vowels = letters(g["neutral_vowels"], "neutral_vowels");
        }
        if (auto a = root["adjectives"]) {
            read(a, "sharp", cfg.adjectives.sharp);
            read(a, "round", cfg.adjectives.round);
        }
        if (auto p = root["prompts"]) {
            read(p, "language", cfg.language);
            std::string set = cfg.language;
            read(p, "set", set);
            auto builtin = builtin_prompts(set);
            if (!builtin) throw FormatError("unknown prompt set '" + set + "'");
            cfg.prompts = *builtin;
            read(p, "id", cfg.prompts.id);
            read(p, "adjective", cfg.prompts.adjective);
            read(p, "noun_pseudoword", cfg.prompts.noun_pseudoword);
        }
        if (auto b = root["backend"]) {
            read(b, "kind", cfg.backend.kind);
            read(b, "model_id", cfg.backend.model_id);
            read(b, "dim", cfg.backend.dim);
            read(b, "seed", cfg.backend.seed);
            read(b, "mode", cfg.backend.mode);
            read(b, "n_images", cfg.backend.n_images);
            if (b["generation_seed"] && !b["generation_seed"].IsNull()) {
                cfg.backend.generation_seed = b["generation_seed"].as<long long>();
            }
            read(b, "guidance_scale", cfg.backend.guidance_scale);
            read(b, "steps", cfg.backend.steps);
            read(b, "sampler", cfg.backend.sampler);
            read(b, "parallelism", cfg.backend.parallelism);
            read(b, "timeout_seconds", cfg.backend.timeout_seconds);
            read(b, "server_url", cfg.backend.server_url);
            read(b, "cache_path", cfg.backend.cache_path);
            if (auto pl = b["planted"]) {
                read(pl, "rho", cfg.backend.planted.rho);
                read(pl, "sigma", cfg.backend.planted.sigma);
                read(pl, "mean_norm", cfg.backend.planted.mean_norm);
            }
        }
        if (auto l = root["lexicon"]) {
            read(l, "lemmas", cfg.lexicon.lemmas);
            read(l, "aoa", cfg.lexicon.aoa);
            read(l, "concreteness", cfg.lexicon.concreteness);
            read(l, "blocklist", cfg.lexicon.blocklist);
            read(l, "aoa_max", cfg.lexicon.aoa_max);
            read(l, "concreteness_min", cfg.lexicon.concreteness_min);
        }
        if (auto o = root["output"]) {
            read(o, "dir", cfg.output.dir);
            read(o, "top_k", cfg.output.top_k);
        }
        if (auto e = root["experiment"]) {
            read(e, "swap_orientation", cfg.swap_orientation);
        }
    } catch (const YAML::Exception& e) {
        throw FormatError(std::string("config value has the wrong type: ") + e.what());
    }
    cfg.backend.planted.seed = cfg.backend.seed;
    cfg.backend.planted.dim = cfg.backend.dim;
    cfg.validate();
    return cfg;
}

Config load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string render_config(const Config& cfg) {
    YAML::Emitter y;
    const auto& g = cfg.graphemes;
    const auto& b = cfg.backend;
    const auto& l = cfg.lexicon;
    y << YAML::BeginMap;
    y << YAML::Key << "graphemes" << YAML::Value << YAML::BeginMap;
    y << YAML::Key << "sharp_consonants" << YAML::Value << g.sharp_consonants;
    y << YAML::Key << "round_consonants" << YAML::Value << g.round_consonants;
    y << YAML::Key << "sharp_vowels" << YAML::Value << g.sharp_vowels;
    y << YAML::Key << "round_vowels" << YAML::Value << g.round_vowels;
    y << YAML::Key << "neutral_vowels" << YAML::Value << g.neutral_vowels;
    y << YAML::EndMap;
    y << YAML::Key << "adjectives" << YAML::Value << YAML::BeginMap;
    y << YAML::Key << "sharp" << YAML::Value << YAML::Flow << cfg.adjectives.sharp;
    y << YAML::Key << "round" << YAML::Value << YAML::Flow << cfg.adjectives.round;
    y << YAML::EndMap;
    y << YAML::Key << "prompts" << YAML::Value << YAML::BeginMap;
    y << YAML::Key << "language" << YAML::Value << cfg.language;
    y << YAML::Key << "id" << YAML::Value << cfg.prompts.id;
    y << YAML::Key << "adjective" << YAML::Value << YAML::DoubleQuoted << cfg.prompts.adjective;
    y << YAML::Key << "noun_pseudoword" << YAML::Value << YAML::DoubleQuoted << cfg.prompts.noun_pseudoword;
    y << YAML::EndMap;
    y << YAML::Key << "backend" << YAML::Value << YAML::BeginMap;
    y << YAML::Key << "kind" << YAML::Value << b.kind;
    y << YAML::Key << "model_id" << YAML::Value << b.model_id;
    y << YAML::Key << "dim" << YAML::Value << b.dim;
    y << YAML::Key << "seed" << YAML::Value << b.seed;
    y << YAML::Key << "mode" << YAML::Value << b.mode;
    y << YAML::Key << "n_images" << YAML::Value << b.n_images;
    y << YAML::Key << "generation_seed" << YAML::Value;
    if (b.generation_seed) {
        y << *b.generation_seed;
    } else {
        y << YAML::Null;
    }
    y << YAML::Key << "guidance_scale" << YAML::Value << b.guidance_scale;
    y << YAML::Key << "steps" << YAML::Value << b.steps;
    y << YAML::Key << "sampler" << YAML::Value << b.sampler;
    y << YAML::Key << "parallelism" << YAML::Value << b.parallelism;
    y << YAML::Key << "timeout_seconds" << YAML::Value << b.timeout_seconds;
    y << YAML::Key << "server_url" << YAML::Value << b.server_url;
    y << YAML::Key << "cache_path" << YAML::Value << b.cache_path;
    y << YAML::Key << "planted" << YAML::Value << YAML::BeginMap;
    y << YAML::Key << "rho" << YAML::Value << b.planted.rho;
    y << YAML::Key << "sigma" << YAML::Value << b.planted.sigma;
    y << YAML::Key << "mean_norm" << YAML::Value << b.planted.mean_norm;
    y << YAML::EndMap;
    y << YAML::EndMap;
    y << YAML::Key << "lexicon" << YAML::Value << YAML::BeginMap;
    y << YAML::Key << "lemmas" << YAML::Value << l.lemmas;
    y << YAML::Key << "aoa" << YAML::Value << l.aoa;
    y << YAML::Key << "concreteness" << YAML::Value << l.concreteness;
    y << YAML::Key << "blocklist" << YAML::Value << l.blocklist;
    y << YAML::Key << "aoa_max" << YAML::Value << l.aoa_max;
    y << YAML::Key << "concreteness_min" << YAML::Value << l.concreteness_min;
    y << YAML::EndMap;
    y << YAML::Key << "output" << YAML::Value << YAML::BeginMap;
    y << YAML::Key << "dir" << YAML::Value << cfg.output.dir;
    y << YAML::Key << "top_k" << YAML::Value << cfg.output.top_k;
    y << YAML::EndMap;
    y << YAML::Key << "experiment" << YAML::Value << YAML::BeginMap;
    y << YAML::Key << "swap_orientation" << YAML::Value << cfg.swap_orientation;
    y << YAML::EndMap;
    y << YAML::EndMap;
    return std::string(y.c_str()) + "\n";
}

void apply_environment(Config& cfg) {
    if (cfg.backend.server_url.empty()) {
        if (const char* v = std::getenv("SOUNDSYM_SERVER_URL")) cfg.backend.server_url = v;
    }
    if (cfg.backend.cache_path.empty()) {
        if (const char* v = std::getenv("SOUNDSYM_CACHE_PATH")) cfg.backend.cache_path = v;
    }
}

std::string set_config_key(const std::string& yaml_text, const std::string& key, const std::string& value) {
    YAML::Node root, leaf;
    try {
        root = YAML::Load(yaml_text);
        leaf = YAML::Load(value);
    } catch (const YAML::Exception& e) {
        throw FormatError(std::string("cannot set '") + key + "': " + e.what());
    }
    if (root.IsNull()) root = YAML::Node(YAML::NodeType::Map);
    if (!root.IsMap()) throw FormatError("config must be a mapping of sections");
    std::vector<std::string> parts;
    std::stringstream ks(key);
    for (std::string part; std::getline(ks, part, '.');) {
        if (part.empty()) throw InvalidArgumentError("malformed config key '" + key + "'");
        parts.push_back(part);
    }
    if (parts.empty()) throw InvalidArgumentError("empty config key");

    // yaml-cpp nodes are handles; walk by copying references into the tree.
    std::vector<YAML::Node> chain{root};
    for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
        YAML::Node child = chain.back()[parts[i]];
        if (!child || !child.IsMap()) {
            chain.back()[parts[i]] = YAML::Node(YAML::NodeType::Map);
            child = chain.back()[parts[i]];
        }
        chain.push_back(child);
    }
    chain.back()[parts.back()] = leaf;
    YAML::Emitter out;
    out << root;
    std::string text = out.c_str();
    parse_config(text);  // reject values that do not parse
    return text;
}

std::shared_ptr<EmbeddingBackend> make_backend(const Config& cfg) {
    std::shared_ptr<EmbeddingBackend> inner;
    const auto& b = cfg.backend;
    if (b.kind == "mock") {
        inner = std::make_shared<HashMockBackend>(b.seed, b.dim, b.model_id.empty() ? "hash-mock" : b.model_id);
    } else if (b.kind == "planted") {
        auto stimuli = build_stimulus_set(cfg.graphemes);
        PlantedAxisParams p = b.planted;
        p.seed = b.seed;
        p.dim = b.dim;
        inner = std::make_shared<PlantedAxisBackend>(p, make_labeler(cfg.graphemes, cfg.adjectives, stimuli),
                                                     b.model_id.empty() ? "planted-axis" : b.model_id);
    } else if (b.kind == "live") {
        LiveBackendOptions o;
        o.server_url = b.server_url;
        o.model_id = b.model_id.empty() ? "live" : b.model_id;
        o.dim = b.dim;
        o.parallelism = b.parallelism;
        o.timeout_seconds = b.timeout_seconds;
        inner = std::make_shared<LiveBackend>(o);
    } else {
        throw InvalidArgumentError("unknown backend kind '" + b.kind + "'");
    }
    if (b.cache_path.empty()) return inner;
    return std::make_shared<CachedBackend>(inner, std::make_shared<EmbeddingCache>(b.cache_path));
}

PromptLabeler make_labeler(const GraphemeClasses& graphemes, const AdjectiveSets& adjectives,
                           const StimulusSet& stimuli) {
    std::set<std::string> sharp(adjectives.sharp.begin(), adjectives.sharp.end());
    std::set<std::string> round(adjectives.round.begin(), adjectives.round.end());
    for (const auto& [name, special] : stimuli.specials) {
        (special.cls == SoundClass::Sharp ? sharp : round).insert(special.surface);
    }
    return [graphemes, sharp, round](const std::string& prompt) {
        std::string token;
        auto label_of = [&](const std::string& t) -> int {
            if (t.empty()) return 0;
            if (sharp.count(t)) return 1;
            if (round.count(t)) return -1;
            try {
                return classify_pseudoword(graphemes, t).cls == SoundClass::Sharp ? 1 : -1;
            } catch (const Error&) {
                return 0;
            }
        };
        for (std::size_t i = 0; i <= prompt.size(); ++i) {
            const char c = i < prompt.size() ? prompt[i] : ' ';
            if (std::isalpha(static_cast<unsigned char>(c))) {
                token += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
                continue;
            }
            if (int l = label_of(token)) return l;
            token.clear();
        }
        return 0;
    };
}

}  // namespace soundsym
