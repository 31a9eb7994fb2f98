#include "soundsym/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <map>
#include <set>
#include <sstream>

#include "soundsym/errors.hpp"
#include "soundsym/metrics.hpp"

namespace soundsym {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

class StageClock {
public:
    StageClock(StageTimings* sink, std::string name)
        : sink_(sink), name_(std::move(name)), start_(std::chrono::steady_clock::now()) {}
    ~StageClock() {
        if (!sink_) return;
        std::chrono::duration<double> d = std::chrono::steady_clock::now() - start_;
        sink_->emplace_back(name_, d.count());
    }

private:
    StageTimings* sink_;
    std::string name_;
    std::chrono::steady_clock::time_point start_;
};

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(std::move(cur));
    return out;
}

std::ofstream open_out(const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    return out;
}

void write_text(const fs::path& path, const std::string& text) {
    auto out = open_out(path);
    out << text;
    if (!out) throw IoError("write failed for " + path.string());
}

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::string svg_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

const char* class_colour(std::optional<SoundClass> cls) {
    if (!cls) return "#666666";
    return *cls == SoundClass::Sharp ? "#d62728" : "#1f4fd6";
}

struct ScaleMark {
    std::string label;
    double value;
    std::optional<SoundClass> cls;
};

// One horizontal axis per row; marks are placed by value and labelled in class colour.
std::string render_scales(const std::string& title, const std::vector<std::pair<std::string, std::vector<ScaleMark>>>& rows) {
    double lo = 0.0, hi = 0.0;
    bool any = false;
    for (const auto& [_, marks] : rows) {
        for (const auto& m : marks) {
            lo = any ? std::min(lo, m.value) : m.value;
            hi = any ? std::max(hi, m.value) : m.value;
            any = true;
        }
    }
    if (!any || hi == lo) {
        lo -= 1.0;
        hi += 1.0;
    }
    const double width = 900, left = 120, right = 40, row_h = 90;
    const double height = 60 + row_h * static_cast<double>(rows.size());
    auto x_of = [&](double v) { return left + (v - lo) / (hi - lo) * (width - left - right); };

    std::ostringstream s;
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height << "\">\n";
    s << "<text x=\"10\" y=\"24\" font-family=\"sans-serif\" font-size=\"16\">" << svg_escape(title) << "</text>\n";
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const double y = 80 + row_h * static_cast<double>(r);
        s << "<text x=\"10\" y=\"" << y + 5 << "\" font-family=\"sans-serif\" font-size=\"13\">"
          << svg_escape(rows[r].first) << "</text>\n";
        s << "<line x1=\"" << left << "\" y1=\"" << y << "\" x2=\"" << width - right << "\" y2=\"" << y
          << "\" stroke=\"#999\"/>\n";
        for (std::size_t i = 0; i < rows[r].second.size(); ++i) {
            const auto& m = rows[r].second[i];
            const double x = x_of(m.value);
            const double ty = y - 8 - 14 * static_cast<double>(i % 3);
            s << "<circle cx=\"" << x << "\" cy=\"" << y << "\" r=\"3\" fill=\"" << class_colour(m.cls) << "\"/>\n";
            s << "<text x=\"" << x << "\" y=\"" << ty << "\" text-anchor=\"middle\" font-family=\"monospace\" "
              << "font-size=\"13\" fill=\"" << class_colour(m.cls) << "\">" << svg_escape(m.label) << "</text>\n";
        }
    }
    s << "</svg>\n";
    return s.str();
}

std::optional<SoundClass> grapheme_class(const GraphemeClasses& g, char c, bool consonant) {
    const std::string& sharp = consonant ? g.sharp_consonants : g.sharp_vowels;
    const std::string& round = consonant ? g.round_consonants : g.round_vowels;
    if (sharp.find(c) != std::string::npos) return SoundClass::Sharp;
    if (round.find(c) != std::string::npos) return SoundClass::Round;
    return std::nullopt;
}

std::vector<EmbeddingVector> embed_items(const Config& cfg, EmbeddingBackend& backend,
                                         const std::vector<std::string>& prompts, bool images) {
    if (!images) return embed_all_text(backend, prompts);
    std::vector<GenerationRequest> reqs;
    reqs.reserve(prompts.size());
    for (const auto& p : prompts) reqs.push_back(generation_request(cfg, p));
    return embed_all_image_means(backend, reqs);
}

ScoreRecord make_record(const std::string& item, std::optional<SoundClass> cls, double score, ScoreKind kind,
                        const EmbeddingBackend& backend, const Config& cfg) {
    return ScoreRecord{item, cls, score, kind, backend.backend_id(), cfg.prompts.id};
}

std::vector<ScoreRecord> score_words(const Config& cfg, EmbeddingBackend& backend, const ProbeAxis& v_pw,
                                     PartOfSpeech pos) {
    WordList list = configured_wordlist(cfg, pos);
    std::vector<std::string> prompts;
    prompts.reserve(list.words.size());
    for (const auto& w : list.words) {
        prompts.push_back(pos == PartOfSpeech::Adj ? cfg.prompts.for_adjective(w) : cfg.prompts.for_noun(w));
    }
    auto embs = embed_all_text(backend, prompts);
    std::vector<ScoreRecord> out;
    out.reserve(list.words.size());
    for (std::size_t i = 0; i < list.words.size(); ++i) {
        out.push_back(make_record(list.words[i], std::nullopt, phonetic_score(embs[i], v_pw), ScoreKind::Phi, backend, cfg));
    }
    return out;
}

BinaryLabeledScores labeled(const std::vector<ScoreRecord>& records, const std::set<std::string>& exclude) {
    BinaryLabeledScores d;
    for (const auto& r : records) {
        if (!r.cls || exclude.count(r.item)) continue;
        d.scores.push_back(r.score);
        d.labels.push_back(*r.cls == SoundClass::Sharp ? 1 : 0);
    }
    return d;
}

void fill_metrics(MetricBlock& m, const BinaryLabeledScores& d) {
    m.auc = roc_auc(d);
    auto t = kendall_tau_b(d);
    m.tau = t.statistic;
    m.tau_p = t.p_value;
}

}  // namespace

void ExperimentConfig::validate() const {
    fill_template(adjective_template, "x");
    fill_template(noun_pseudoword_template, "x");
    if (n_images < 1) throw InvalidArgumentError("n_images must be at least 1");
}

GenerationRequest generation_request(const Config& cfg, const std::string& prompt) {
    GenerationRequest r;
    r.prompt = prompt;
    r.n_images = cfg.backend.n_images;
    r.seed = cfg.backend.generation_seed;
    r.guidance_scale = cfg.backend.guidance_scale;
    r.steps = cfg.backend.steps;
    r.sampler_id = cfg.backend.sampler;
    return r;
}

std::string ExperimentConfig::to_json() const {
    ordered_json j;
    j["backend_id"] = backend_id;
    j["model_id"] = model_id;
    j["prompt_template_ids"] = {{"adjective", prompt_template_id + "/adjective"},
                                {"noun_pseudoword", prompt_template_id + "/noun_pseudoword"}};
    j["prompt_templates"] = {{"adjective", adjective_template}, {"noun_pseudoword", noun_pseudoword_template}};
    j["language"] = language;
    j["mode"] = mode;
    j["n_images"] = n_images;
    j["seed"] = seed ? json(*seed) : json(nullptr);
    j["output_dir"] = output_dir;
    j["swap_orientation"] = swap_orientation;
    return j.dump();
}

ExperimentConfig snapshot(const Config& cfg, const EmbeddingBackend& backend) {
    ExperimentConfig e;
    e.backend_id = backend.backend_id();
    e.model_id = backend.model_id();
    e.prompt_template_id = cfg.prompts.id;
    e.adjective_template = cfg.prompts.adjective;
    e.noun_pseudoword_template = cfg.prompts.noun_pseudoword;
    e.language = cfg.language;
    e.mode = cfg.backend.mode;
    e.n_images = cfg.backend.n_images;
    e.seed = cfg.backend.generation_seed;
    e.output_dir = cfg.output.dir;
    e.swap_orientation = cfg.swap_orientation;
    e.validate();
    return e;
}

std::string MetricBlock::to_json() const {
    ordered_json j;
    j["auc"] = opt(auc);
    j["tau"] = opt(tau);
    j["tau_p"] = opt(tau_p);
    j["delta_p_kb"] = opt(delta_p_kb);
    return j.dump();
}

WordList configured_wordlist(const Config& cfg, PartOfSpeech pos) {
    const auto& l = cfg.lexicon;
    if (!l.configured()) {
        throw InvalidArgumentError("lexicon.lemmas, lexicon.aoa and lexicon.concreteness must be set");
    }
    auto entries = load_norms(l.lemmas, l.aoa, l.concreteness);
    auto blocklist = l.blocklist.empty() ? std::vector<std::string>{} : load_blocklist(l.blocklist);
    return build_wordlist(entries, pos, l.aoa_max, l.concreteness_min, blocklist);
}

ScoreTables score_all(const Config& cfg, EmbeddingBackend& backend, StageTimings* timings) {
    const StimulusSet stimuli = build_stimulus_set(cfg.graphemes);
    const bool images = cfg.backend.mode == "generate";
    ScoreTables t;
    t.n_sharp = stimuli.sharp.size();
    t.n_round = stimuli.round.size();

    std::vector<std::string> adj_items;
    for (const auto& a : cfg.adjectives.sharp) adj_items.push_back(a);
    for (const auto& a : cfg.adjectives.round) adj_items.push_back(a);
    const std::size_t n_adj_sharp = cfg.adjectives.sharp.size();

    std::vector<EmbeddingVector> adj_emb;
    {
        StageClock clock(timings, "embed_adjectives");
        std::vector<std::string> prompts;
        for (const auto& a : adj_items) prompts.push_back(cfg.prompts.for_adjective(a));
        adj_emb = embed_all_text(backend, prompts);
    }

    std::vector<std::string> pw_items;
    std::vector<SoundClass> pw_classes;
    for (const auto* pw : stimuli.all()) {
        pw_items.push_back(pw->surface);
        pw_classes.push_back(pw->cls);
    }
    const std::size_t n_psi = pw_items.size();
    for (const auto& [_, special] : stimuli.specials) {
        pw_items.push_back(special.surface);
        pw_classes.push_back(special.cls);
    }
    std::vector<EmbeddingVector> pw_emb;
    {
        StageClock clock(timings, images ? "generate_pseudowords" : "embed_pseudowords");
        std::vector<std::string> prompts;
        for (const auto& w : pw_items) prompts.push_back(cfg.prompts.for_noun(w));
        pw_emb = embed_items(cfg, backend, prompts, images);
    }

    StageClock clock(timings, "score");
    // Positive side is sharp unless the orientation is swapped; labels never change.
    const bool swap = cfg.swap_orientation;
    std::vector<EmbeddingVector> adj_pos, adj_neg, pw_pos, pw_neg;
    std::vector<std::string> adj_pos_ids, adj_neg_ids, pw_pos_ids, pw_neg_ids;
    for (std::size_t i = 0; i < adj_items.size(); ++i) {
        const bool sharp = i < n_adj_sharp;
        (sharp != swap ? adj_pos : adj_neg).push_back(adj_emb[i]);
        (sharp != swap ? adj_pos_ids : adj_neg_ids).push_back(adj_items[i]);
    }
    for (std::size_t i = 0; i < n_psi; ++i) {
        const bool sharp = pw_classes[i] == SoundClass::Sharp;
        (sharp != swap ? pw_pos : pw_neg).push_back(pw_emb[i]);
        (sharp != swap ? pw_pos_ids : pw_neg_ids).push_back(pw_items[i]);
    }
    const ProbeAxis w_adj = build_probe_axis(adj_pos, adj_neg, AxisKind::Adjective, adj_pos_ids, adj_neg_ids);
    const ProbeAxis v_pw = build_probe_axis(pw_pos, pw_neg, AxisKind::Pseudoword, pw_pos_ids, pw_neg_ids);

    for (std::size_t i = 0; i < pw_items.size(); ++i) {
        t.gamma.push_back(make_record(pw_items[i], pw_classes[i], geometric_score(pw_emb[i], w_adj), ScoreKind::Gamma,
                                      backend, cfg));
    }
    for (std::size_t i = 0; i < adj_items.size(); ++i) {
        const SoundClass cls = i < n_adj_sharp ? SoundClass::Sharp : SoundClass::Round;
        t.phi_adjectives.push_back(
            make_record(adj_items[i], cls, phonetic_score(adj_emb[i], v_pw), ScoreKind::Phi, backend, cfg));
    }
    if (cfg.lexicon.configured()) {
        StageClock words(timings, "embed_wordlists");
        t.phi_nouns = score_words(cfg, backend, v_pw, PartOfSpeech::Noun);
        t.phi_adjs = score_words(cfg, backend, v_pw, PartOfSpeech::Adj);
    }
    return t;
}

MetricBlock gamma_metrics(const std::vector<ScoreRecord>& gamma, const StimulusSet& stimuli) {
    std::set<std::string> special_items;
    for (const auto& [_, s] : stimuli.specials) special_items.insert(s.surface);
    MetricBlock m;
    fill_metrics(m, labeled(gamma, special_items));

    auto find = [&](const std::string& name) -> std::optional<double> {
        auto it = stimuli.specials.find(name);
        if (it == stimuli.specials.end()) return std::nullopt;
        for (const auto& r : gamma) {
            if (r.item == it->second.surface) return r.score;
        }
        return std::nullopt;
    };
    auto kiki = find("kiki"), bouba = find("bouba");
    if (kiki && bouba) {
        std::vector<double> population;
        for (const auto& r : gamma) {
            if (!special_items.count(r.item)) population.push_back(r.score);
        }
        m.delta_p_kb = delta_p_kb(*kiki, *bouba, population);
    }
    return m;
}

MetricBlock phi_metrics(const std::vector<ScoreRecord>& phi) {
    MetricBlock m;
    fill_metrics(m, labeled(phi, {}));
    return m;
}

MetricBlock evaluate_records(const std::vector<ScoreRecord>& records, const StimulusSet& stimuli) {
    if (records.empty()) throw InvalidArgumentError("score file has no records");
    const ScoreKind kind = records.front().score_kind;
    for (const auto& r : records) {
        if (r.score_kind != kind) throw KindMismatchError("score file mixes gamma and phi records");
    }
    return kind == ScoreKind::Gamma ? gamma_metrics(records, stimuli) : phi_metrics(records);
}

void write_scores_csv(const fs::path& path, const std::vector<ScoreRecord>& records) {
    std::ostringstream s;
    s << "item,class,score,score_kind,backend_id,prompt_template_id\n";
    for (const auto& r : records) {
        s << csv_field(r.item) << ',' << (r.cls ? std::string(to_string(*r.cls)) : std::string()) << ','
          << format_double(r.score) << ',' << to_string(r.score_kind) << ',' << csv_field(r.backend_id) << ','
          << csv_field(r.prompt_template_id) << '\n';
    }
    write_text(path, s.str());
}

std::vector<ScoreRecord> read_scores_csv(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw FormatError(path.string() + ": empty score file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto header = split_csv_line(line);
    const std::vector<std::string> expected{"item", "class", "score", "score_kind", "backend_id", "prompt_template_id"};
    if (header != expected) throw FormatError(path.string() + ": unexpected header '" + line + "'");

    std::vector<ScoreRecord> out;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto f = split_csv_line(line);
        auto fail = [&](const std::string& why) {
            return FormatError(path.string() + " row " + std::to_string(row) + ": " + why);
        };
        if (f.size() != expected.size()) throw fail("expected 6 fields, got " + std::to_string(f.size()));
        ScoreRecord r;
        r.item = f[0];
        if (!f[1].empty()) {
            try {
                r.cls = parse_sound_class(f[1]);
            } catch (const Error&) {
                throw fail("bad class '" + f[1] + "'");
            }
        }
        std::size_t used = 0;
        try {
            r.score = std::stod(f[2], &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != f[2].size()) throw fail("bad score '" + f[2] + "'");
        if (f[3] == "gamma") {
            r.score_kind = ScoreKind::Gamma;
        } else if (f[3] == "phi") {
            r.score_kind = ScoreKind::Phi;
        } else {
            throw fail("bad score_kind '" + f[3] + "'");
        }
        r.backend_id = f[4];
        r.prompt_template_id = f[5];
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<fs::path> emit_grapheme_scale(const std::vector<ScoreRecord>& gamma, const StimulusSet& stimuli,
                                          const GraphemeClasses& graphemes, const fs::path& dir) {
    // Only the template words feed the scale.
    std::set<std::string> special_items;
    for (const auto& [_, s] : stimuli.specials) special_items.insert(s.surface);
    std::vector<ScoreRecord> psi;
    for (const auto& r : gamma) {
        if (!special_items.count(r.item)) psi.push_back(r);
    }
    const GraphemeScale scale = grapheme_scale(psi, stimuli);

    std::ostringstream csv;
    csv << "grapheme,kind,mean_gamma,n\n";
    std::vector<ScaleMark> cons, vows;
    for (const auto& g : scale.consonants) {
        csv << g.grapheme << ",consonant," << format_double(g.mean) << ',' << g.n << '\n';
        cons.push_back({std::string(1, g.grapheme), g.mean, grapheme_class(graphemes, g.grapheme, true)});
    }
    for (const auto& g : scale.vowels) {
        csv << g.grapheme << ",vowel," << format_double(g.mean) << ',' << g.n << '\n';
        vows.push_back({std::string(1, g.grapheme), g.mean, grapheme_class(graphemes, g.grapheme, false)});
    }
    const fs::path csv_path = dir / "grapheme_scale.csv", svg_path = dir / "grapheme_scale.svg";
    write_text(csv_path, csv.str());
    write_text(svg_path, render_scales("Graphemes by mean geometric score", {{"consonants", cons}, {"vowels", vows}}));
    return {csv_path, svg_path};
}

std::vector<fs::path> emit_adjective_scale(const std::vector<ScoreRecord>& phi_adjectives, const fs::path& dir) {
    std::vector<ScoreRecord> sorted = phi_adjectives;
    std::stable_sort(sorted.begin(), sorted.end(), [](const ScoreRecord& a, const ScoreRecord& b) {
        return a.score > b.score || (a.score == b.score && a.item < b.item);
    });
    std::ostringstream csv;
    csv << "adjective,class,phi\n";
    std::vector<ScaleMark> marks;
    for (const auto& r : sorted) {
        csv << csv_field(r.item) << ',' << (r.cls ? std::string(to_string(*r.cls)) : std::string()) << ','
            << format_double(r.score) << '\n';
        marks.push_back({r.item, r.score, r.cls});
    }
    const fs::path csv_path = dir / "adjective_scale.csv", svg_path = dir / "adjective_scale.svg";
    write_text(csv_path, csv.str());
    write_text(svg_path, render_scales("Adjectives by phonetic score", {{"adjectives", marks}}));
    return {csv_path, svg_path};
}

SortedWords emit_sorted_words(const std::vector<ScoreRecord>& phi, std::size_t k) {
    std::vector<ScoreRecord> asc = phi;
    std::stable_sort(asc.begin(), asc.end(), [](const ScoreRecord& a, const ScoreRecord& b) {
        return a.score < b.score || (a.score == b.score && a.item < b.item);
    });
    std::vector<ScoreRecord> desc = phi;
    std::stable_sort(desc.begin(), desc.end(), [](const ScoreRecord& a, const ScoreRecord& b) {
        return a.score > b.score || (a.score == b.score && a.item < b.item);
    });
    k = std::min(k, phi.size());
    SortedWords out;
    out.lowest.assign(asc.begin(), asc.begin() + static_cast<std::ptrdiff_t>(k));
    out.highest.assign(desc.begin(), desc.begin() + static_cast<std::ptrdiff_t>(k));
    return out;
}

void write_sorted_words_csv(const fs::path& path, const SortedWords& words) {
    std::ostringstream s;
    s << "end,rank,item,score\n";
    for (std::size_t i = 0; i < words.lowest.size(); ++i) {
        s << "lowest," << i + 1 << ',' << csv_field(words.lowest[i].item) << ',' << format_double(words.lowest[i].score)
          << '\n';
    }
    for (std::size_t i = 0; i < words.highest.size(); ++i) {
        s << "highest," << i + 1 << ',' << csv_field(words.highest[i].item) << ','
          << format_double(words.highest[i].score) << '\n';
    }
    write_text(path, s.str());
}

std::string RunManifest::to_json() const {
    ordered_json j;
    j["status"] = status;
    j["error"] = error.empty() ? json(nullptr) : json(error);
    j["version"] = version;
    j["config"] = ordered_json::parse(config.to_json());
    ordered_json c = ordered_json::object();
    for (const auto& [k, v] : counts) c[k] = v;
    j["counts"] = c;
    ordered_json t = ordered_json::object();
    for (const auto& [k, v] : timings) t[k] = v;
    j["timings_seconds"] = t;
    j["metrics"] = {{"gamma", ordered_json::parse(gamma.to_json())}, {"phi", ordered_json::parse(phi.to_json())}};
    j["files"] = files;
    return j.dump(2) + "\n";
}

namespace {

// Writes tables and plots for a scored run; every written path is appended to m.files.
void emit_outputs(const Config& cfg, const ScoreTables& t, const StimulusSet& stimuli, const fs::path& dir,
                  RunManifest& m) {
    auto note = [&](const fs::path& p) { m.files.push_back(p.string()); };
    {
        StageClock clock(&m.timings, "metrics");
        m.gamma = gamma_metrics(t.gamma, stimuli);
        m.phi = phi_metrics(t.phi_adjectives);
    }
    StageClock clock(&m.timings, "emit");
    for (const auto& p : emit_grapheme_scale(t.gamma, stimuli, cfg.graphemes, dir)) note(p);
    for (const auto& p : emit_adjective_scale(t.phi_adjectives, dir)) note(p);
    const auto k = static_cast<std::size_t>(cfg.output.top_k);
    if (!t.phi_nouns.empty()) {
        write_sorted_words_csv(dir / "sorted_nouns.csv", emit_sorted_words(t.phi_nouns, k));
        note(dir / "sorted_nouns.csv");
    }
    if (!t.phi_adjs.empty()) {
        write_sorted_words_csv(dir / "sorted_adjs.csv", emit_sorted_words(t.phi_adjs, k));
        note(dir / "sorted_adjs.csv");
    }
}

void write_manifest(const fs::path& dir, RunManifest& m) {
    const fs::path path = dir / "manifest.json";
    m.files.push_back(path.string());
    write_text(path, m.to_json());
}

RunManifest failed_manifest(RunManifest m, const std::string& why, const fs::path& dir) {
    m.status = "failed";
    m.error = why;
    try {
        write_manifest(dir, m);
    } catch (const std::exception&) {
        // Nothing more can be recorded if the output directory is unwritable.
    }
    return m;
}

}  // namespace

RunManifest run_probe_experiment(const Config& cfg) {
    RunManifest m;
    const fs::path dir = cfg.output.dir;
    std::shared_ptr<EmbeddingBackend> backend;
    try {
        backend = make_backend(cfg);
    } catch (const std::exception& e) {
        m.config.backend_id = cfg.backend.kind;
        m.config.output_dir = cfg.output.dir;
        return failed_manifest(std::move(m), e.what(), dir);
    }
    return run_probe_experiment(cfg, *backend);
}

RunManifest run_probe_experiment(const Config& cfg, EmbeddingBackend& backend) {
    RunManifest m;
    const fs::path dir = cfg.output.dir;
    try {
        m.config = snapshot(cfg, backend);
        fs::create_directories(dir);
        const StimulusSet stimuli = build_stimulus_set(cfg.graphemes);
        ScoreTables t = score_all(cfg, backend, &m.timings);
        m.counts = {{"pseudowords_sharp", t.n_sharp},
                    {"pseudowords_round", t.n_round},
                    {"specials", stimuli.specials.size()},
                    {"adjectives_sharp", cfg.adjectives.sharp.size()},
                    {"adjectives_round", cfg.adjectives.round.size()},
                    {"wordlist_nouns", t.phi_nouns.size()},
                    {"wordlist_adjs", t.phi_adjs.size()}};

        write_scores_csv(dir / "scores_gamma.csv", t.gamma);
        m.files.push_back((dir / "scores_gamma.csv").string());
        write_scores_csv(dir / "scores_phi.csv", t.phi_adjectives);
        m.files.push_back((dir / "scores_phi.csv").string());
        if (cfg.lexicon.configured()) {
            write_scores_csv(dir / "scores_phi_nouns.csv", t.phi_nouns);
            m.files.push_back((dir / "scores_phi_nouns.csv").string());
            write_scores_csv(dir / "scores_phi_adjs.csv", t.phi_adjs);
            m.files.push_back((dir / "scores_phi_adjs.csv").string());
        }
        emit_outputs(cfg, t, stimuli, dir, m);
        write_manifest(dir, m);
    } catch (const std::exception& e) {
        return failed_manifest(std::move(m), e.what(), dir);
    }
    return m;
}

RunManifest report_from_scores(const Config& cfg, const fs::path& scores_dir) {
    RunManifest m;
    const fs::path dir = cfg.output.dir;
    m.config.prompt_template_id = cfg.prompts.id;
    m.config.adjective_template = cfg.prompts.adjective;
    m.config.noun_pseudoword_template = cfg.prompts.noun_pseudoword;
    m.config.language = cfg.language;
    m.config.mode = cfg.backend.mode;
    m.config.n_images = cfg.backend.n_images;
    m.config.output_dir = cfg.output.dir;
    m.config.swap_orientation = cfg.swap_orientation;
    try {
        fs::create_directories(dir);
        const StimulusSet stimuli = build_stimulus_set(cfg.graphemes);
        ScoreTables t;
        t.gamma = read_scores_csv(scores_dir / "scores_gamma.csv");
        t.phi_adjectives = read_scores_csv(scores_dir / "scores_phi.csv");
        if (fs::exists(scores_dir / "scores_phi_nouns.csv")) t.phi_nouns = read_scores_csv(scores_dir / "scores_phi_nouns.csv");
        if (fs::exists(scores_dir / "scores_phi_adjs.csv")) t.phi_adjs = read_scores_csv(scores_dir / "scores_phi_adjs.csv");
        if (!t.gamma.empty()) m.config.backend_id = t.gamma.front().backend_id;
        for (const auto& r : t.gamma) {
            if (r.score_kind != ScoreKind::Gamma) throw KindMismatchError("scores_gamma.csv holds phi records");
        }
        for (const auto& r : t.phi_adjectives) {
            if (r.score_kind != ScoreKind::Phi) throw KindMismatchError("scores_phi.csv holds gamma records");
        }
        m.counts = {{"gamma_records", t.gamma.size()},
                    {"phi_records", t.phi_adjectives.size()},
                    {"wordlist_nouns", t.phi_nouns.size()},
                    {"wordlist_adjs", t.phi_adjs.size()}};
        emit_outputs(cfg, t, stimuli, dir, m);
        write_manifest(dir, m);
    } catch (const std::exception& e) {
        return failed_manifest(std::move(m), e.what(), dir);
    }
    return m;
}

MatchResult nearest_word(const Config& cfg, EmbeddingBackend& backend, const std::string& pseudoword) {
    const Pseudoword pw = classify_pseudoword(cfg.graphemes, pseudoword);
    WordList nouns = configured_wordlist(cfg, PartOfSpeech::Noun);
    if (nouns.words.empty()) throw InvalidArgumentError("the configured noun list is empty");

    const EmbeddingVector image = backend.embed_image_mean(generation_request(cfg, cfg.prompts.for_noun(pw.surface)));
    std::vector<std::string> prompts;
    for (const auto& w : nouns.words) prompts.push_back(cfg.prompts.for_noun(w));
    auto embs = embed_all_text(backend, prompts);
    std::map<std::string, EmbeddingVector> by_word;
    for (std::size_t i = 0; i < nouns.words.size(); ++i) by_word.emplace(nouns.words[i], std::move(embs[i]));
    return nearest_real_word(pw, nouns, image, by_word);
}

CornerScan scan_corner_directory(const Config& cfg, const fs::path& dir, const CornerParams& params) {
    if (!fs::is_directory(dir)) throw IoError("not a directory: " + dir.string());
    const StimulusSet stimuli = build_stimulus_set(cfg.graphemes);
    auto classify = [&](const std::string& name) -> std::optional<SoundClass> {
        if (auto it = stimuli.specials.find(name); it != stimuli.specials.end()) return it->second.cls;
        try {
            return classify_pseudoword(cfg.graphemes, name).cls;
        } catch (const Error&) {
            return std::nullopt;
        }
    };

    std::vector<fs::path> files;
    for (const auto& entry : fs::recursive_directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        std::string ext = entry.path().extension().string();
        std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
        if (ext == ".png") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());

    CornerScan scan;
    std::vector<double> sharp, round;
    for (const auto& f : files) {
        CornerRow row;
        row.image_id = fs::relative(f, dir).generic_string();
        const std::string stem = f.stem().string();
        std::string name = stem.substr(0, stem.find('_'));
        row.cls = classify(name);
        if (!row.cls && f.has_parent_path() && f.parent_path() != dir) {
            const std::string parent = f.parent_path().filename().string();
            if (auto c = classify(parent)) {
                name = parent;
                row.cls = c;
            }
        }
        row.pseudoword = name;
        row.count = count_corners(load_png(f), params).count;
        if (row.cls) (*row.cls == SoundClass::Sharp ? sharp : round).push_back(static_cast<double>(row.count));
        scan.rows.push_back(std::move(row));
    }
    if (!sharp.empty()) scan.sharp_mean = mean(sharp);
    if (!round.empty()) scan.round_mean = mean(round);
    if (sharp.size() >= 2 && round.size() >= 2) {
        try {
            scan.welch = compare_classes(sharp, round).test;
        } catch (const DegenerateError&) {
            // Constant counts in both classes: the test is undefined.
        }
    }
    return scan;
}

void write_corner_csv(const fs::path& path, const CornerScan& scan) {
    std::ostringstream s;
    s << "image_id,pseudoword,class,count\n";
    for (const auto& r : scan.rows) {
        s << csv_field(r.image_id) << ',' << csv_field(r.pseudoword) << ','
          << (r.cls ? std::string(to_string(*r.cls)) : std::string()) << ',' << r.count << '\n';
    }
    write_text(path, s.str());
}

std::string corner_scan_json(const CornerScan& scan) {
    std::size_t n_sharp = 0, n_round = 0, n_other = 0;
    for (const auto& r : scan.rows) {
        if (!r.cls) {
            ++n_other;
        } else {
            (*r.cls == SoundClass::Sharp ? n_sharp : n_round)++;
        }
    }
    ordered_json j;
    j["images"] = scan.rows.size();
    j["sharp_images"] = n_sharp;
    j["round_images"] = n_round;
    j["unclassified_images"] = n_other;
    j["sharp_mean"] = opt(scan.sharp_mean);
    j["round_mean"] = opt(scan.round_mean);
    if (scan.welch) {
        j["welch"] = {{"t", scan.welch->statistic}, {"p_value", scan.welch->p_value}, {"df", opt(scan.welch->df)}};
    } else {
        j["welch"] = nullptr;
    }
    return j.dump(2) + "\n";
}

}  // namespace soundsym
