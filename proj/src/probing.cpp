#include "soundsym/probing.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_map>

#include "soundsym/errors.hpp"

namespace soundsym {

void AdjectiveSets::validate() const {
    if (sharp.empty() || round.empty()) throw InvalidArgumentError("adjective sets must be nonempty");
    std::set<std::string> s(sharp.begin(), sharp.end());
    for (const auto& w : round) {
        if (s.count(w)) throw InvalidArgumentError("adjective '" + w + "' is in both sets");
    }
}

std::string fill_template(const std::string& tmpl, const std::string& item) {
    const std::string slot = "{w}";
    auto pos = tmpl.find(slot);
    if (pos == std::string::npos) throw InvalidArgumentError("prompt template '" + tmpl + "' has no {w} slot");
    std::string out = tmpl;
    out.replace(pos, slot.size(), item);
    return out;
}

std::string PromptTemplates::for_adjective(const std::string& item) const { return fill_template(adjective, item); }
std::string PromptTemplates::for_noun(const std::string& item) const { return fill_template(noun_pseudoword, item); }

PromptTemplates PromptTemplates::from_base(std::string id, const std::string& base) {
    fill_template(base, "");
    PromptTemplates p;
    p.id = std::move(id);
    p.adjective = base;
    p.noun_pseudoword = base;
    p.noun_pseudoword.replace(base.find("{w}"), 3, "{w} shaped");
    return p;
}

namespace {

const std::vector<std::pair<std::string, std::string>>& english_variants() {
    static const std::vector<std::pair<std::string, std::string>> v{
        {"3d-rendering", "a 3D rendering of a {w} object"},
        {"object", "a {w} object"},
        {"picture", "a picture of a {w} object"},
        {"oil-painting", "an oil painting of a {w} object"},
        {"thing", "a {w} thing"},
        {"item", "a {w} item"},
        {"drawing", "a {w} drawing"},
        {"this-thing-is", "this thing is {w}"},
        {"bare", "{w}"},
    };
    return v;
}

// The multilingual prompts carry the item in a quoted shape slot, so the same
// template serves adjectives and pseudowords.
const std::vector<std::pair<std::string, std::string>>& multilingual() {
    static const std::vector<std::pair<std::string, std::string>> v{
        {"fi", "3D-renderöinti objektista, jolla on muoto: \"{w}\""},
        {"id", "rendering 3D objek dengan bentuk: \"{w}\""},
        {"hu", "egy objektum 3D-s megjelenítése alakzattal: \"{w}\""},
        {"lt", "3D objekto atvaizdavimas su forma: \"{w}\""},
    };
    return v;
}

}  // namespace

std::optional<PromptTemplates> builtin_prompts(const std::string& id) {
    if (id == "en") return PromptTemplates{};
    for (const auto& [name, base] : english_variants()) {
        if (name == id) return PromptTemplates::from_base(name, base);
    }
    for (const auto& [lang, base] : multilingual()) {
        if (lang == id) return PromptTemplates{lang, base, base};
    }
    return std::nullopt;
}

std::vector<std::string> builtin_prompt_ids() {
    std::vector<std::string> ids{"en"};
    for (const auto& [name, _] : english_variants()) ids.push_back(name);
    for (const auto& [lang, _] : multilingual()) ids.push_back(lang);
    return ids;
}

std::string_view to_string(AxisKind kind) { return kind == AxisKind::Adjective ? "adjective" : "pseudoword"; }
std::string_view to_string(ScoreKind kind) { return kind == ScoreKind::Gamma ? "gamma" : "phi"; }

namespace {

std::vector<double> canonical_sum(const std::vector<EmbeddingVector>& vecs, std::size_t dim) {
    std::vector<const EmbeddingVector*> sorted;
    sorted.reserve(vecs.size());
    for (const auto& v : vecs) sorted.push_back(&v);
    std::sort(sorted.begin(), sorted.end(), [](const EmbeddingVector* a, const EmbeddingVector* b) {
        auto x = a->values(), y = b->values();
        return std::lexicographical_compare(x.begin(), x.end(), y.begin(), y.end());
    });
    std::vector<double> acc(dim, 0.0);
    for (const auto* v : sorted) {
        auto vals = v->values();
        for (std::size_t i = 0; i < dim; ++i) acc[i] += vals[i];
    }
    return acc;
}

}  // namespace

ProbeAxis build_probe_axis(const std::vector<EmbeddingVector>& positive, const std::vector<EmbeddingVector>& negative,
                           AxisKind kind, std::vector<std::string> positive_ids,
                           std::vector<std::string> negative_ids) {
    if (positive.empty() || negative.empty()) throw InvalidArgumentError("probe axis needs nonempty positive and negative sets");
    if (positive_ids.empty() || negative_ids.empty()) throw InvalidArgumentError("probe axis provenance must be nonempty");
    const std::size_t dim = positive.front().dim();
    for (const auto* set : {&positive, &negative}) {
        for (const auto& v : *set) {
            if (v.dim() != dim) throw DimensionMismatchError("probe axis inputs of mixed dimension");
            v.require_unit("probe axis member");
        }
    }

    auto pos = canonical_sum(positive, dim);
    auto neg = canonical_sum(negative, dim);
    std::vector<double> diff(dim);
    double sq = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
        diff[i] = pos[i] - neg[i];
        sq += diff[i] * diff[i];
    }
    if (!(std::sqrt(sq) >= 1e-12)) throw ZeroAxisError("positive and negative sets cancel; the probe axis is undefined");

    ProbeAxis axis;
    axis.direction = EmbeddingVector::unit(std::span<const double>(diff));
    axis.positive_set_ids = std::move(positive_ids);
    axis.negative_set_ids = std::move(negative_ids);
    axis.kind = kind;
    return axis;
}

double geometric_score(const EmbeddingVector& item_embedding, const ProbeAxis& adj_axis) {
    if (adj_axis.kind != AxisKind::Adjective) throw KindMismatchError("geometric scores need an adjective axis");
    item_embedding.require_unit("scored item");
    return dot(item_embedding, adj_axis.direction);
}

double phonetic_score(const EmbeddingVector& word_embedding, const ProbeAxis& pw_axis) {
    if (pw_axis.kind != AxisKind::Pseudoword) throw KindMismatchError("phonetic scores need a pseudoword axis");
    word_embedding.require_unit("scored word");
    return dot(pw_axis.direction, word_embedding);
}

GraphemeScale grapheme_scale(const std::vector<ScoreRecord>& records, const StimulusSet& stimuli) {
    std::unordered_map<std::string, double> by_item;
    for (const auto& r : records) {
        if (r.score_kind != ScoreKind::Gamma) throw KindMismatchError("grapheme scale needs gamma scores");
        if (!by_item.emplace(r.item, r.score).second) {
            throw CoverageError("pseudoword '" + r.item + "' is scored more than once");
        }
    }

    std::vector<std::string> missing;
    std::map<char, std::pair<double, std::size_t>> cons, vows;
    for (const Pseudoword* pw : stimuli.all()) {
        auto it = by_item.find(pw->surface);
        if (it == by_item.end()) {
            missing.push_back(pw->surface);
            continue;
        }
        auto [c, v] = first_syllable_graphemes(*pw);
        cons[c].first += it->second;
        cons[c].second++;
        vows[v].first += it->second;
        vows[v].second++;
    }
    if (!missing.empty()) {
        std::string list;
        for (std::size_t i = 0; i < missing.size() && i < 20; ++i) list += (i ? ", " : "") + missing[i];
        if (missing.size() > 20) list += ", ...";
        throw CoverageError(std::to_string(missing.size()) + " pseudowords have no score: " + list);
    }

    auto collect = [](const std::map<char, std::pair<double, std::size_t>>& m, bool consonant) {
        std::vector<GraphemeMean> out;
        for (const auto& [g, acc] : m) {
            out.push_back({g, consonant, acc.first / static_cast<double>(acc.second), acc.second});
        }
        std::stable_sort(out.begin(), out.end(), [](const GraphemeMean& a, const GraphemeMean& b) { return a.mean > b.mean; });
        return out;
    };
    return GraphemeScale{collect(cons, true), collect(vows, false)};
}

}  // namespace soundsym
