#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "soundsym/embedding.hpp"
#include "soundsym/pseudoword.hpp"

namespace soundsym {

/// Ground-truth adjectives defining the sharp/round visual axis.
struct AdjectiveSets {
    std::vector<std::string> sharp{"sharp", "spiky", "angular", "jagged", "hard",
                                   "edgy",  "pointed", "prickly", "rugged", "uneven"};
    std::vector<std::string> round{"round", "circular", "soft", "fat", "chubby",
                                   "curved", "smooth", "plush", "plump", "rotund"};

    /// Throws InvalidArgumentError if a set is empty or the sets overlap.
    void validate() const;
};

/// Prompt pair: `adjective` is used as-is for adjectives, `noun_pseudoword` for
/// nouns and pseudowords. Templates hold the item slot as "{w}".
struct PromptTemplates {
    std::string id = "3d-rendering";
    std::string adjective = "a 3D rendering of a {w} object";
    std::string noun_pseudoword = "a 3D rendering of a {w} shaped object";

    std::string for_adjective(const std::string& item) const;
    std::string for_noun(const std::string& item) const;

    /// Builds the pair from one base template by inserting " shaped" after the slot.
    static PromptTemplates from_base(std::string id, const std::string& base);
};

/// Built-in prompt sets: "en" and the English variants, plus the multilingual
/// sets "fi", "id", "hu" and "lt".
std::optional<PromptTemplates> builtin_prompts(const std::string& id);
std::vector<std::string> builtin_prompt_ids();

std::string fill_template(const std::string& tmpl, const std::string& item);

enum class AxisKind { Adjective, Pseudoword };
enum class ScoreKind { Gamma, Phi };

std::string_view to_string(AxisKind kind);
std::string_view to_string(ScoreKind kind);

struct ProbeAxis {
    EmbeddingVector direction;
    std::vector<std::string> positive_set_ids;
    std::vector<std::string> negative_set_ids;
    AxisKind kind = AxisKind::Adjective;
};

struct ScoreRecord {
    std::string item;
    std::optional<SoundClass> cls;
    double score = 0.0;
    ScoreKind score_kind = ScoreKind::Gamma;
    std::string backend_id;
    std::string prompt_template_id;
};

/// normalize(sum(positive) - sum(negative)) over unit embeddings. Inputs are
/// summed in a canonical order, so the result does not depend on list order
/// and swapping the two lists negates it exactly. Throws ZeroAxisError when the
/// difference has norm below 1e-12.
ProbeAxis build_probe_axis(const std::vector<EmbeddingVector>& positive, const std::vector<EmbeddingVector>& negative,
                           AxisKind kind, std::vector<std::string> positive_ids,
                           std::vector<std::string> negative_ids);

/// gamma: projection of an item embedding on the adjective axis (higher = sharper).
double geometric_score(const EmbeddingVector& item_embedding, const ProbeAxis& adj_axis);

/// phi: cosine of a word embedding with the pseudoword axis (higher = closer to sharp pseudowords).
double phonetic_score(const EmbeddingVector& word_embedding, const ProbeAxis& pw_axis);

struct GraphemeMean {
    char grapheme;
    bool consonant;
    double mean;
    std::size_t n;
};

/// Mean gamma per first-syllable grapheme, consonants and vowels as separate
/// scales, each sorted by descending mean (grapheme order on ties). Throws
/// CoverageError naming missing pseudowords.
struct GraphemeScale {
    std::vector<GraphemeMean> consonants;
    std::vector<GraphemeMean> vowels;
};

GraphemeScale grapheme_scale(const std::vector<ScoreRecord>& records, const StimulusSet& stimuli);

}  // namespace soundsym
