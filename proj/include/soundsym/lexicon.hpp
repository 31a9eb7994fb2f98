#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "soundsym/embedding.hpp"
#include "soundsym/pseudoword.hpp"

namespace soundsym {

enum class PartOfSpeech { Noun, Adj, Other };

std::string_view to_string(PartOfSpeech pos);
PartOfSpeech parse_pos(std::string_view text);

struct NormEntry {
    std::string word;
    PartOfSpeech pos = PartOfSpeech::Other;
    double aoa = 0.0;           // years
    double concreteness = 0.0;  // 1..5 rating scale
};

struct WordList {
    PartOfSpeech pos = PartOfSpeech::Noun;
    std::vector<std::string> words;  // sorted, unique, lowercase
    double aoa_max = 10.0;
    double concreteness_min = 2.5;
};

struct MatchResult {
    std::string word;
    double s_text = 0.0;
    double s_clip = 0.0;
    double s = 0.0;
};

/// Joins a `word,pos` lemma list with `word,rating` AoA and concreteness norm
/// files. Lemmas missing from either norm file are dropped; for repeated rows
/// the first occurrence wins. Throws FormatError with the offending row number.
std::vector<NormEntry> load_norms(const std::filesystem::path& lemma_source, const std::filesystem::path& aoa_source,
                                  const std::filesystem::path& concreteness_source);

/// Keeps entries of `pos` with aoa < aoa_max and concreteness > concreteness_min,
/// minus any blocklisted words.
WordList build_wordlist(const std::vector<NormEntry>& entries, PartOfSpeech pos, double aoa_max = 10.0,
                        double concreteness_min = 2.5, const std::vector<std::string>& blocklist = {});

/// One word per line; blank lines and '#' comments ignored. Missing path yields an empty list.
std::vector<std::string> load_blocklist(const std::filesystem::path& path);

std::size_t levenshtein(std::string_view a, std::string_view b);

/// 1 - d/m with m the longer length. Throws InvalidArgumentError when both are empty.
double text_similarity(std::string_view a, std::string_view b);

/// Candidate maximizing s_clip * s_text, alphabetical on ties. Throws
/// MissingEmbeddingError when a candidate has no embedding.
MatchResult nearest_real_word(const Pseudoword& pw, const WordList& candidates,
                              const EmbeddingVector& pw_image_embedding,
                              const std::map<std::string, EmbeddingVector>& candidate_text_embeddings);

}  // namespace soundsym
