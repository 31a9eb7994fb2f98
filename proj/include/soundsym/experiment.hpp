#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "soundsym/backend.hpp"
#include "soundsym/config.hpp"
#include "soundsym/corners.hpp"
#include "soundsym/lexicon.hpp"
#include "soundsym/probing.hpp"

namespace soundsym {

inline constexpr const char* kToolkitVersion = "0.1.0";

/// The run-relevant slice of a Config, recorded in every manifest.
struct ExperimentConfig {
    std::string backend_id;
    std::string model_id;
    std::string prompt_template_id;
    std::string adjective_template;
    std::string noun_pseudoword_template;
    std::string language = "en";
    std::string mode = "text";
    int n_images = 50;
    std::optional<long long> seed;
    std::string output_dir;
    bool swap_orientation = false;

    void validate() const;
    std::string to_json() const;
};

ExperimentConfig snapshot(const Config& cfg, const EmbeddingBackend& backend);

/// One Table-1 style metrics block. delta_p_kb is only defined for gamma.
struct MetricBlock {
    std::optional<double> auc;
    std::optional<double> tau;
    std::optional<double> tau_p;
    std::optional<double> delta_p_kb;

    std::string to_json() const;
};

/// Generation settings from the backend section applied to one prompt.
GenerationRequest generation_request(const Config& cfg, const std::string& prompt);

using StageTimings = std::vector<std::pair<std::string, double>>;

struct ScoreTables {
    std::vector<ScoreRecord> gamma;           // pseudowords, then the specials
    std::vector<ScoreRecord> phi_adjectives;  // ground-truth adjectives
    std::vector<ScoreRecord> phi_nouns;       // lexicon nouns, when configured
    std::vector<ScoreRecord> phi_adjs;        // lexicon adjectives, when configured
    std::size_t n_sharp = 0;
    std::size_t n_round = 0;
};

/// Embeds every item, builds both axes on the same population and scores.
ScoreTables score_all(const Config& cfg, EmbeddingBackend& backend, StageTimings* timings = nullptr);

/// gamma: AUC and tau over the pseudowords (specials excluded) plus the
/// kiki/bouba percentile gap when both specials are present.
MetricBlock gamma_metrics(const std::vector<ScoreRecord>& gamma, const StimulusSet& stimuli);

/// phi: AUC and tau over records that carry a class.
MetricBlock phi_metrics(const std::vector<ScoreRecord>& phi);

/// Dispatches on the records' score kind. Throws KindMismatchError for a mixed file.
MetricBlock evaluate_records(const std::vector<ScoreRecord>& records, const StimulusSet& stimuli);

/// CSV `item,class,score,score_kind,backend_id,prompt_template_id`; scores in
/// %.17g so they read back bit-exactly.
void write_scores_csv(const std::filesystem::path& path, const std::vector<ScoreRecord>& records);
std::vector<ScoreRecord> read_scores_csv(const std::filesystem::path& path);

/// Writes grapheme_scale.csv (`grapheme,kind,mean_gamma,n`) and grapheme_scale.svg.
std::vector<std::filesystem::path> emit_grapheme_scale(const std::vector<ScoreRecord>& gamma,
                                                       const StimulusSet& stimuli, const GraphemeClasses& graphemes,
                                                       const std::filesystem::path& dir);

/// Writes adjective_scale.csv (`adjective,class,phi`) and adjective_scale.svg,
/// ground-truth adjectives sorted by descending phi.
std::vector<std::filesystem::path> emit_adjective_scale(const std::vector<ScoreRecord>& phi_adjectives,
                                                        const std::filesystem::path& dir);

struct SortedWords {
    std::vector<ScoreRecord> lowest;   // ascending phi
    std::vector<ScoreRecord> highest;  // descending phi
};

/// The k lowest and k highest items by score, ties broken alphabetically.
/// k is clamped to the list size.
SortedWords emit_sorted_words(const std::vector<ScoreRecord>& phi, std::size_t k);

/// CSV `end,rank,item,score`.
void write_sorted_words_csv(const std::filesystem::path& path, const SortedWords& words);

struct RunManifest {
    std::string status = "ok";  // ok | failed
    std::string error;
    ExperimentConfig config;
    std::vector<std::pair<std::string, std::size_t>> counts;
    StageTimings timings;
    MetricBlock gamma;
    MetricBlock phi;
    std::vector<std::string> files;
    std::string version = kToolkitVersion;

    bool failed() const { return status == "failed"; }
    std::string to_json() const;
};

/// Full pipeline: stimuli, embeddings, axes, scores, metrics, tables, plots and
/// manifest.json under cfg.output.dir. Errors are recorded in a "failed"
/// manifest rather than thrown, and whatever was written so far is listed.
RunManifest run_probe_experiment(const Config& cfg);
RunManifest run_probe_experiment(const Config& cfg, EmbeddingBackend& backend);

/// Rebuilds metrics, scales and sorted tables from score CSVs in `scores_dir`.
RunManifest report_from_scores(const Config& cfg, const std::filesystem::path& scores_dir);

/// Loads the configured lexicon word list. Throws InvalidArgumentError when the
/// lexicon section is incomplete.
WordList configured_wordlist(const Config& cfg, PartOfSpeech pos);

/// Nearest real noun to a pseudoword: its mean image embedding against noun
/// text embeddings, weighted by spelling similarity.
MatchResult nearest_word(const Config& cfg, EmbeddingBackend& backend, const std::string& pseudoword);

struct CornerRow {
    std::string image_id;
    std::string pseudoword;
    std::optional<SoundClass> cls;
    std::size_t count = 0;
};

struct CornerScan {
    std::vector<CornerRow> rows;
    std::optional<double> sharp_mean;
    std::optional<double> round_mean;
    std::optional<TestResult> welch;  // sharp minus round; needs >= 2 images per class and some variance
};

/// Counts corners in every *.png under `dir`. The pseudoword is the file name
/// up to the first '_' (or the parent directory name when that is not a
/// pseudoword); images whose pseudoword does not classify get no class.
CornerScan scan_corner_directory(const Config& cfg, const std::filesystem::path& dir, const CornerParams& params);

/// CSV `image_id,pseudoword,class,count`.
void write_corner_csv(const std::filesystem::path& path, const CornerScan& scan);
std::string corner_scan_json(const CornerScan& scan);

}  // namespace soundsym
