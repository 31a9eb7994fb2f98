#include "soundsym/soundsym.h"

#include <cmath>
#include <cstring>
#include <fstream>
#include <json.hpp>
#include <limits>
#include <new>
#include <sstream>

#include "soundsym/config.hpp"
#include "soundsym/corners.hpp"
#include "soundsym/errors.hpp"
#include "soundsym/experiment.hpp"
#include "soundsym/lexicon.hpp"
#include "soundsym/metrics.hpp"

using nlohmann::ordered_json;
namespace ss = soundsym;

struct ss_config {
    std::string yaml;
    ss::Config cfg;
};

struct ss_backend {
    std::shared_ptr<ss::EmbeddingBackend> impl;
};

struct ss_buffer {
    std::string data;
};

struct ss_corner_report {
    ss::CornerReport report;
};

namespace {

thread_local std::string g_last_error;

ss_status fail(ss_status code, const std::string& msg) {
    g_last_error = msg;
    return code;
}

template <typename F>
ss_status guarded(F&& f) {
    try {
        return f();
    } catch (const ss::Error& e) {
        return fail(e.code(), e.what());
    } catch (const std::bad_alloc&) {
        return fail(SS_ERR_INTERNAL, "out of memory");
    } catch (const std::filesystem::filesystem_error& e) {
        return fail(SS_ERR_IO, e.what());
    } catch (const std::exception& e) {
        return fail(SS_ERR_INTERNAL, e.what());
    } catch (...) {
        return fail(SS_ERR_INTERNAL, "unknown error");
    }
}

#define SS_REQUIRE(cond, what) \
    if (!(cond)) return fail(SS_ERR_INVALID_ARGUMENT, what)

ss_status emit(ss_buffer** out, std::string text) {
    *out = new ss_buffer{std::move(text)};
    return SS_OK;
}

ss::Config with_environment(ss::Config cfg) {
    ss::apply_environment(cfg);
    return cfg;
}

std::vector<const ss::Pseudoword*> select(const ss::StimulusSet& set, ss_class cls) {
    std::vector<const ss::Pseudoword*> out;
    if (cls != SS_CLASS_ROUND) {
        for (const auto& pw : set.sharp) out.push_back(&pw);
    }
    if (cls != SS_CLASS_SHARP) {
        for (const auto& pw : set.round) out.push_back(&pw);
    }
    return out;
}

ss::BinaryLabeledScores labeled(const double* scores, const int* labels, size_t n) {
    ss::BinaryLabeledScores d;
    d.scores.assign(scores, scores + n);
    d.labels.assign(labels, labels + n);
    return d;
}

void to_c(const ss::TestResult& r, ss_test_result* out) {
    out->statistic = r.statistic;
    out->p_value = r.p_value;
    out->df = r.df ? *r.df : std::numeric_limits<double>::quiet_NaN();
}

ss::CornerParams to_params(const ss_corner_params* p) {
    ss::CornerParams c;
    if (!p) return c;
    c.block = p->block;
    c.aperture = p->aperture;
    c.k = p->k;
    c.nms_window = p->nms_window;
    c.rel_threshold = p->rel_threshold;
    c.max_before_nms = p->max_before_nms != 0;
    return c;
}

}  // namespace

extern "C" {

const char* ss_version(void) { return ss::kToolkitVersion; }

const char* ss_last_error(void) { return g_last_error.c_str(); }

const char* ss_status_name(ss_status status) {
    switch (status) {
        case SS_OK: return "ok";
        case SS_ERR_INVALID_ARGUMENT: return "invalid_argument";
        case SS_ERR_TEMPLATE: return "template_error";
        case SS_ERR_MIXED_CLASS: return "mixed_class";
        case SS_ERR_UNKNOWN_GRAPHEME: return "unknown_grapheme";
        case SS_ERR_FORMAT: return "format_error";
        case SS_ERR_IO: return "io_error";
        case SS_ERR_MISSING_EMBEDDING: return "missing_embedding";
        case SS_ERR_BACKEND_UNAVAILABLE: return "backend_unavailable";
        case SS_ERR_DIMENSION_MISMATCH: return "dimension_mismatch";
        case SS_ERR_PARTIAL_BATCH: return "partial_batch";
        case SS_ERR_ZERO_MEAN: return "zero_mean";
        case SS_ERR_ZERO_AXIS: return "zero_axis";
        case SS_ERR_STORE_CORRUPTION: return "store_corruption";
        case SS_ERR_DEGENERATE: return "degenerate";
        case SS_ERR_COVERAGE: return "coverage_error";
        case SS_ERR_KIND_MISMATCH: return "kind_mismatch";
        case SS_ERR_DECODE: return "decode_error";
        case SS_ERR_CHANNEL: return "channel_error";
        case SS_ERR_RUN_FAILED: return "run_failed";
        case SS_ERR_INTERNAL: return "internal_error";
    }
    return "unknown_status";
}

const char* ss_buffer_data(const ss_buffer* buf) { return buf ? buf->data.c_str() : ""; }
size_t ss_buffer_size(const ss_buffer* buf) { return buf ? buf->data.size() : 0; }
void ss_buffer_free(ss_buffer* buf) { delete buf; }

/* ---- configuration ---- */

ss_status ss_config_create_default(ss_config** out) {
    SS_REQUIRE(out, "out is null");
    return guarded([&] {
        *out = new ss_config{std::string(), with_environment(ss::Config{})};
        return SS_OK;
    });
}

ss_status ss_config_load(const char* path, ss_config** out) {
    SS_REQUIRE(path && out, "path and out must be non-null");
    return guarded([&] {
        std::ifstream in(path);
        if (!in) throw ss::IoError(std::string("cannot open config ") + path);
        std::stringstream text;
        text << in.rdbuf();
        ss::Config cfg = ss::parse_config(text.str());
        *out = new ss_config{text.str(), with_environment(std::move(cfg))};
        return SS_OK;
    });
}

ss_status ss_config_set(ss_config* cfg, const char* key, const char* value) {
    SS_REQUIRE(cfg && key && value, "cfg, key and value must be non-null");
    return guarded([&] {
        std::string yaml = ss::set_config_key(cfg->yaml, key, value);
        ss::Config parsed = with_environment(ss::parse_config(yaml));
        cfg->yaml = std::move(yaml);
        cfg->cfg = std::move(parsed);
        return SS_OK;
    });
}

ss_status ss_config_render(const ss_config* cfg, ss_buffer** out) {
    SS_REQUIRE(cfg && out, "cfg and out must be non-null");
    return guarded([&] { return emit(out, ss::render_config(cfg->cfg)); });
}

void ss_config_free(ss_config* cfg) { delete cfg; }

/* ---- stimuli ---- */

ss_status ss_stimuli_render(const ss_config* cfg, ss_class cls, ss_format fmt, ss_buffer** out) {
    SS_REQUIRE(cfg && out, "cfg and out must be non-null");
    SS_REQUIRE(cls == SS_CLASS_SHARP || cls == SS_CLASS_ROUND || cls == SS_CLASS_ALL, "unknown class selector");
    SS_REQUIRE(fmt == SS_FORMAT_JSON || fmt == SS_FORMAT_CSV, "unknown format");
    return guarded([&] {
        const auto set = ss::build_stimulus_set(cfg->cfg.graphemes);
        const auto items = select(set, cls);
        if (fmt == SS_FORMAT_CSV) {
            std::string s = "surface,class\n";
            for (const auto* pw : items) s += pw->surface + "," + std::string(ss::to_string(pw->cls)) + "\n";
            return emit(out, std::move(s));
        }
        ordered_json arr = ordered_json::array();
        for (const auto* pw : items) {
            ordered_json syl = ordered_json::array();
            for (const auto& s : pw->syllables) syl.push_back(std::string{s.consonant, s.vowel});
            arr.push_back({{"surface", pw->surface}, {"class", ss::to_string(pw->cls)}, {"syllables", syl}});
        }
        return emit(out, arr.dump(2) + "\n");
    });
}

ss_status ss_stimuli_count(const ss_config* cfg, ss_class cls, size_t* out) {
    SS_REQUIRE(cfg && out, "cfg and out must be non-null");
    SS_REQUIRE(cls == SS_CLASS_SHARP || cls == SS_CLASS_ROUND || cls == SS_CLASS_ALL, "unknown class selector");
    return guarded([&] {
        *out = select(ss::build_stimulus_set(cfg->cfg.graphemes), cls).size();
        return SS_OK;
    });
}

ss_status ss_classify_pseudoword(const ss_config* cfg, const char* surface, ss_class* out) {
    SS_REQUIRE(cfg && surface && out, "cfg, surface and out must be non-null");
    return guarded([&] {
        auto pw = ss::classify_pseudoword(cfg->cfg.graphemes, surface);
        *out = pw.cls == ss::SoundClass::Sharp ? SS_CLASS_SHARP : SS_CLASS_ROUND;
        return SS_OK;
    });
}

/* ---- lexicon ---- */

ss_status ss_wordlist_render(const ss_config* cfg, ss_pos pos, ss_buffer** out) {
    SS_REQUIRE(cfg && out, "cfg and out must be non-null");
    SS_REQUIRE(pos == SS_POS_NOUN || pos == SS_POS_ADJ, "unknown part of speech");
    return guarded([&] {
        auto list = ss::configured_wordlist(cfg->cfg, pos == SS_POS_NOUN ? ss::PartOfSpeech::Noun : ss::PartOfSpeech::Adj);
        ordered_json j;
        j["pos"] = ss::to_string(list.pos);
        j["aoa_max"] = list.aoa_max;
        j["concreteness_min"] = list.concreteness_min;
        j["count"] = list.words.size();
        j["words"] = list.words;
        return emit(out, j.dump(2) + "\n");
    });
}

ss_status ss_levenshtein(const char* a, const char* b, size_t* out) {
    SS_REQUIRE(a && b && out, "a, b and out must be non-null");
    return guarded([&] {
        *out = ss::levenshtein(a, b);
        return SS_OK;
    });
}

ss_status ss_text_similarity(const char* a, const char* b, double* out) {
    SS_REQUIRE(a && b && out, "a, b and out must be non-null");
    return guarded([&] {
        *out = ss::text_similarity(a, b);
        return SS_OK;
    });
}

/* ---- backends ---- */

ss_status ss_backend_open(const ss_config* cfg, ss_backend** out) {
    SS_REQUIRE(cfg && out, "cfg and out must be non-null");
    return guarded([&] {
        *out = new ss_backend{ss::make_backend(cfg->cfg)};
        return SS_OK;
    });
}

size_t ss_backend_dim(const ss_backend* backend) { return backend ? backend->impl->dim() : 0; }

ss_status ss_backend_embed_text(ss_backend* backend, const char* prompt, float* out, size_t capacity) {
    SS_REQUIRE(backend && prompt && out, "backend, prompt and out must be non-null");
    return guarded([&] {
        auto v = backend->impl->embed_text(prompt);
        if (capacity < v.dim()) {
            return fail(SS_ERR_INVALID_ARGUMENT, "output capacity " + std::to_string(capacity) + " is below dimension " +
                                                     std::to_string(v.dim()));
        }
        std::memcpy(out, v.values().data(), v.dim() * sizeof(float));
        return SS_OK;
    });
}

ss_status ss_backend_embed_set(ss_backend* backend, const ss_config* cfg, ss_item_set set, ss_buffer** out_json) {
    SS_REQUIRE(backend && cfg && out_json, "backend, cfg and out_json must be non-null");
    SS_REQUIRE(set == SS_SET_PSEUDOWORDS || set == SS_SET_ADJECTIVES || set == SS_SET_NOUNS, "unknown item set");
    return guarded([&] {
        const ss::Config& c = cfg->cfg;
        std::vector<std::string> items, prompts;
        std::vector<std::string> classes;
        bool images = false;
        if (set == SS_SET_PSEUDOWORDS) {
            const auto stimuli = ss::build_stimulus_set(c.graphemes);
            for (const auto* pw : stimuli.all()) {
                items.push_back(pw->surface);
                classes.emplace_back(ss::to_string(pw->cls));
            }
            for (const auto& [_, s] : stimuli.specials) {
                items.push_back(s.surface);
                classes.emplace_back(ss::to_string(s.cls));
            }
            for (const auto& w : items) prompts.push_back(c.prompts.for_noun(w));
            images = c.backend.mode == "generate";
        } else if (set == SS_SET_ADJECTIVES) {
            for (const auto& a : c.adjectives.sharp) {
                items.push_back(a);
                classes.emplace_back("sharp");
            }
            for (const auto& a : c.adjectives.round) {
                items.push_back(a);
                classes.emplace_back("round");
            }
            for (const auto& w : items) prompts.push_back(c.prompts.for_adjective(w));
        } else {
            items = ss::configured_wordlist(c, ss::PartOfSpeech::Noun).words;
            classes.assign(items.size(), "");
            for (const auto& w : items) prompts.push_back(c.prompts.for_noun(w));
        }

        std::vector<ss::EmbeddingVector> embs;
        if (images) {
            std::vector<ss::GenerationRequest> reqs;
            for (const auto& p : prompts) reqs.push_back(ss::generation_request(c, p));
            embs = ss::embed_all_image_means(*backend->impl, reqs);
        } else {
            embs = ss::embed_all_text(*backend->impl, prompts);
        }

        ordered_json j;
        j["backend_id"] = backend->impl->backend_id();
        j["model_id"] = backend->impl->model_id();
        j["dim"] = backend->impl->dim();
        j["kind"] = images ? "image_mean" : "text";
        ordered_json arr = ordered_json::array();
        for (std::size_t i = 0; i < items.size(); ++i) {
            ordered_json e;
            e["item"] = items[i];
            e["class"] = classes[i].empty() ? ordered_json(nullptr) : ordered_json(classes[i]);
            e["prompt"] = prompts[i];
            auto vals = embs[i].values();
            e["embedding"] = std::vector<float>(vals.begin(), vals.end());
            arr.push_back(std::move(e));
        }
        j["items"] = std::move(arr);
        return emit(out_json, j.dump() + "\n");
    });
}

void ss_backend_free(ss_backend* backend) { delete backend; }

/* ---- metrics ---- */

ss_status ss_roc_auc(const double* scores, const int* labels, size_t n, double* out) {
    SS_REQUIRE((scores && labels) || n == 0, "scores and labels must be non-null");
    SS_REQUIRE(out, "out is null");
    return guarded([&] {
        *out = ss::roc_auc(labeled(scores, labels, n));
        return SS_OK;
    });
}

ss_status ss_kendall_tau_b(const double* scores, const int* labels, size_t n, ss_test_result* out) {
    SS_REQUIRE((scores && labels) || n == 0, "scores and labels must be non-null");
    SS_REQUIRE(out, "out is null");
    return guarded([&] {
        to_c(ss::kendall_tau_b(labeled(scores, labels, n)), out);
        return SS_OK;
    });
}

ss_status ss_percentile_rank(double x, const double* population, size_t n, double* out) {
    SS_REQUIRE(population || n == 0, "population is null");
    SS_REQUIRE(out, "out is null");
    return guarded([&] {
        *out = ss::percentile_rank(x, std::span<const double>(population, n));
        return SS_OK;
    });
}

ss_status ss_delta_p_kb(double gamma_kiki, double gamma_bouba, const double* population, size_t n, double* out) {
    SS_REQUIRE(population || n == 0, "population is null");
    SS_REQUIRE(out, "out is null");
    return guarded([&] {
        *out = ss::delta_p_kb(gamma_kiki, gamma_bouba, std::span<const double>(population, n));
        return SS_OK;
    });
}

ss_status ss_welch_t_test(const double* xs, size_t nx, const double* ys, size_t ny, ss_test_result* out) {
    SS_REQUIRE((xs || nx == 0) && (ys || ny == 0), "samples must be non-null");
    SS_REQUIRE(out, "out is null");
    return guarded([&] {
        to_c(ss::welch_t_test(std::span<const double>(xs, nx), std::span<const double>(ys, ny)), out);
        return SS_OK;
    });
}

ss_status ss_evaluate_scores_file(const ss_config* cfg, const char* csv_path, ss_buffer** out_json) {
    SS_REQUIRE(cfg && csv_path && out_json, "cfg, csv_path and out_json must be non-null");
    return guarded([&] {
        auto records = ss::read_scores_csv(csv_path);
        auto block = ss::evaluate_records(records, ss::build_stimulus_set(cfg->cfg.graphemes));
        return emit(out_json, ordered_json::parse(block.to_json()).dump(2) + "\n");
    });
}

/* ---- visual probe ---- */

void ss_corner_params_default(ss_corner_params* out) {
    if (!out) return;
    ss::CornerParams d;
    out->block = d.block;
    out->aperture = d.aperture;
    out->k = d.k;
    out->nms_window = d.nms_window;
    out->rel_threshold = d.rel_threshold;
    out->max_before_nms = d.max_before_nms ? 1 : 0;
}

ss_status ss_count_corners_gray(const double* pixels, size_t height, size_t width, const ss_corner_params* params,
                                ss_corner_report** out) {
    SS_REQUIRE(pixels && out, "pixels and out must be non-null");
    return guarded([&] {
        ss::GrayImage img{ss::Matrix(height, width), "buffer"};
        std::copy(pixels, pixels + height * width, img.pixels.data.begin());
        *out = new ss_corner_report{ss::count_corners(img, to_params(params))};
        return SS_OK;
    });
}

ss_status ss_count_corners_png(const char* path, const ss_corner_params* params, ss_corner_report** out) {
    SS_REQUIRE(path && out, "path and out must be non-null");
    return guarded([&] {
        *out = new ss_corner_report{ss::count_corners(ss::load_png(path), to_params(params))};
        return SS_OK;
    });
}

size_t ss_corner_report_count(const ss_corner_report* report) { return report ? report->report.count : 0; }

double ss_corner_report_max_response(const ss_corner_report* report) {
    return report ? report->report.max_response : 0.0;
}

ss_status ss_corner_report_point(const ss_corner_report* report, size_t i, size_t* row, size_t* col) {
    SS_REQUIRE(report && row && col, "report, row and col must be non-null");
    SS_REQUIRE(i < report->report.points.size(), "point index out of range");
    *row = report->report.points[i].first;
    *col = report->report.points[i].second;
    return SS_OK;
}

void ss_corner_report_free(ss_corner_report* report) { delete report; }

ss_status ss_corners_directory(const ss_config* cfg, const char* dir, const ss_corner_params* params,
                               const char* csv_path, ss_buffer** out_json) {
    SS_REQUIRE(cfg && dir && out_json, "cfg, dir and out_json must be non-null");
    return guarded([&] {
        auto scan = ss::scan_corner_directory(cfg->cfg, dir, to_params(params));
        if (csv_path) ss::write_corner_csv(csv_path, scan);
        return emit(out_json, ss::corner_scan_json(scan));
    });
}

/* ---- experiments ---- */

ss_status ss_run_experiment(const ss_config* cfg, ss_buffer** out_manifest_json) {
    SS_REQUIRE(cfg && out_manifest_json, "cfg and out_manifest_json must be non-null");
    return guarded([&] {
        auto m = ss::run_probe_experiment(cfg->cfg);
        emit(out_manifest_json, m.to_json());
        return m.failed() ? fail(SS_ERR_RUN_FAILED, m.error) : SS_OK;
    });
}

ss_status ss_score(const ss_config* cfg, ss_buffer** out_json) {
    SS_REQUIRE(cfg && out_json, "cfg and out_json must be non-null");
    return guarded([&] {
        const ss::Config& c = cfg->cfg;
        auto backend = ss::make_backend(c);
        auto t = ss::score_all(c, *backend);
        const std::filesystem::path dir = c.output.dir;
        std::vector<std::string> files;
        auto write = [&](const char* name, const std::vector<ss::ScoreRecord>& records) {
            ss::write_scores_csv(dir / name, records);
            files.push_back((dir / name).string());
        };
        write("scores_gamma.csv", t.gamma);
        write("scores_phi.csv", t.phi_adjectives);
        if (c.lexicon.configured()) {
            write("scores_phi_nouns.csv", t.phi_nouns);
            write("scores_phi_adjs.csv", t.phi_adjs);
        }
        ordered_json j;
        j["backend_id"] = backend->backend_id();
        j["model_id"] = backend->model_id();
        j["gamma_records"] = t.gamma.size();
        j["phi_records"] = t.phi_adjectives.size();
        j["files"] = files;
        return emit(out_json, j.dump(2) + "\n");
    });
}

ss_status ss_report_from_scores(const ss_config* cfg, const char* scores_dir, ss_buffer** out_json) {
    SS_REQUIRE(cfg && scores_dir && out_json, "cfg, scores_dir and out_json must be non-null");
    return guarded([&] {
        auto m = ss::report_from_scores(cfg->cfg, scores_dir);
        emit(out_json, m.to_json());
        return m.failed() ? fail(SS_ERR_RUN_FAILED, m.error) : SS_OK;
    });
}

ss_status ss_nearest_word(const ss_config* cfg, const char* pseudoword, ss_buffer** out_json) {
    SS_REQUIRE(cfg && pseudoword && out_json, "cfg, pseudoword and out_json must be non-null");
    return guarded([&] {
        auto backend = ss::make_backend(cfg->cfg);
        auto r = ss::nearest_word(cfg->cfg, *backend, pseudoword);
        ordered_json j;
        j["pseudoword"] = pseudoword;
        j["word"] = r.word;
        j["s_text"] = r.s_text;
        j["s_clip"] = r.s_clip;
        j["s"] = r.s;
        return emit(out_json, j.dump(2) + "\n");
    });
}

}  // extern "C"
