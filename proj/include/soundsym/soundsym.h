/*
 * soundsym: C interface to the sound-symbolism probing toolkit.
 *
 * All objects are opaque handles created by the create, load and open functions
 * and released with the matching *_free. Every fallible call returns an
 * ss_status; on failure a human-readable message is available from
 * ss_last_error() on the calling thread until the next failing call.
 */
#ifndef SOUNDSYM_SOUNDSYM_H
#define SOUNDSYM_SOUNDSYM_H

#include <stddef.h>

#if defined(_WIN32)
#  define SS_API __declspec(dllexport)
#else
#  define SS_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ss_status {
    SS_OK = 0,
    SS_ERR_INVALID_ARGUMENT = 1,
    SS_ERR_TEMPLATE = 2,
    SS_ERR_MIXED_CLASS = 3,
    SS_ERR_UNKNOWN_GRAPHEME = 4,
    SS_ERR_FORMAT = 5,
    SS_ERR_IO = 6,
    SS_ERR_MISSING_EMBEDDING = 7,
    SS_ERR_BACKEND_UNAVAILABLE = 8,
    SS_ERR_DIMENSION_MISMATCH = 9,
    SS_ERR_PARTIAL_BATCH = 10,
    SS_ERR_ZERO_MEAN = 11,
    SS_ERR_ZERO_AXIS = 12,
    SS_ERR_STORE_CORRUPTION = 13,
    SS_ERR_DEGENERATE = 14,
    SS_ERR_COVERAGE = 15,
    SS_ERR_KIND_MISMATCH = 16,
    SS_ERR_DECODE = 17,
    SS_ERR_CHANNEL = 18,
    SS_ERR_RUN_FAILED = 19,
    SS_ERR_INTERNAL = 99
} ss_status;

typedef enum ss_class {
    SS_CLASS_SHARP = 0,
    SS_CLASS_ROUND = 1,
    SS_CLASS_ALL = 2
} ss_class;

typedef enum ss_format {
    SS_FORMAT_JSON = 0,
    SS_FORMAT_CSV = 1
} ss_format;

typedef enum ss_pos {
    SS_POS_NOUN = 0,
    SS_POS_ADJ = 1
} ss_pos;

typedef enum ss_item_set {
    SS_SET_PSEUDOWORDS = 0,
    SS_SET_ADJECTIVES = 1,
    SS_SET_NOUNS = 2
} ss_item_set;

typedef struct ss_config ss_config;
typedef struct ss_backend ss_backend;
typedef struct ss_buffer ss_buffer;
typedef struct ss_corner_report ss_corner_report;

typedef struct ss_test_result {
    double statistic;
    double p_value;
    double df; /* NaN when not applicable */
} ss_test_result;

typedef struct ss_corner_params {
    int block;               /* structure-tensor window, default 5 */
    int aperture;            /* Sobel aperture, odd, default 15 */
    double k;                /* Harris k, default 0.04 */
    int nms_window;          /* default 100 */
    double rel_threshold;    /* default 0.01 */
    int max_before_nms;      /* 0: M over NMS survivors (default); 1: over the full map */
} ss_corner_params;

SS_API const char* ss_version(void);
SS_API const char* ss_last_error(void);
SS_API const char* ss_status_name(ss_status status);

/* Owned byte/string buffers returned by rendering calls. */
SS_API const char* ss_buffer_data(const ss_buffer* buf);
SS_API size_t ss_buffer_size(const ss_buffer* buf);
SS_API void ss_buffer_free(ss_buffer* buf);

/* Configuration. A default config carries the built-in grapheme classes,
 * adjective sets and English prompts. Keys for ss_config_set use dotted
 * section paths such as "backend.kind" or "output.dir". */
SS_API ss_status ss_config_create_default(ss_config** out);
SS_API ss_status ss_config_load(const char* path, ss_config** out);
SS_API ss_status ss_config_set(ss_config* cfg, const char* key, const char* value);
SS_API ss_status ss_config_render(const ss_config* cfg, ss_buffer** out);
SS_API void ss_config_free(ss_config* cfg);

/* Stimuli. */
SS_API ss_status ss_stimuli_render(const ss_config* cfg, ss_class cls, ss_format fmt, ss_buffer** out);
SS_API ss_status ss_stimuli_count(const ss_config* cfg, ss_class cls, size_t* out);
SS_API ss_status ss_classify_pseudoword(const ss_config* cfg, const char* surface, ss_class* out);

/* Lexicon. */
SS_API ss_status ss_wordlist_render(const ss_config* cfg, ss_pos pos, ss_buffer** out);
SS_API ss_status ss_levenshtein(const char* a, const char* b, size_t* out);
SS_API ss_status ss_text_similarity(const char* a, const char* b, double* out);

/* Embedding backends. */
SS_API ss_status ss_backend_open(const ss_config* cfg, ss_backend** out);
SS_API size_t ss_backend_dim(const ss_backend* backend);
SS_API ss_status ss_backend_embed_text(ss_backend* backend, const char* prompt, float* out, size_t capacity);
SS_API ss_status ss_backend_embed_set(ss_backend* backend, const ss_config* cfg, ss_item_set set, ss_buffer** out_json);
SS_API void ss_backend_free(ss_backend* backend);

/* Metrics. labels are 1 for sharp, 0 for round. */
SS_API ss_status ss_roc_auc(const double* scores, const int* labels, size_t n, double* out);
SS_API ss_status ss_kendall_tau_b(const double* scores, const int* labels, size_t n, ss_test_result* out);
SS_API ss_status ss_percentile_rank(double x, const double* population, size_t n, double* out);
SS_API ss_status ss_delta_p_kb(double gamma_kiki, double gamma_bouba, const double* population, size_t n, double* out);
SS_API ss_status ss_welch_t_test(const double* xs, size_t nx, const double* ys, size_t ny, ss_test_result* out);
SS_API ss_status ss_evaluate_scores_file(const ss_config* cfg, const char* csv_path, ss_buffer** out_json);

/* Visual probe. */
SS_API void ss_corner_params_default(ss_corner_params* out);
SS_API ss_status ss_count_corners_gray(const double* pixels, size_t height, size_t width,
                                       const ss_corner_params* params, ss_corner_report** out);
SS_API ss_status ss_count_corners_png(const char* path, const ss_corner_params* params, ss_corner_report** out);
SS_API size_t ss_corner_report_count(const ss_corner_report* report);
SS_API double ss_corner_report_max_response(const ss_corner_report* report);
SS_API ss_status ss_corner_report_point(const ss_corner_report* report, size_t i, size_t* row, size_t* col);
SS_API void ss_corner_report_free(ss_corner_report* report);
/* Scans a directory of PNGs; writes image_id,pseudoword,class,count CSV to
 * csv_path and returns a JSON summary with per-class means and Welch test. */
SS_API ss_status ss_corners_directory(const ss_config* cfg, const char* dir, const ss_corner_params* params,
                                      const char* csv_path, ss_buffer** out_json);

/* Experiments and reports. */
SS_API ss_status ss_run_experiment(const ss_config* cfg, ss_buffer** out_manifest_json);
SS_API ss_status ss_score(const ss_config* cfg, ss_buffer** out_json);
SS_API ss_status ss_report_from_scores(const ss_config* cfg, const char* scores_dir, ss_buffer** out_json);
SS_API ss_status ss_nearest_word(const ss_config* cfg, const char* pseudoword, ss_buffer** out_json);

#ifdef __cplusplus
}
#endif

#endif /* SOUNDSYM_SOUNDSYM_H */
