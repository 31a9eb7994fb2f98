// soundsym command-line front end. Talks to the library only through soundsym.h.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "soundsym/soundsym.h"

namespace {

struct Common {
    std::string config_path;
    std::vector<std::string> overrides;
};

int report_error(ss_status st) {
    std::cerr << "soundsym: " << ss_status_name(st) << ": " << ss_last_error() << "\n";
    return static_cast<int>(st) == 0 ? 0 : 1;
}

// Owns a config handle built from --config plus --override settings.
class ConfigHandle {
public:
    ~ConfigHandle() { ss_config_free(cfg_); }

    ss_status open(const Common& c) {
        ss_status st = c.config_path.empty() ? ss_config_create_default(&cfg_) : ss_config_load(c.config_path.c_str(), &cfg_);
        if (st != SS_OK) return st;
        for (const auto& kv : c.overrides) {
            auto eq = kv.find('=');
            if (eq == std::string::npos || eq == 0) {
                std::cerr << "soundsym: --override expects key=value, got '" << kv << "'\n";
                return SS_ERR_INVALID_ARGUMENT;
            }
            st = ss_config_set(cfg_, kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str());
            if (st != SS_OK) return st;
        }
        return SS_OK;
    }

    ss_status set(const char* key, const std::string& value) { return ss_config_set(cfg_, key, value.c_str()); }
    const ss_config* get() const { return cfg_; }

private:
    ss_config* cfg_ = nullptr;
};

class Buffer {
public:
    ~Buffer() { ss_buffer_free(buf_); }
    ss_buffer** out() { return &buf_; }
    void print() const {
        if (buf_) std::fwrite(ss_buffer_data(buf_), 1, ss_buffer_size(buf_), stdout);
    }

private:
    ss_buffer* buf_ = nullptr;
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("-c,--config", c.config_path, "YAML configuration file")->check(CLI::ExistingFile);
    cmd->add_option("-o,--override", c.overrides, "Override a config key, e.g. -o backend.kind=planted");
}

// Runs `fn` with an open config; prints the buffer on success and, for run-style
// commands, also on failure (the failed manifest is still useful output).
template <typename Fn>
int with_config(const Common& common, Fn&& fn, bool print_on_failure = false) {
    ConfigHandle cfg;
    ss_status st = cfg.open(common);
    if (st != SS_OK) return report_error(st);
    Buffer buf;
    st = fn(cfg, buf);
    if (st == SS_OK || print_on_failure) buf.print();
    return st == SS_OK ? 0 : report_error(st);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sound-symbolism probing toolkit"};
    app.set_version_flag("--version", std::string(ss_version()));
    app.require_subcommand(1);

    Common common;
    int rc = 0;

    auto* stimuli = app.add_subcommand("stimuli", "List the pseudoword stimuli");
    add_common(stimuli, common);
    std::string cls = "all", format = "json";
    stimuli->add_option("--class", cls)->check(CLI::IsMember({"sharp", "round", "all"}));
    stimuli->add_option("--format", format)->check(CLI::IsMember({"json", "csv"}));
    stimuli->callback([&] {
        rc = with_config(common, [&](ConfigHandle& cfg, Buffer& buf) {
            ss_class c = cls == "sharp" ? SS_CLASS_SHARP : cls == "round" ? SS_CLASS_ROUND : SS_CLASS_ALL;
            return ss_stimuli_render(cfg.get(), c, format == "csv" ? SS_FORMAT_CSV : SS_FORMAT_JSON, buf.out());
        });
    });

    auto* wordlist = app.add_subcommand("wordlist", "Build a word list from the configured lexical norms");
    add_common(wordlist, common);
    std::string pos = "noun";
    wordlist->add_option("--pos", pos)->check(CLI::IsMember({"noun", "adj"}));
    wordlist->callback([&] {
        rc = with_config(common, [&](ConfigHandle& cfg, Buffer& buf) {
            return ss_wordlist_render(cfg.get(), pos == "adj" ? SS_POS_ADJ : SS_POS_NOUN, buf.out());
        });
    });

    auto* embed = app.add_subcommand("embed", "Embed an item set and print the vectors as JSON");
    add_common(embed, common);
    std::string backend_kind, set = "pseudowords";
    embed->add_option("--backend", backend_kind)->check(CLI::IsMember({"live", "mock", "planted"}));
    embed->add_option("--set", set, "Item set")->check(CLI::IsMember({"pseudowords", "adjectives", "nouns"}));
    embed->callback([&] {
        rc = with_config(common, [&](ConfigHandle& cfg, Buffer& buf) {
            if (!backend_kind.empty()) {
                if (ss_status st = cfg.set("backend.kind", backend_kind); st != SS_OK) return st;
            }
            ss_backend* backend = nullptr;
            ss_status st = ss_backend_open(cfg.get(), &backend);
            if (st != SS_OK) return st;
            ss_item_set s = set == "adjectives" ? SS_SET_ADJECTIVES : set == "nouns" ? SS_SET_NOUNS : SS_SET_PSEUDOWORDS;
            st = ss_backend_embed_set(backend, cfg.get(), s, buf.out());
            ss_backend_free(backend);
            return st;
        });
    });

    auto* score = app.add_subcommand("score", "Compute gamma and phi scores and write score CSVs");
    add_common(score, common);
    score->callback([&] {
        rc = with_config(common, [&](ConfigHandle& cfg, Buffer& buf) { return ss_score(cfg.get(), buf.out()); });
    });

    auto* evaluate = app.add_subcommand("evaluate", "Metrics for one score CSV");
    add_common(evaluate, common);
    std::string scores_file;
    evaluate->add_option("--scores", scores_file, "Score CSV")->required()->check(CLI::ExistingFile);
    evaluate->callback([&] {
        rc = with_config(common, [&](ConfigHandle& cfg, Buffer& buf) {
            return ss_evaluate_scores_file(cfg.get(), scores_file.c_str(), buf.out());
        });
    });

    auto* corners = app.add_subcommand("corners", "Count Harris corners in a directory of PNG images");
    add_common(corners, common);
    std::string images_dir, corners_csv;
    ss_corner_params params;
    ss_corner_params_default(&params);
    bool max_before_nms = false;
    corners->add_option("--images", images_dir, "Image directory")->required()->check(CLI::ExistingDirectory);
    corners->add_option("--out", corners_csv, "Per-image CSV output");
    corners->add_option("--block", params.block, "Structure-tensor window");
    corners->add_option("--aperture", params.aperture, "Sobel aperture");
    corners->add_option("--k", params.k, "Harris k");
    corners->add_option("--nms-window", params.nms_window, "Non-maximum suppression window");
    corners->add_option("--threshold", params.rel_threshold, "Threshold relative to the maximum response");
    corners->add_flag("--max-before-nms", max_before_nms, "Take the maximum over the full response map");
    corners->callback([&] {
        params.max_before_nms = max_before_nms ? 1 : 0;
        rc = with_config(common, [&](ConfigHandle& cfg, Buffer& buf) {
            return ss_corners_directory(cfg.get(), images_dir.c_str(), &params,
                                        corners_csv.empty() ? nullptr : corners_csv.c_str(), buf.out());
        });
    });

    auto* nearest = app.add_subcommand("nearest", "Closest real noun to a pseudoword");
    add_common(nearest, common);
    std::string pseudoword;
    nearest->add_option("--pseudoword", pseudoword)->required();
    nearest->callback([&] {
        rc = with_config(common, [&](ConfigHandle& cfg, Buffer& buf) {
            return ss_nearest_word(cfg.get(), pseudoword.c_str(), buf.out());
        });
    });

    auto* report = app.add_subcommand("report", "Tables and plots from existing score CSVs");
    add_common(report, common);
    std::string scores_dir;
    report->add_option("--scores", scores_dir, "Directory holding scores_gamma.csv and scores_phi.csv")
        ->required()
        ->check(CLI::ExistingDirectory);
    report->callback([&] {
        rc = with_config(
            common,
            [&](ConfigHandle& cfg, Buffer& buf) { return ss_report_from_scores(cfg.get(), scores_dir.c_str(), buf.out()); },
            true);
    });

    auto* run = app.add_subcommand("run", "Full probing experiment with manifest");
    add_common(run, common);
    run->callback([&] {
        rc = with_config(
            common, [&](ConfigHandle& cfg, Buffer& buf) { return ss_run_experiment(cfg.get(), buf.out()); }, true);
    });

    CLI11_PARSE(app, argc, argv);
    return rc;
}
