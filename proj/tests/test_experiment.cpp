#include <doctest.h>

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <set>

#include "corner_fixtures.hpp"
#include "soundsym/config.hpp"
#include "soundsym/errors.hpp"
#include "soundsym/experiment.hpp"
#include "test_util.hpp"

using namespace soundsym;
namespace fs = std::filesystem;

namespace {

Config small_config(const std::string& kind, const fs::path& out, std::size_t dim = 64) {
    Config cfg;
    cfg.backend.kind = kind;
    cfg.backend.dim = dim;
    cfg.backend.planted.dim = dim;
    cfg.output.dir = out.string();
    return cfg;
}

// A tiny norms fixture with some sharp and round real words.
void write_lexicon(const fs::path& dir, Config& cfg) {
    testutil::write_file(dir / "lemmas.csv",
                         "spike,noun\nball,noun\nknife,noun\npillow,noun\nbubble,noun\nstar,noun\n"
                         "prickly,adj\nplump,adj\npointy,adj\n");
    testutil::write_file(dir / "aoa.csv",
                         "word,rating\nspike,6\nball,2\nknife,5\npillow,4\nbubble,4\nstar,3\nprickly,7\nplump,8\npointy,6\n");
    testutil::write_file(dir / "conc.csv",
                         "word,rating\nspike,4.5\nball,5\nknife,4.9\npillow,4.8\nbubble,4.7\nstar,4.6\nprickly,3.9\nplump,3.8\n"
                         "pointy,3.7\n");
    cfg.lexicon.lemmas = (dir / "lemmas.csv").string();
    cfg.lexicon.aoa = (dir / "aoa.csv").string();
    cfg.lexicon.concreteness = (dir / "conc.csv").string();
}

ScoreRecord rec(const std::string& item, double score) {
    return {item, std::nullopt, score, ScoreKind::Phi, "mock", "en"};
}

}  // namespace

TEST_SUITE("experiment") {

TEST_CASE("planted run recovers the axis and writes a complete manifest") {
    testutil::TempDir dir;
    auto cfg = small_config("planted", dir / "out");
    write_lexicon(dir.path(), cfg);
    auto m = run_probe_experiment(cfg);
    REQUIRE_MESSAGE(!m.failed(), m.error);
    CHECK(*m.gamma.auc == 1.0);
    CHECK(*m.phi.auc == 1.0);
    // Perfect separation of a 324/324 split: tau-b hits its tie-limited ceiling.
    const double n0 = 648.0 * 647.0 / 2, ytie = 2 * (324.0 * 323.0 / 2);
    CHECK(*m.gamma.tau == doctest::Approx(324.0 * 324.0 / std::sqrt(n0 * (n0 - ytie))).epsilon(1e-12));
    // kiki sits inside the sharp cluster, bouba inside the round one.
    CHECK(*m.gamma.delta_p_kb > 0.0);
    CHECK(*m.gamma.delta_p_kb <= 100.0);
    CHECK_FALSE(m.phi.delta_p_kb);

    // Every file in the output directory is listed, and every listed file exists.
    std::set<std::string> listed(m.files.begin(), m.files.end());
    std::set<std::string> present;
    for (const auto& e : fs::directory_iterator(dir / "out")) present.insert(e.path().string());
    CHECK(listed == present);
    for (const char* name : {"scores_gamma.csv", "scores_phi.csv", "scores_phi_nouns.csv", "scores_phi_adjs.csv",
                             "grapheme_scale.csv", "grapheme_scale.svg", "adjective_scale.csv", "adjective_scale.svg",
                             "sorted_nouns.csv", "sorted_adjs.csv", "manifest.json"}) {
        CHECK_MESSAGE(present.count((dir / "out" / name).string()), name);
    }

    auto j = nlohmann::json::parse(testutil::read_file(dir / "out" / "manifest.json"));
    CHECK(j["status"] == "ok");
    CHECK(j["version"] == kToolkitVersion);
    CHECK(j["counts"]["pseudowords_sharp"] == 324);
    CHECK(j["counts"]["pseudowords_round"] == 324);
    CHECK(j["counts"]["wordlist_nouns"] == 6);
    CHECK(j["metrics"]["gamma"]["auc"] == 1.0);
    CHECK(j["config"]["backend_id"] == "planted");
    CHECK(j["timings_seconds"].contains("embed_pseudowords"));

    // Planted signal puts every sharp grapheme above every round one.
    auto scale = testutil::read_file(dir / "out" / "grapheme_scale.csv");
    CHECK(scale.rfind("grapheme,kind,mean_gamma,n\n", 0) == 0);
    auto gamma = read_scores_csv(dir / "out" / "scores_gamma.csv");
    auto stimuli = build_stimulus_set(cfg.graphemes);
    std::vector<ScoreRecord> psi(gamma.begin(), gamma.begin() + 648);
    auto gs = grapheme_scale(psi, stimuli);
    for (std::size_t i = 0; i < 6; ++i) CHECK(std::string("ptkshx").find(gs.consonants[i].grapheme) != std::string::npos);
}

TEST_CASE("identical configs give byte-identical score files") {
    testutil::TempDir dir;
    auto a = small_config("mock", dir / "a"), b = small_config("mock", dir / "b");
    REQUIRE_FALSE(run_probe_experiment(a).failed());
    REQUIRE_FALSE(run_probe_experiment(b).failed());
    for (const char* f : {"scores_gamma.csv", "scores_phi.csv", "grapheme_scale.csv", "adjective_scale.csv"}) {
        CHECK(testutil::read_file(dir / "a" / f) == testutil::read_file(dir / "b" / f));
    }
}

TEST_CASE("swapped orientation negates every score and maps AUC to its complement") {
    testutil::TempDir dir;
    auto base = small_config("mock", dir / "base");
    base.backend.seed = 3;
    write_lexicon(dir.path(), base);
    auto swapped = base;
    swapped.output.dir = (dir / "swap").string();
    swapped.swap_orientation = true;
    auto m1 = run_probe_experiment(base), m2 = run_probe_experiment(swapped);
    REQUIRE_FALSE(m1.failed());
    REQUIRE_FALSE(m2.failed());
    CHECK(*m2.gamma.auc == 1.0 - *m1.gamma.auc);
    CHECK(*m2.phi.auc == 1.0 - *m1.phi.auc);
    CHECK(*m2.gamma.tau == -*m1.gamma.tau);
    CHECK(*m2.phi.tau == -*m1.phi.tau);
    CHECK(*m2.gamma.tau_p == *m1.gamma.tau_p);
    CHECK(*m2.gamma.delta_p_kb == -*m1.gamma.delta_p_kb);

    for (const char* f : {"scores_gamma.csv", "scores_phi.csv", "scores_phi_nouns.csv"}) {
        auto r1 = read_scores_csv(dir / "base" / f), r2 = read_scores_csv(dir / "swap" / f);
        REQUIRE(r1.size() == r2.size());
        for (std::size_t i = 0; i < r1.size(); ++i) {
            CHECK(r1[i].item == r2[i].item);
            CHECK(r1[i].cls == r2[i].cls);
            CHECK(r2[i].score == -r1[i].score);
        }
    }

    auto n1 = read_scores_csv(dir / "base" / "scores_phi_nouns.csv");
    auto n2 = read_scores_csv(dir / "swap" / "scores_phi_nouns.csv");
    auto s1 = emit_sorted_words(n1, 3), s2 = emit_sorted_words(n2, 3);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(s1.lowest[i].item == s2.highest[i].item);
        CHECK(s1.highest[i].item == s2.lowest[i].item);
    }
}

TEST_CASE("hash mock has no class signal on average") {
    testutil::TempDir dir;
    double total = 0;
    for (unsigned long long seed = 0; seed < 5; ++seed) {
        auto cfg = small_config("mock", dir / ("s" + std::to_string(seed)), 128);
        cfg.backend.seed = seed;
        auto m = run_probe_experiment(cfg);
        REQUIRE_FALSE(m.failed());
        total += *m.gamma.auc;
    }
    CHECK(std::abs(total / 5 - 0.5) <= 0.05);
}

TEST_CASE("generate mode embeds pseudowords through image means") {
    testutil::TempDir dir;
    auto cfg = small_config("planted", dir / "out", 32);
    cfg.backend.mode = "generate";
    cfg.backend.n_images = 2;
    cfg.backend.generation_seed = 1;
    auto m = run_probe_experiment(cfg);
    REQUIRE_MESSAGE(!m.failed(), m.error);
    CHECK(*m.gamma.auc == 1.0);
    auto names = [&] {
        std::vector<std::string> v;
        for (const auto& [k, _] : m.timings) v.push_back(k);
        return v;
    }();
    CHECK(std::find(names.begin(), names.end(), "generate_pseudowords") != names.end());
}

TEST_CASE("unavailable backend yields a failed manifest") {
    testutil::TempDir dir;
    auto cfg = small_config("live", dir / "out");
    auto m = run_probe_experiment(cfg);
    CHECK(m.failed());
    CHECK(m.error.find("SOUNDSYM_SERVER_URL") != std::string::npos);
    auto j = nlohmann::json::parse(testutil::read_file(dir / "out" / "manifest.json"));
    CHECK(j["status"] == "failed");
    CHECK(j["files"].size() == 1);
}

TEST_CASE("failure midway keeps partial outputs listed") {
    struct Flaky : HashMockBackend {
        Flaky() : HashMockBackend(0, 16) {}
        EmbeddingVector embed_text(const std::string& p) override {
            if (p.find("gugugu") != std::string::npos) throw BackendUnavailableError("server went away");
            return HashMockBackend::embed_text(p);
        }
    } flaky;
    testutil::TempDir dir;
    auto cfg = small_config("mock", dir / "out", 16);
    auto m = run_probe_experiment(cfg, flaky);
    CHECK(m.failed());
    CHECK(m.error == "server went away");
    CHECK(m.files.back() == (dir / "out" / "manifest.json").string());
}

TEST_CASE("score files round-trip and evaluate reproduces the manifest") {
    testutil::TempDir dir;
    auto cfg = small_config("planted", dir / "out");
    cfg.backend.planted.rho = 0.05;  // weak signal so metrics are not saturated
    auto m = run_probe_experiment(cfg);
    REQUIRE_FALSE(m.failed());
    auto stimuli = build_stimulus_set(cfg.graphemes);
    auto g = evaluate_records(read_scores_csv(dir / "out" / "scores_gamma.csv"), stimuli);
    CHECK(*g.auc == *m.gamma.auc);
    CHECK(*g.tau == *m.gamma.tau);
    CHECK(*g.delta_p_kb == *m.gamma.delta_p_kb);
    auto p = evaluate_records(read_scores_csv(dir / "out" / "scores_phi.csv"), stimuli);
    CHECK(*p.auc == *m.phi.auc);

    auto mixed = read_scores_csv(dir / "out" / "scores_gamma.csv");
    auto phi = read_scores_csv(dir / "out" / "scores_phi.csv");
    mixed.push_back(phi.front());
    CHECK_THROWS_AS(evaluate_records(mixed, stimuli), KindMismatchError);

    // Quoting survives odd item names.
    std::vector<ScoreRecord> odd{{"a,\"b\"", SoundClass::Sharp, 0.1, ScoreKind::Phi, "x", "y"}};
    write_scores_csv(dir / "odd.csv", odd);
    auto back = read_scores_csv(dir / "odd.csv");
    REQUIRE(back.size() == 1);
    CHECK(back[0].item == odd[0].item);
    CHECK(back[0].score == 0.1);

    testutil::write_file(dir / "bad.csv", "item,class,score,score_kind,backend_id,prompt_template_id\nx,sharp,abc,phi,m,e\n");
    CHECK_THROWS_AS(read_scores_csv(dir / "bad.csv"), FormatError);
}

TEST_CASE("report from scores rebuilds tables and metrics") {
    testutil::TempDir dir;
    auto cfg = small_config("planted", dir / "run");
    cfg.backend.planted.rho = 0.05;
    auto m = run_probe_experiment(cfg);
    REQUIRE_FALSE(m.failed());
    auto rcfg = cfg;
    rcfg.output.dir = (dir / "report").string();
    auto r = report_from_scores(rcfg, dir / "run");
    REQUIRE_MESSAGE(!r.failed(), r.error);
    CHECK(*r.gamma.auc == *m.gamma.auc);
    CHECK(*r.phi.tau == *m.phi.tau);
    CHECK(testutil::read_file(dir / "report" / "grapheme_scale.csv") ==
          testutil::read_file(dir / "run" / "grapheme_scale.csv"));

    auto missing = report_from_scores(rcfg, dir / "nowhere");
    CHECK(missing.failed());
}

TEST_CASE("sorted words clamp k and break ties alphabetically") {
    std::vector<ScoreRecord> phi{rec("delta", 0.5), rec("alpha", 0.1), rec("charlie", 0.1), rec("bravo", 0.9),
                                 rec("echo", -0.3)};
    auto all = emit_sorted_words(phi, 10);
    REQUIRE(all.lowest.size() == 5);
    std::vector<std::string> low, high;
    for (const auto& r : all.lowest) low.push_back(r.item);
    for (const auto& r : all.highest) high.push_back(r.item);
    CHECK(low == std::vector<std::string>{"echo", "alpha", "charlie", "delta", "bravo"});
    CHECK(high == std::vector<std::string>{"bravo", "delta", "alpha", "charlie", "echo"});
    CHECK(emit_sorted_words(phi, 2).lowest.size() == 2);
    CHECK(emit_sorted_words({}, 3).highest.empty());

    testutil::TempDir dir;
    write_sorted_words_csv(dir / "s.csv", emit_sorted_words(phi, 1));
    CHECK(testutil::read_file(dir / "s.csv") == "end,rank,item,score\nlowest,1,echo,-0.29999999999999999\nhighest,1,bravo,0.90000000000000002\n");
}

TEST_CASE("adjective scale lists adjectives by descending phi") {
    testutil::TempDir dir;
    std::vector<ScoreRecord> phi{{"round", SoundClass::Round, -0.2, ScoreKind::Phi, "m", "en"},
                                 {"sharp", SoundClass::Sharp, 0.4, ScoreKind::Phi, "m", "en"},
                                 {"soft", SoundClass::Round, 0.1, ScoreKind::Phi, "m", "en"}};
    emit_adjective_scale(phi, dir.path());
    CHECK(testutil::read_file(dir / "adjective_scale.csv") ==
          "adjective,class,phi\nsharp,sharp,0.40000000000000002\nsoft,round,0.10000000000000001\n"
          "round,round,-0.20000000000000001\n");
    CHECK(testutil::read_file(dir / "adjective_scale.svg").find("<svg") != std::string::npos);
}

TEST_CASE("nearest word uses the configured noun list") {
    testutil::TempDir dir;
    auto cfg = small_config("mock", dir / "out", 32);
    cfg.backend.n_images = 3;
    write_lexicon(dir.path(), cfg);
    auto r = nearest_word(cfg, *make_backend(cfg), "kitaki");
    auto nouns = configured_wordlist(cfg, PartOfSpeech::Noun).words;
    CHECK(std::find(nouns.begin(), nouns.end(), r.word) != nouns.end());
    CHECK(r.s == doctest::Approx(r.s_clip * r.s_text));
    CHECK_THROWS_AS(nearest_word(cfg, *make_backend(cfg), "kiduki"), MixedClassError);
    cfg.lexicon = {};
    CHECK_THROWS_AS(nearest_word(cfg, *make_backend(cfg), "kitaki"), InvalidArgumentError);
}

TEST_CASE("corner directory scan groups images by pseudoword class") {
    testutil::TempDir dir;
    fs::create_directories(dir / "imgs" / "bodubo");
    auto star = fixtures::star(200, 8, 80, 35), disk = fixtures::disk(200, 60);
    save_png(dir / "imgs" / "kitaki_0.png", star);
    save_png(dir / "imgs" / "kitaki_1.png", fixtures::square(200, 100));
    save_png(dir / "imgs" / "bodubo" / "0.png", disk);
    save_png(dir / "imgs" / "bouba_1.png", disk);
    save_png(dir / "imgs" / "other.png", disk);
    Config cfg;
    auto scan = scan_corner_directory(cfg, dir / "imgs", CornerParams{});
    REQUIRE(scan.rows.size() == 5);
    std::map<std::string, CornerRow> by_id;
    for (const auto& r : scan.rows) by_id[r.image_id] = r;
    CHECK(by_id["bodubo/0.png"].pseudoword == "bodubo");
    CHECK(by_id["bodubo/0.png"].cls == SoundClass::Round);
    CHECK(by_id["bouba_1.png"].cls == SoundClass::Round);
    CHECK(by_id["kitaki_0.png"].cls == SoundClass::Sharp);
    CHECK_FALSE(by_id["other.png"].cls);
    CHECK(by_id["kitaki_1.png"].count == 4);
    REQUIRE(scan.sharp_mean);
    CHECK(*scan.sharp_mean > *scan.round_mean);
    CHECK(scan.welch);  // the round counts are constant but the sharp ones vary

    write_corner_csv(dir / "c.csv", scan);
    CHECK(testutil::read_file(dir / "c.csv").rfind("image_id,pseudoword,class,count\n", 0) == 0);
    auto j = nlohmann::json::parse(corner_scan_json(scan));
    CHECK(j["images"] == 5);
    CHECK(j["unclassified_images"] == 1);
    CHECK(j["welch"]["df"].is_number());
    CHECK_THROWS_AS(scan_corner_directory(cfg, dir / "absent", CornerParams{}), IoError);
}

}
