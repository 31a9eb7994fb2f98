#include "soundsym/lexicon.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <set>
#include <unordered_map>

#include "soundsym/errors.hpp"

namespace soundsym {

namespace {

std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

std::string lower(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

std::ifstream open_or_throw(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    return in;
}

std::pair<std::string, std::string> split_pair(const std::string& line, const std::filesystem::path& path,
                                               std::size_t row) {
    auto comma = line.find(',');
    if (comma == std::string::npos || line.find(',', comma + 1) != std::string::npos) {
        throw FormatError(path.string() + ": row " + std::to_string(row) + " must have exactly two fields");
    }
    std::string first = lower(trim(std::string_view(line).substr(0, comma)));
    std::string second = trim(std::string_view(line).substr(comma + 1));
    if (first.empty()) throw FormatError(path.string() + ": row " + std::to_string(row) + " has an empty word");
    return {first, second};
}

// Reads a `word,rating` file with a header row. First occurrence of a word wins.
std::unordered_map<std::string, double> load_ratings(const std::filesystem::path& path, double lo, double hi) {
    auto in = open_or_throw(path);
    std::unordered_map<std::string, double> out;
    std::string line;
    std::size_t row = 0;
    bool header = true;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        if (header) {
            header = false;
            if (lower(trim(line)) != "word,rating") {
                throw FormatError(path.string() + ": row 1 must be the header 'word,rating'");
            }
            continue;
        }
        auto [word, text] = split_pair(line, path, row);
        double value = 0.0;
        auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
        if (ec != std::errc() || ptr != text.data() + text.size()) {
            throw FormatError(path.string() + ": row " + std::to_string(row) + " has a non-numeric rating '" + text +
                              "'");
        }
        if (value < lo || value > hi) {
            throw FormatError(path.string() + ": row " + std::to_string(row) + " rating " + text +
                              " is outside its scale");
        }
        out.emplace(word, value);
    }
    return out;
}

}  // namespace

std::string_view to_string(PartOfSpeech pos) {
    switch (pos) {
        case PartOfSpeech::Noun: return "noun";
        case PartOfSpeech::Adj: return "adj";
        default: return "other";
    }
}

PartOfSpeech parse_pos(std::string_view text) {
    std::string t = lower(trim(text));
    if (t == "noun" || t == "n") return PartOfSpeech::Noun;
    if (t == "adj" || t == "adjective" || t == "a" || t == "s") return PartOfSpeech::Adj;
    return PartOfSpeech::Other;
}

std::vector<NormEntry> load_norms(const std::filesystem::path& lemma_source, const std::filesystem::path& aoa_source,
                                  const std::filesystem::path& concreteness_source) {
    auto aoa = load_ratings(aoa_source, 0.0, 1e9);
    auto conc = load_ratings(concreteness_source, 1.0, 5.0);

    auto in = open_or_throw(lemma_source);
    std::vector<NormEntry> out;
    std::set<std::pair<std::string, PartOfSpeech>> seen;
    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty() || trim(line).front() == '#') continue;
        auto [word, pos_text] = split_pair(line, lemma_source, row);
        if (pos_text.empty()) {
            throw FormatError(lemma_source.string() + ": row " + std::to_string(row) + " has an empty part of speech");
        }
        PartOfSpeech pos = parse_pos(pos_text);
        if (!seen.insert({word, pos}).second) continue;
        auto a = aoa.find(word);
        auto c = conc.find(word);
        if (a == aoa.end() || c == conc.end()) continue;
        out.push_back(NormEntry{word, pos, a->second, c->second});
    }
    return out;
}

WordList build_wordlist(const std::vector<NormEntry>& entries, PartOfSpeech pos, double aoa_max,
                        double concreteness_min, const std::vector<std::string>& blocklist) {
    std::set<std::string> blocked(blocklist.begin(), blocklist.end());
    std::set<std::string> kept;
    for (const auto& e : entries) {
        if (e.pos != pos) continue;
        if (!(e.aoa < aoa_max) || !(e.concreteness > concreteness_min)) continue;
        if (blocked.count(e.word)) continue;
        kept.insert(e.word);
    }
    return WordList{pos, std::vector<std::string>(kept.begin(), kept.end()), aoa_max, concreteness_min};
}

std::vector<std::string> load_blocklist(const std::filesystem::path& path) {
    std::vector<std::string> out;
    if (path.empty() || !std::filesystem::exists(path)) return out;
    auto in = open_or_throw(path);
    std::string line;
    while (std::getline(in, line)) {
        std::string w = lower(trim(line));
        if (w.empty() || w.front() == '#') continue;
        out.push_back(w);
    }
    return out;
}

std::size_t levenshtein(std::string_view a, std::string_view b) {
    if (a.size() < b.size()) std::swap(a, b);
    std::vector<std::size_t> row(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        std::size_t diag = row[0];
        row[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            std::size_t up = row[j];
            row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
            diag = up;
        }
    }
    return row[b.size()];
}

double text_similarity(std::string_view a, std::string_view b) {
    const std::size_t m = std::max(a.size(), b.size());
    if (m == 0) throw InvalidArgumentError("text similarity is undefined for two empty strings");
    return 1.0 - static_cast<double>(levenshtein(a, b)) / static_cast<double>(m);
}

MatchResult nearest_real_word(const Pseudoword& pw, const WordList& candidates,
                              const EmbeddingVector& pw_image_embedding,
                              const std::map<std::string, EmbeddingVector>& candidate_text_embeddings) {
    if (candidates.words.empty()) throw InvalidArgumentError("nearest_real_word needs at least one candidate");
    for (const auto& w : candidates.words) {
        if (!candidate_text_embeddings.count(w)) throw MissingEmbeddingError("no text embedding for candidate '" + w + "'");
    }

    std::optional<MatchResult> best;
    for (const auto& w : candidates.words) {
        MatchResult r;
        r.word = w;
        r.s_text = text_similarity(w, pw.surface);
        r.s_clip = cosine(pw_image_embedding, candidate_text_embeddings.at(w));
        r.s = r.s_clip * r.s_text;
        if (!best || r.s > best->s || (r.s == best->s && r.word < best->word)) best = r;
    }
    return *best;
}

}  // namespace soundsym
