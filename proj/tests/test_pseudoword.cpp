#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>

#include "soundsym/errors.hpp"
#include "soundsym/pseudoword.hpp"

using namespace soundsym;

TEST_SUITE("pseudoword") {

TEST_CASE("default classes give 324 words per class") {
    GraphemeClasses g;
    auto sharp = enumerate_pseudowords(g, SoundClass::Sharp);
    auto round = enumerate_pseudowords(g, SoundClass::Round);
    CHECK(sharp.size() == 324);
    CHECK(round.size() == 324);

    auto has = [](const std::vector<Pseudoword>& v, const std::string& w) {
        return std::any_of(v.begin(), v.end(), [&](const Pseudoword& p) { return p.surface == w; });
    };
    CHECK(has(sharp, "kitaki"));
    CHECK(has(sharp, "xaxaxa"));
    CHECK(has(round, "bodubo"));
    CHECK(has(round, "momomo"));
    CHECK_FALSE(has(sharp, "kiduki"));
}

TEST_CASE("enumeration is sorted, unique and follows the template") {
    GraphemeClasses g;
    for (auto cls : {SoundClass::Sharp, SoundClass::Round}) {
        auto words = enumerate_pseudowords(g, cls);
        std::vector<std::string> surfaces;
        for (const auto& w : words) {
            surfaces.push_back(w.surface);
            REQUIRE(w.syllables.size() == 3);
            CHECK(w.syllables[0] == w.syllables[2]);
            CHECK(w.surface[0] == w.surface[4]);
            CHECK(w.surface[1] == w.surface[5]);
            CHECK(w.cls == cls);
        }
        CHECK(std::is_sorted(surfaces.begin(), surfaces.end()));
        CHECK(std::set<std::string>(surfaces.begin(), surfaces.end()).size() == surfaces.size());
    }
}

TEST_CASE("every enumerated word classifies back to its own class") {
    GraphemeClasses g;
    for (auto cls : {SoundClass::Sharp, SoundClass::Round}) {
        for (const auto& w : enumerate_pseudowords(g, cls)) {
            auto back = classify_pseudoword(g, w.surface);
            CHECK(back == w);
        }
    }
}

TEST_CASE("count law: size is (|C| * |V u neutral|)^2") {
    GraphemeClasses g;
    g.sharp_consonants = "kt";
    g.sharp_vowels = "i";
    g.neutral_vowels = "a";
    CHECK(enumerate_pseudowords(g, SoundClass::Sharp).size() == 16);

    GraphemeClasses single;
    single.sharp_consonants = "k";
    single.sharp_vowels = "i";
    single.neutral_vowels = "";
    auto one = enumerate_pseudowords(single, SoundClass::Sharp);
    REQUIRE(one.size() == 1);
    CHECK(one[0].surface == "kikiki");

    GraphemeClasses empty;
    empty.sharp_consonants = "";
    CHECK(enumerate_pseudowords(empty, SoundClass::Sharp).empty());
}

TEST_CASE("first-syllable counting law: 54 words per consonant") {
    auto set = build_stimulus_set(GraphemeClasses{});
    std::map<char, int> cons;
    std::map<char, int> vows;
    for (const auto* pw : set.all()) {
        auto [c, v] = first_syllable_graphemes(*pw);
        cons[c]++;
        vows[v]++;
    }
    CHECK(cons.size() == 12);
    for (const auto& [c, n] : cons) CHECK(n == 54);
    CHECK(vows['e'] == 108);
    CHECK(vows['o'] == 108);
    CHECK(vows['a'] == 216);
}

TEST_CASE("classify examples") {
    GraphemeClasses g;
    auto k = classify_pseudoword(g, "kitaki");
    CHECK(k.cls == SoundClass::Sharp);
    CHECK(k.syllables == std::vector<Syllable>{{'k', 'i'}, {'t', 'a'}, {'k', 'i'}});

    CHECK_THROWS_AS(classify_pseudoword(g, "kiduki"), MixedClassError);
    CHECK_THROWS_AS(classify_pseudoword(g, "kiki"), TemplateError);
    CHECK_THROWS_AS(classify_pseudoword(g, "kitako"), TemplateError);   // syllable 3 differs
    CHECK_THROWS_AS(classify_pseudoword(g, "ikatik"), TemplateError);   // vowel in a consonant slot
    CHECK_THROWS_AS(classify_pseudoword(g, "kirakr"), UnknownGraphemeError);
    CHECK_THROWS_AS(classify_pseudoword(g, "KITAKI"), UnknownGraphemeError);
}

TEST_CASE("first syllable graphemes") {
    GraphemeClasses g;
    CHECK(first_syllable_graphemes(classify_pseudoword(g, "kitaki")) == std::pair<char, char>{'k', 'i'});
    CHECK(first_syllable_graphemes(classify_pseudoword(g, "gugagu")) == std::pair<char, char>{'g', 'u'});
    CHECK(first_syllable_graphemes(classify_pseudoword(g, "hatiha")) == std::pair<char, char>{'h', 'a'});
}

TEST_CASE("stimulus set carries the kiki and bouba specials") {
    auto set = build_stimulus_set(GraphemeClasses{});
    CHECK(set.size() == 648);
    REQUIRE(set.specials.count("kiki") == 1);
    REQUIRE(set.specials.count("bouba") == 1);
    CHECK(set.specials.at("kiki").cls == SoundClass::Sharp);
    CHECK(set.specials.at("bouba").cls == SoundClass::Round);
}

TEST_CASE("grapheme classes must be disjoint lowercase letters") {
    GraphemeClasses g;
    g.round_consonants += "k";
    CHECK_THROWS_AS(g.validate(), InvalidArgumentError);
    GraphemeClasses h;
    h.sharp_vowels = "E";
    CHECK_THROWS_AS(h.validate(), InvalidArgumentError);
}

TEST_CASE("class names round-trip") {
    CHECK(parse_sound_class(to_string(SoundClass::Sharp)) == SoundClass::Sharp);
    CHECK(parse_sound_class(to_string(SoundClass::Round)) == SoundClass::Round);
    CHECK_THROWS_AS(parse_sound_class("spiky"), InvalidArgumentError);
}

}
