#include "soundsym/pseudoword.hpp"

#include <algorithm>
#include <set>

#include "soundsym/errors.hpp"

namespace soundsym {

std::string_view to_string(SoundClass cls) {
    return cls == SoundClass::Sharp ? "sharp" : "round";
}

SoundClass parse_sound_class(std::string_view text) {
    if (text == "sharp" || text == "SHARP") return SoundClass::Sharp;
    if (text == "round" || text == "ROUND") return SoundClass::Round;
    throw InvalidArgumentError("unknown class '" + std::string(text) + "' (expected sharp or round)");
}

const std::string& GraphemeClasses::consonants(SoundClass cls) const {
    return cls == SoundClass::Sharp ? sharp_consonants : round_consonants;
}

const std::string& GraphemeClasses::vowels(SoundClass cls) const {
    return cls == SoundClass::Sharp ? sharp_vowels : round_vowels;
}

void GraphemeClasses::validate() const {
    std::set<char> seen;
    for (const std::string* set :
         {&sharp_consonants, &round_consonants, &sharp_vowels, &round_vowels, &neutral_vowels}) {
        for (char c : *set) {
            if (c < 'a' || c > 'z') {
                throw InvalidArgumentError(std::string("grapheme '") + c + "' is not a lowercase Latin letter");
            }
            if (!seen.insert(c).second) {
                throw InvalidArgumentError(std::string("grapheme '") + c + "' appears in more than one class");
            }
        }
    }
}

std::vector<const Pseudoword*> StimulusSet::all() const {
    std::vector<const Pseudoword*> out;
    out.reserve(size());
    for (const auto& pw : sharp) out.push_back(&pw);
    for (const auto& pw : round) out.push_back(&pw);
    return out;
}

std::vector<Pseudoword> enumerate_pseudowords(const GraphemeClasses& classes, SoundClass cls) {
    std::string consonants = classes.consonants(cls);
    std::string vowels = classes.vowels(cls) + classes.neutral_vowels;
    std::sort(consonants.begin(), consonants.end());
    std::sort(vowels.begin(), vowels.end());

    // Nested loops over sorted sets emit (c1, v1, c2, v2) in lexicographic
    // order, and the surface c1 v1 c2 v2 c1 v1 sorts the same way.
    std::vector<Pseudoword> out;
    out.reserve(consonants.size() * vowels.size() * consonants.size() * vowels.size());
    for (char c1 : consonants) {
        for (char v1 : vowels) {
            for (char c2 : consonants) {
                for (char v2 : vowels) {
                    Syllable s1{c1, v1}, s2{c2, v2};
                    out.push_back(Pseudoword{std::string{c1, v1, c2, v2, c1, v1}, cls, {s1, s2, s1}});
                }
            }
        }
    }
    return out;
}

Pseudoword classify_pseudoword(const GraphemeClasses& classes, std::string_view surface) {
    const std::string word(surface);
    if (word.size() != 6) {
        throw TemplateError("'" + word + "' is not a six-letter CVCVCV form");
    }

    auto class_of = [&](char c, bool consonant) -> int {
        // 0 sharp, 1 round, 2 neutral vowel, -1 wrong slot type, -2 unknown
        auto in = [c](const std::string& s) { return s.find(c) != std::string::npos; };
        if (consonant) {
            if (in(classes.sharp_consonants)) return 0;
            if (in(classes.round_consonants)) return 1;
            if (in(classes.sharp_vowels) || in(classes.round_vowels) || in(classes.neutral_vowels)) return -1;
            return -2;
        }
        if (in(classes.sharp_vowels)) return 0;
        if (in(classes.round_vowels)) return 1;
        if (in(classes.neutral_vowels)) return 2;
        if (in(classes.sharp_consonants) || in(classes.round_consonants)) return -1;
        return -2;
    };

    for (char c : word) {
        if (class_of(c, true) == -2) {
            throw UnknownGraphemeError(std::string("'") + c + "' in '" + word + "' belongs to no grapheme class");
        }
    }
    for (size_t i = 0; i < 6; ++i) {
        if (class_of(word[i], i % 2 == 0) == -1) {
            throw TemplateError("'" + word + "' does not alternate consonant and vowel");
        }
    }
    if (word[0] != word[4] || word[1] != word[5]) {
        throw TemplateError("'" + word + "' does not repeat its first syllable as its last");
    }

    bool has_sharp = false, has_round = false;
    for (size_t i = 0; i < 6; ++i) {
        int k = class_of(word[i], i % 2 == 0);
        has_sharp |= k == 0;
        has_round |= k == 1;
    }
    if (has_sharp && has_round) {
        throw MixedClassError("'" + word + "' mixes sharp and round graphemes");
    }
    if (!has_sharp && !has_round) {
        throw TemplateError("'" + word + "' has no class-bearing grapheme");
    }

    Syllable s1{word[0], word[1]}, s2{word[2], word[3]};
    return Pseudoword{word, has_sharp ? SoundClass::Sharp : SoundClass::Round, {s1, s2, s1}};
}

std::pair<char, char> first_syllable_graphemes(const Pseudoword& pw) {
    return {pw.syllables.at(0).consonant, pw.syllables.at(0).vowel};
}

StimulusSet build_stimulus_set(const GraphemeClasses& classes) {
    classes.validate();
    StimulusSet set;
    set.sharp = enumerate_pseudowords(classes, SoundClass::Sharp);
    set.round = enumerate_pseudowords(classes, SoundClass::Round);
    set.specials.emplace("kiki", SpecialStimulus{"kiki", SoundClass::Sharp});
    set.specials.emplace("bouba", SpecialStimulus{"bouba", SoundClass::Round});
    return set;
}

}  // namespace soundsym
