#pragma once

#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace soundsym {

enum class SoundClass { Sharp, Round };

std::string_view to_string(SoundClass cls);
SoundClass parse_sound_class(std::string_view text);

/// Grapheme classes used to build stimuli. The defaults are the sharp/round
/// consonant and vowel sets plus the neutral vowel shared by both classes.
struct GraphemeClasses {
    std::string sharp_consonants = "ptkshx";
    std::string round_consonants = "bdgmnl";
    std::string sharp_vowels = "ei";
    std::string round_vowels = "ou";
    std::string neutral_vowels = "a";

    const std::string& consonants(SoundClass cls) const;
    const std::string& vowels(SoundClass cls) const;

    /// Throws InvalidArgumentError unless the sets are pairwise disjoint
    /// single lowercase Latin letters.
    void validate() const;
};

struct Syllable {
    char consonant;
    char vowel;
    bool operator==(const Syllable&) const = default;
};

/// A validated (CV)1(CV)2(CV)1 stimulus.
struct Pseudoword {
    std::string surface;
    SoundClass cls;
    std::vector<Syllable> syllables;

    bool operator==(const Pseudoword&) const = default;
};

struct SpecialStimulus {
    std::string surface;
    SoundClass cls;
};

struct StimulusSet {
    std::vector<Pseudoword> sharp;
    std::vector<Pseudoword> round;
    std::map<std::string, SpecialStimulus> specials;

    std::vector<const Pseudoword*> all() const;
    size_t size() const { return sharp.size() + round.size(); }
};

/// Every template word for `cls`, sorted by surface string.
std::vector<Pseudoword> enumerate_pseudowords(const GraphemeClasses& classes, SoundClass cls);

/// Validates `surface` against the template and class-purity rule.
/// Throws TemplateError, MixedClassError or UnknownGraphemeError.
Pseudoword classify_pseudoword(const GraphemeClasses& classes, std::string_view surface);

std::pair<char, char> first_syllable_graphemes(const Pseudoword& pw);

/// Full stimulus set with the default "kiki" (sharp) and "bouba" (round) specials.
StimulusSet build_stimulus_set(const GraphemeClasses& classes);

}  // namespace soundsym
