// Porter suffix-stripping stemmer, following the 1980 algorithm as published
// (no later revisions such as "logi" -> "log" or "bli" -> "ble").

#include <array>
#include <span>
#include <string>
#include <string_view>

#include "ohc/textprep.hpp"

namespace ohc {
namespace {

class Word {
public:
    explicit Word(std::string_view w) : b_(w) {}

    const std::string& str() const { return b_; }

    bool consonant(std::size_t i) const {
        switch (b_[i]) {
            case 'a': case 'e': case 'i': case 'o': case 'u': return false;
            case 'y': return i == 0 || !consonant(i - 1);
            default: return true;
        }
    }

    // Number of VC sequences in b_[0, len).
    int measure(std::size_t len) const {
        int m = 0;
        std::size_t i = 0;
        while (i < len && consonant(i)) ++i;
        while (i < len) {
            while (i < len && !consonant(i)) ++i;
            if (i >= len) break;
            while (i < len && consonant(i)) ++i;
            ++m;
        }
        return m;
    }

    bool has_vowel(std::size_t len) const {
        for (std::size_t i = 0; i < len; ++i)
            if (!consonant(i)) return true;
        return false;
    }

    bool double_consonant(std::size_t len) const {
        return len >= 2 && b_[len - 1] == b_[len - 2] && consonant(len - 1);
    }

    // cvc where the final c is not w, x or y.
    bool cvc(std::size_t len) const {
        if (len < 3) return false;
        if (!consonant(len - 1) || consonant(len - 2) || !consonant(len - 3)) return false;
        const char c = b_[len - 1];
        return c != 'w' && c != 'x' && c != 'y';
    }

    bool ends(std::string_view s) const { return std::string_view(b_).ends_with(s); }

    std::size_t stem_len(std::string_view suffix) const { return b_.size() - suffix.size(); }

    void replace_suffix(std::string_view suffix, std::string_view with) {
        b_.resize(b_.size() - suffix.size());
        b_ += with;
    }

private:
    std::string b_;
};

struct Rule {
    std::string_view suffix;
    std::string_view replacement;
};

// The first rule whose suffix matches decides; the replacement happens only
// when the stem measure exceeds min_measure.
void apply_first_match(Word& w, std::span<const Rule> rules, int min_measure) {
    for (const auto& r : rules) {
        if (!w.ends(r.suffix)) continue;
        if (w.measure(w.stem_len(r.suffix)) > min_measure) w.replace_suffix(r.suffix, r.replacement);
        return;
    }
}

void step1a(Word& w) {
    if (w.ends("sses")) w.replace_suffix("sses", "ss");
    else if (w.ends("ies")) w.replace_suffix("ies", "i");
    else if (w.ends("ss")) {
    } else if (w.ends("s")) w.replace_suffix("s", "");
}

void step1b(Word& w) {
    if (w.ends("eed")) {
        if (w.measure(w.stem_len("eed")) > 0) w.replace_suffix("eed", "ee");
        return;
    }
    bool stripped = false;
    for (std::string_view suffix : {std::string_view("ed"), std::string_view("ing")}) {
        if (w.ends(suffix) && w.has_vowel(w.stem_len(suffix))) {
            w.replace_suffix(suffix, "");
            stripped = true;
            break;
        }
    }
    if (!stripped) return;
    if (w.ends("at")) w.replace_suffix("at", "ate");
    else if (w.ends("bl")) w.replace_suffix("bl", "ble");
    else if (w.ends("iz")) w.replace_suffix("iz", "ize");
    else if (const auto n = w.str().size(); w.double_consonant(n)) {
        const char last = w.str().back();
        if (last != 'l' && last != 's' && last != 'z') w.replace_suffix(w.str().substr(n - 1), "");
    } else if (w.measure(n) == 1 && w.cvc(n)) {
        w.replace_suffix("", "e");
    }
}

void step1c(Word& w) {
    if (w.ends("y") && w.has_vowel(w.stem_len("y"))) w.replace_suffix("y", "i");
}

constexpr std::array<Rule, 20> kStep2{{
    {"ational", "ate"}, {"tional", "tion"}, {"enci", "ence"},   {"anci", "ance"},  {"izer", "ize"},
    {"abli", "able"},   {"alli", "al"},     {"entli", "ent"},   {"eli", "e"},      {"ousli", "ous"},
    {"ization", "ize"}, {"ation", "ate"},   {"ator", "ate"},    {"alism", "al"},   {"iveness", "ive"},
    {"fulness", "ful"}, {"ousness", "ous"}, {"aliti", "al"},    {"iviti", "ive"},  {"biliti", "ble"},
}};

constexpr std::array<Rule, 7> kStep3{{
    {"icate", "ic"}, {"ative", ""}, {"alize", "al"}, {"iciti", "ic"}, {"ical", "ic"}, {"ful", ""}, {"ness", ""},
}};

// Step 2 rules overlap ("ational"/"tional", "ization"/"ation"); the list is
// searched longest-suffix-first so the first hit is the longest match.
template <std::size_t K>
constexpr std::array<Rule, K> longest_first(std::array<Rule, K> rules) {
    for (std::size_t i = 0; i < K; ++i)
        for (std::size_t j = i + 1; j < K; ++j)
            if (rules[j].suffix.size() > rules[i].suffix.size()) std::swap(rules[i], rules[j]);
    return rules;
}

constexpr auto kStep2Sorted = longest_first(kStep2);
constexpr auto kStep3Sorted = longest_first(kStep3);

void step4(Word& w) {
    static constexpr std::array<std::string_view, 19> suffixes{
        "ement", "ance", "ence", "able", "ible", "ment", "ant", "ent", "ism", "ate",
        "iti",   "ous",  "ive",  "ize",  "ion",  "al",   "er",  "ic",  "ou"};
    for (auto s : suffixes) {
        if (!w.ends(s)) continue;
        const std::size_t len = w.stem_len(s);
        if (s == "ion") {
            const char before = len > 0 ? w.str()[len - 1] : '\0';
            if (before != 's' && before != 't') return;
        }
        if (w.measure(len) > 1) w.replace_suffix(s, "");
        return;
    }
}

void step5(Word& w) {
    if (w.ends("e")) {
        const std::size_t len = w.stem_len("e");
        const int m = w.measure(len);
        if (m > 1 || (m == 1 && !w.cvc(len))) w.replace_suffix("e", "");
    }
    const std::size_t n = w.str().size();
    if (w.ends("ll") && w.measure(n) > 1) w.replace_suffix("l", "");
}

}  // namespace

std::string stem(std::string_view token) {
    if (token.empty()) return std::string(token);
    for (char c : token)
        if (c < 'a' || c > 'z') return std::string(token);
    Word w(token);
    step1a(w);
    step1b(w);
    step1c(w);
    apply_first_match(w, kStep2Sorted, 0);
    apply_first_match(w, kStep3Sorted, 0);
    step4(w);
    step5(w);
    return w.str();
}

}  // namespace ohc
