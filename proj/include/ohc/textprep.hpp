#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace ohc {

using Tokens = std::vector<std::string>;

struct TokenSequence {
    std::string sentence_id;
    Tokens tokens;

    friend bool operator==(const TokenSequence&, const TokenSequence&) = default;
};

/// Placeholders emitted by masking and emoticon substitution. These are the
/// only upper-case tokens the pipeline produces.
bool is_placeholder(std::string_view token);

/// Splits on whitespace and punctuation. Numbers ("1.2", "1,000", "10:30"),
/// currency ("$50"), known abbreviations ("dec.") and placeholders stay whole.
/// Alphabetic tokens are lower-cased.
Tokens tokenize(std::string_view text);
/// Same segmentation, original case kept (masking uses capitalization).
Tokens tokenize_cased(std::string_view text);

/// Porter (1980) suffix stripping. Input that is not lower-case ASCII
/// letters is returned unchanged.
std::string stem(std::string_view token);

/// Replaces numbers, money, times, dates and gazetteer or capitalization
/// based names with NUMBER, MONEY, TIME, DATE, PERSON, LOCATION,
/// ORGANIZATION. Multi-token entities collapse to a single placeholder.
Tokens mask_entities(const Tokens& tokens);

bool is_stopword(std::string_view token);
/// Stopwords and pure punctuation tokens are dropped; placeholders stay.
Tokens remove_stopwords(const Tokens& tokens);

/// tokenize, mask, drop stopwords, stem.
TokenSequence preprocess_sentence(std::string_view sentence_id, std::string_view text);
Tokens preprocess_text(std::string_view text);

class Vocabulary {
public:
    static constexpr std::size_t kUnkId = 0;
    static constexpr std::string_view kUnkToken = "<unk>";
    static constexpr std::size_t kDefaultMinCount = 5;

    Vocabulary();

    std::size_t size() const { return token_of_.size(); }
    std::size_t min_count() const { return min_count_; }
    /// Unknown tokens map to kUnkId.
    std::size_t id(std::string_view token) const;
    bool contains(std::string_view token) const;
    const std::string& token(std::size_t id) const { return token_of_.at(id); }
    std::vector<std::size_t> ids(const Tokens& tokens) const;

    /// token TAB id, one per line, in id order.
    void write(std::ostream& out) const;
    static Vocabulary read(std::istream& in);
    void save(const std::filesystem::path& path) const;
    static Vocabulary load(const std::filesystem::path& path);

    friend bool operator==(const Vocabulary& a, const Vocabulary& b) { return a.token_of_ == b.token_of_; }

private:
    friend Vocabulary build_vocab(const std::vector<Tokens>& sequences, std::size_t min_count);
    void add(std::string token);

    std::unordered_map<std::string, std::size_t> id_of_;
    std::vector<std::string> token_of_;
    std::size_t min_count_ = kDefaultMinCount;
};

/// Ids are assigned by descending frequency, ties broken lexicographically.
/// Throws Error when min_count is 0.
Vocabulary build_vocab(const std::vector<Tokens>& sequences, std::size_t min_count = Vocabulary::kDefaultMinCount);

}  // namespace ohc
