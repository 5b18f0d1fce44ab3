#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ohc/schema.hpp"

namespace ohc {

/// Seconds since the Unix epoch, UTC.
using Timestamp = std::int64_t;

/// Parses ISO-8601 date-times such as "2014-03-02T10:15:00Z",
/// "2014-03-02 10:15:00", "2014-03-02T10:15:00.25-05:00" or a bare date.
/// Throws Error when the text is not a valid date-time.
Timestamp parse_timestamp(std::string_view iso);
/// Always "YYYY-MM-DDTHH:MM:SSZ".
std::string format_timestamp(Timestamp t);

enum class CancerStage : std::uint8_t { Stage0, StageI, StageII, StageIII, StageIV, Unknown };

std::string_view stage_name(CancerStage s);
CancerStage stage_from_name(std::string_view name);

/// Case-insensitive "stage" followed by 0/I/II/III/IV (arabic 0-4 accepted
/// too) and an optional sub-stage letter. First match wins.
CancerStage parse_stage(std::string_view signature);

struct Post {
    std::string post_id;
    std::string thread_id;
    std::string forum_id;
    std::string author_id;
    Timestamp created_at = 0;
    std::string text;
    std::optional<std::string> signature;

    friend bool operator==(const Post&, const Post&) = default;
};

struct Sentence {
    std::string sentence_id;
    std::string post_id;
    std::size_t index = 0;
    std::string text;
    std::vector<std::string> tokens;

    friend bool operator==(const Sentence&, const Sentence&) = default;
};

std::string make_sentence_id(std::string_view post_id, std::size_t index);

struct AuthorInfo {
    Timestamp first_activity = 0;
    CancerStage stage = CancerStage::Unknown;
    std::size_t post_count = 0;

    friend bool operator==(const AuthorInfo&, const AuthorInfo&) = default;
};

/// Immutable once built. Sentences of a post are stored contiguously, in
/// post order.
class Corpus {
public:
    struct SentenceRange {
        std::size_t first = 0;
        std::size_t count = 0;
    };

    const std::vector<Post>& posts() const { return posts_; }
    const std::vector<Sentence>& sentences() const { return sentences_; }
    const std::map<std::string, AuthorInfo>& authors() const { return authors_; }

    const Post* find_post(std::string_view post_id) const;
    const Sentence* find_sentence(std::string_view sentence_id) const;
    SentenceRange sentences_of(std::size_t post_index) const { return ranges_.at(post_index); }
    std::optional<std::size_t> post_index(std::string_view post_id) const;

    bool empty() const { return posts_.empty(); }

    friend bool operator==(const Corpus& a, const Corpus& b) {
        return a.posts_ == b.posts_ && a.sentences_ == b.sentences_ && a.authors_ == b.authors_;
    }

    class Builder;

private:
    std::vector<Post> posts_;
    std::vector<Sentence> sentences_;
    std::vector<SentenceRange> ranges_;
    std::map<std::string, AuthorInfo> authors_;
    std::unordered_map<std::string, std::size_t> post_by_id_;
    std::unordered_map<std::string, std::size_t> sentence_by_id_;
};

class Corpus::Builder {
public:
    /// Returns false (and keeps the first copy) when post_id was already added.
    bool add(Post post);
    /// Adds a post whose sentences were segmented elsewhere (archive reload).
    bool add(Post post, std::vector<std::string> sentence_texts);
    Corpus build() &&;

private:
    Corpus corpus_;
};

struct IngestStats {
    std::size_t lines = 0;
    std::size_t accepted = 0;
    std::size_t malformed = 0;
    std::size_t duplicates = 0;
};

struct IngestResult {
    Corpus corpus;
    IngestStats stats;
};

/// One JSON post record per line. Blank lines are ignored, malformed lines
/// and duplicate post ids are counted and skipped.
IngestResult ingest_posts(std::istream& in);
/// Throws Error when the file cannot be opened.
IngestResult ingest_posts_file(const std::filesystem::path& path);

/// Maximal sentence spans, trimmed. Whitespace-only input gives no sentences.
std::vector<std::string> split_sentences(std::string_view text);

/// Replaces emoticons delimited by whitespace with EMO_POS / EMO_NEG / EMO_OTHER.
std::string substitute_emoticons(std::string_view text);

/// Writes posts.jsonl (same schema as ingestion input), sentences.jsonl and
/// authors.jsonl into dir.
void write_corpus_archive(const Corpus& corpus, const std::filesystem::path& dir);
Corpus read_corpus_archive(const std::filesystem::path& dir);

std::string post_to_json_line(const Post& p);

}  // namespace ohc
