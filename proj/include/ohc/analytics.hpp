#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ohc/corpus.hpp"
#include "ohc/schema.hpp"

namespace ohc {

struct PostLabels {
    std::string post_id;
    LabelSet labels;
    std::size_t sentence_count = 0;
    std::vector<std::size_t> label_sentences = std::vector<std::size_t>(TopicSchema::N, 0);

    friend bool operator==(const PostLabels&, const PostLabels&) = default;
};

/// A label is kept when strictly more than 1/10 of the post's sentences carry
/// it. MISC sentence labels never count; MISC is the post label exactly when
/// no other label qualifies. Throws Error for a post without sentences.
PostLabels aggregate_post_labels(std::span<const LabelSet> sentence_labels);

/// Percentage of posts carrying each topic; all zeros for no posts.
std::vector<double> prevalence(std::span<const PostLabels> posts);

struct StageRow {
    CancerStage stage = CancerStage::Unknown;
    std::size_t n_posts = 0;
    std::vector<double> percent;
};

/// One row per stage that has posts, in stage order. Posts by authors of
/// unknown stage are left out; when nothing remains a warning is added.
std::vector<StageRow> stratify_by_stage(const Corpus& corpus, std::span<const PostLabels> posts,
                                        std::vector<std::string>* warnings = nullptr);

enum class TimeUnit { Post, Day, Week };
TimeUnit parse_time_unit(std::string_view name);
std::string_view time_unit_name(TimeUnit unit);

struct TrajectoryBin {
    std::size_t bin = 0;
    std::size_t n_posts = 0;
    std::vector<std::size_t> topic_posts = std::vector<std::size_t>(TopicSchema::N, 0);

    /// topic_posts / n_posts; NaN for an empty bin.
    double frequency(std::size_t topic) const;
};

/// Bins are dense from 0 to the last occupied bin. A post's bin is its
/// ordinal among the author's posts, or whole days (weeks) since the
/// author's first activity. Every post weighs the same within a bin.
std::vector<TrajectoryBin> trajectory(const Corpus& corpus, std::span<const PostLabels> posts, TimeUnit unit);

/// topic,percent
void write_prevalence_csv(std::span<const double> percent, std::ostream& out);
/// stage,topic,percent,n_posts
void write_stage_csv(std::span<const StageRow> rows, std::ostream& out);
/// bin,topic,frequency,n_posts; empty bins carry "NA".
void write_trajectory_csv(std::span<const TrajectoryBin> bins, std::ostream& out);
/// series,x,topic,value,n_posts: one shape for every analysis, ready for
/// faceted plotting.
void write_long_csv(std::string_view series, std::span<const double> percent, std::ostream& out);
void write_long_csv(std::string_view series, std::span<const StageRow> rows, std::ostream& out);
void write_long_csv(std::string_view series, std::span<const TrajectoryBin> bins, std::ostream& out);

/// Two rows per topic in the layout of a printed prevalence table, one decimal.
void write_prevalence_text(std::span<const double> percent, std::ostream& out);

/// post_id,labels,sentence_count,<per-topic sentence counts>; labels are
/// codes joined by '|'.
void write_post_labels(std::span<const PostLabels> posts, std::ostream& out);
std::vector<PostLabels> read_post_labels(std::istream& in);

}  // namespace ohc
