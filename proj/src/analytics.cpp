#include "ohc/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <tuple>

namespace ohc {

namespace {

constexpr std::size_t kMisc = TopicSchema::index(Topic::MISC);

std::string code(std::size_t l) { return std::string(TopicSchema::code(l)); }

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep)) out.push_back(cur);
    if (!s.empty() && s.back() == sep) out.emplace_back();
    return out;
}

}  // namespace

PostLabels aggregate_post_labels(std::span<const LabelSet> sentence_labels) {
    if (sentence_labels.empty()) throw Error("post has no sentences");
    PostLabels p;
    p.sentence_count = sentence_labels.size();
    for (const auto& s : sentence_labels)
        for (std::size_t l = 0; l < TopicSchema::N; ++l) p.label_sentences[l] += s.contains(l);
    // count / n > 1/10 compared exactly in integers.
    for (std::size_t l = 0; l < TopicSchema::N; ++l)
        if (l != kMisc && 10 * p.label_sentences[l] > p.sentence_count) p.labels.insert(l);
    if (p.labels.empty()) p.labels.insert(kMisc);
    return p;
}

std::vector<double> prevalence(std::span<const PostLabels> posts) {
    std::vector<double> out(TopicSchema::N, 0.0);
    if (posts.empty()) return out;
    std::vector<std::size_t> counts(TopicSchema::N, 0);
    for (const auto& p : posts)
        for (std::size_t l = 0; l < TopicSchema::N; ++l) counts[l] += p.labels.contains(l);
    for (std::size_t l = 0; l < TopicSchema::N; ++l)
        out[l] = 100.0 * static_cast<double>(counts[l]) / static_cast<double>(posts.size());
    return out;
}

std::vector<StageRow> stratify_by_stage(const Corpus& corpus, std::span<const PostLabels> posts,
                                        std::vector<std::string>* warnings) {
    std::map<CancerStage, std::vector<PostLabels>> by_stage;
    for (const auto& p : posts) {
        const Post* post = corpus.find_post(p.post_id);
        if (!post) throw Error("labeled post " + p.post_id + " is not in the corpus");
        const auto it = corpus.authors().find(post->author_id);
        if (it == corpus.authors().end() || it->second.stage == CancerStage::Unknown) continue;
        by_stage[it->second.stage].push_back(p);
    }
    std::vector<StageRow> rows;
    for (const auto& [stage, ps] : by_stage) rows.push_back({stage, ps.size(), prevalence(ps)});
    if (rows.empty() && warnings) warnings->push_back("no posts by authors with a known cancer stage");
    return rows;
}

TimeUnit parse_time_unit(std::string_view name) {
    if (name == "post") return TimeUnit::Post;
    if (name == "day") return TimeUnit::Day;
    if (name == "week") return TimeUnit::Week;
    throw Error("unknown time unit '" + std::string(name) + "'");
}

std::string_view time_unit_name(TimeUnit unit) {
    switch (unit) {
        case TimeUnit::Post: return "post";
        case TimeUnit::Day: return "day";
        case TimeUnit::Week: return "week";
    }
    return "";
}

double TrajectoryBin::frequency(std::size_t topic) const {
    if (n_posts == 0) return std::numeric_limits<double>::quiet_NaN();
    return static_cast<double>(topic_posts[topic]) / static_cast<double>(n_posts);
}

std::vector<TrajectoryBin> trajectory(const Corpus& corpus, std::span<const PostLabels> posts, TimeUnit unit) {
    struct Item {
        Timestamp at;
        std::string post_id;
        LabelSet labels;
    };
    std::map<std::string, std::vector<Item>> by_author;
    for (const auto& p : posts) {
        const Post* post = corpus.find_post(p.post_id);
        if (!post) throw Error("labeled post " + p.post_id + " is not in the corpus");
        by_author[post->author_id].push_back({post->created_at, p.post_id, p.labels});
    }
    std::vector<TrajectoryBin> bins;
    for (auto& [author, items] : by_author) {
        std::sort(items.begin(), items.end(),
                  [](const Item& a, const Item& b) { return std::tie(a.at, a.post_id) < std::tie(b.at, b.post_id); });
        const Timestamp first = corpus.authors().at(author).first_activity;
        for (std::size_t i = 0; i < items.size(); ++i) {
            std::size_t bin = i;
            if (unit != TimeUnit::Post) {
                const Timestamp elapsed = std::max<Timestamp>(0, items[i].at - first);
                const Timestamp days = elapsed / 86400;
                bin = static_cast<std::size_t>(unit == TimeUnit::Day ? days : days / 7);
            }
            if (bins.size() <= bin) {
                const std::size_t old = bins.size();
                bins.resize(bin + 1);
                for (std::size_t b = old; b < bins.size(); ++b) bins[b].bin = b;
            }
            auto& target = bins[bin];
            ++target.n_posts;
            for (std::size_t l = 0; l < TopicSchema::N; ++l) target.topic_posts[l] += items[i].labels.contains(l);
        }
    }
    return bins;
}

void write_prevalence_csv(std::span<const double> percent, std::ostream& out) {
    out << "topic,percent\n";
    for (std::size_t l = 0; l < percent.size(); ++l) out << code(l) << ',' << format_real(percent[l]) << '\n';
}

void write_stage_csv(std::span<const StageRow> rows, std::ostream& out) {
    out << "stage,topic,percent,n_posts\n";
    for (const auto& r : rows)
        for (std::size_t l = 0; l < r.percent.size(); ++l)
            out << stage_name(r.stage) << ',' << code(l) << ',' << format_real(r.percent[l]) << ',' << r.n_posts
                << '\n';
}

void write_trajectory_csv(std::span<const TrajectoryBin> bins, std::ostream& out) {
    out << "bin,topic,frequency,n_posts\n";
    for (const auto& b : bins)
        for (std::size_t l = 0; l < TopicSchema::N; ++l)
            out << b.bin << ',' << code(l) << ',' << (b.n_posts ? format_real(b.frequency(l)) : "NA") << ','
                << b.n_posts << '\n';
}

void write_long_csv(std::string_view series, std::span<const double> percent, std::ostream& out) {
    out << "series,x,topic,value,n_posts\n";
    for (std::size_t l = 0; l < percent.size(); ++l)
        out << series << ",all," << code(l) << ',' << format_real(percent[l] / 100.0) << ",\n";
}

void write_long_csv(std::string_view series, std::span<const StageRow> rows, std::ostream& out) {
    out << "series,x,topic,value,n_posts\n";
    for (const auto& r : rows)
        for (std::size_t l = 0; l < r.percent.size(); ++l)
            out << series << ',' << stage_name(r.stage) << ',' << code(l) << ',' << format_real(r.percent[l] / 100.0)
                << ',' << r.n_posts << '\n';
}

void write_long_csv(std::string_view series, std::span<const TrajectoryBin> bins, std::ostream& out) {
    out << "series,x,topic,value,n_posts\n";
    for (const auto& b : bins)
        for (std::size_t l = 0; l < TopicSchema::N; ++l)
            out << series << ',' << b.bin << ',' << code(l) << ','
                << (b.n_posts ? format_real(b.frequency(l)) : "NA") << ',' << b.n_posts << '\n';
}

void write_prevalence_text(std::span<const double> percent, std::ostream& out) {
    // MISC is a post-level default and is left out of the printed table.
    std::vector<std::size_t> shown;
    for (std::size_t l = 0; l < percent.size(); ++l)
        if (l != kMisc) shown.push_back(l);
    const std::size_t half = (shown.size() + 1) / 2;
    char buf[32];
    for (std::size_t start = 0; start < shown.size(); start += half) {
        const std::size_t end = std::min(shown.size(), start + half);
        for (std::size_t i = start; i < end; ++i) {
            std::snprintf(buf, sizeof buf, "%7s", code(shown[i]).c_str());
            out << buf;
        }
        out << '\n';
        for (std::size_t i = start; i < end; ++i) {
            std::snprintf(buf, sizeof buf, "%7.1f", percent[shown[i]]);
            out << buf;
        }
        out << '\n';
    }
}

void write_post_labels(std::span<const PostLabels> posts, std::ostream& out) {
    out << "post_id,labels,sentence_count";
    for (std::size_t l = 0; l < TopicSchema::N; ++l) out << ',' << code(l);
    out << '\n';
    for (const auto& p : posts) {
        if (p.post_id.find_first_of(",\n\r") != std::string::npos)
            throw Error("post labels: post id '" + p.post_id + "' cannot be written as a CSV field");
        out << p.post_id << ',';
        const auto codes = p.labels.codes();
        for (std::size_t i = 0; i < codes.size(); ++i) out << (i ? "|" : "") << codes[i];
        out << ',' << p.sentence_count;
        for (auto c : p.label_sentences) out << ',' << c;
        out << '\n';
    }
}

std::vector<PostLabels> read_post_labels(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line.rfind("post_id,labels,sentence_count", 0) != 0)
        throw Error("post labels: bad header");
    std::vector<PostLabels> out;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = split(line, ',');
        if (f.size() != 3 + TopicSchema::N) throw Error("post labels: wrong field count in '" + line + "'");
        PostLabels p;
        p.post_id = f[0];
        p.labels = LabelSet::from_codes(split(f[1], '|'));
        p.sentence_count = std::stoul(f[2]);
        for (std::size_t l = 0; l < TopicSchema::N; ++l) p.label_sentences[l] = std::stoul(f[3 + l]);
        out.push_back(std::move(p));
    }
    return out;
}

}  // namespace ohc
