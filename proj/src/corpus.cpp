#include "ohc/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <regex>
#include <set>
#include <sstream>

#include <json.hpp>

#include "ohc/resources.hpp"

namespace ohc {

using nlohmann::json;

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
bool is_alnum(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

std::string to_lower(std::string_view s) {
    std::string out(s);
    for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
    while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
    return s;
}

// Howard Hinnant's days_from_civil.
std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const auto yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m > 2 ? m - 3 : m + 9) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, std::int64_t& y, unsigned& m, unsigned& d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const auto doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    y = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = doy - (153 * mp + 2) / 5 + 1;
    m = mp < 10 ? mp + 3 : mp - 9;
    y += m <= 2;
}

unsigned days_in_month(std::int64_t y, unsigned m) {
    static constexpr unsigned kDays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    const bool leap = (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
    return m == 2 && leap ? 29 : kDays[m - 1];
}

struct Cursor {
    std::string_view s;
    std::size_t pos = 0;

    bool done() const { return pos >= s.size(); }
    char peek() const { return done() ? '\0' : s[pos]; }

    bool digits(std::size_t n, int& out) {
        if (pos + n > s.size()) return false;
        out = 0;
        for (std::size_t i = 0; i < n; ++i) {
            char c = s[pos + i];
            if (c < '0' || c > '9') return false;
            out = out * 10 + (c - '0');
        }
        pos += n;
        return true;
    }
    bool expect(char c) {
        if (peek() != c) return false;
        ++pos;
        return true;
    }
};

const std::vector<std::string>& abbreviation_list() {
    static const std::vector<std::string> list = resources::lines(resources::abbreviations());
    return list;
}

// The word (letters and internal periods) ending at the terminal period at
// text[end], lowercased and including the period.
std::string word_before(std::string_view text, std::size_t end) {
    std::size_t start = end;
    while (start > 0 && (is_alnum(text[start - 1]) || text[start - 1] == '.')) --start;
    return to_lower(text.substr(start, end - start + 1));
}

bool is_abbreviation(std::string_view text, std::size_t period_pos) {
    const std::string word = word_before(text, period_pos);
    const auto& list = abbreviation_list();
    for (const auto& a : list) {
        if (word == a) return true;
        // "...e.g." preceded by other characters only counts when the
        // abbreviation starts at a word boundary.
        if (word.size() > a.size() && word.ends_with(a) && word[word.size() - a.size() - 1] == '.')
            return true;
    }
    return false;
}

struct Emoticon {
    std::string pattern;
    std::string code;
};

const std::vector<Emoticon>& emoticon_list() {
    static const std::vector<Emoticon> list = [] {
        std::vector<Emoticon> out;
        for (const auto& line : resources::lines(resources::emoticons())) {
            auto tab = line.find('\t');
            if (tab == std::string::npos) continue;
            out.push_back({line.substr(0, tab), line.substr(tab + 1)});
        }
        // Longest pattern first so ":-)" wins over ":-".
        std::stable_sort(out.begin(), out.end(), [](const Emoticon& a, const Emoticon& b) {
            return a.pattern.size() > b.pattern.size();
        });
        return out;
    }();
    return list;
}

std::string require_string(const json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end() || !it->is_string()) throw Error(std::string("missing string field '") + key + "'");
    return it->get<std::string>();
}

Post post_from_json(const json& j) {
    if (!j.is_object()) throw Error("record is not a JSON object");
    Post p;
    p.post_id = require_string(j, "post_id");
    if (p.post_id.empty()) throw Error("empty post_id");
    p.thread_id = require_string(j, "thread_id");
    p.forum_id = require_string(j, "forum_id");
    p.author_id = require_string(j, "author_id");
    p.created_at = parse_timestamp(require_string(j, "created_at"));
    p.text = require_string(j, "text");
    if (auto it = j.find("signature"); it != j.end() && !it->is_null()) {
        if (!it->is_string()) throw Error("signature must be a string");
        p.signature = it->get<std::string>();
    }
    return p;
}

}  // namespace

Timestamp parse_timestamp(std::string_view iso) {
    Cursor c{trim(iso)};
    int year = 0, month = 0, day = 0, hour = 0, minute = 0, second = 0;
    auto fail = [&]() -> Timestamp { throw Error("invalid timestamp '" + std::string(iso) + "'"); };
    if (!c.digits(4, year) || !c.expect('-') || !c.digits(2, month) || !c.expect('-') || !c.digits(2, day))
        return fail();
    if (month < 1 || month > 12 || day < 1 || static_cast<unsigned>(day) > days_in_month(year, month))
        return fail();
    std::int64_t offset = 0;
    if (!c.done()) {
        if (c.peek() != 'T' && c.peek() != 't' && c.peek() != ' ') return fail();
        ++c.pos;
        if (!c.digits(2, hour) || !c.expect(':') || !c.digits(2, minute)) return fail();
        if (c.expect(':')) {
            if (!c.digits(2, second)) return fail();
            if (c.expect('.') || c.expect(',')) {
                // Fractional seconds are dropped; precision is whole seconds.
                std::size_t n = 0;
                while (!c.done() && std::isdigit(static_cast<unsigned char>(c.peek()))) ++c.pos, ++n;
                if (n == 0) return fail();
            }
        }
        if (hour > 23 || minute > 59 || second > 60) return fail();
        if (c.expect('Z') || c.expect('z')) {
        } else if (c.peek() == '+' || c.peek() == '-') {
            const int sign = c.peek() == '+' ? 1 : -1;
            ++c.pos;
            int oh = 0, om = 0;
            if (!c.digits(2, oh)) return fail();
            c.expect(':');
            if (!c.digits(2, om)) return fail();
            offset = sign * (oh * 3600 + om * 60);
        }
        if (!c.done()) return fail();
    }
    return days_from_civil(year, month, day) * 86400 + hour * 3600 + minute * 60 + second - offset;
}

std::string format_timestamp(Timestamp t) {
    std::int64_t days = t / 86400;
    std::int64_t rem = t % 86400;
    if (rem < 0) {
        rem += 86400;
        --days;
    }
    std::int64_t y = 0;
    unsigned m = 0, d = 0;
    civil_from_days(days, y, m, d);
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04lld-%02u-%02uT%02d:%02d:%02dZ", static_cast<long long>(y), m, d,
                  static_cast<int>(rem / 3600), static_cast<int>(rem % 3600 / 60), static_cast<int>(rem % 60));
    return buf;
}

std::string_view stage_name(CancerStage s) {
    switch (s) {
        case CancerStage::Stage0: return "Stage0";
        case CancerStage::StageI: return "StageI";
        case CancerStage::StageII: return "StageII";
        case CancerStage::StageIII: return "StageIII";
        case CancerStage::StageIV: return "StageIV";
        case CancerStage::Unknown: break;
    }
    return "Unknown";
}

CancerStage stage_from_name(std::string_view name) {
    for (auto s : {CancerStage::Stage0, CancerStage::StageI, CancerStage::StageII, CancerStage::StageIII,
                   CancerStage::StageIV})
        if (stage_name(s) == name) return s;
    if (name == "Unknown") return CancerStage::Unknown;
    throw Error("unknown stage name '" + std::string(name) + "'");
}

CancerStage parse_stage(std::string_view signature) {
    static const std::regex pattern(R"(\bstage\s*[:\-]?\s*(iv|iii|ii|i|0|1|2|3|4)[abc]?(?![a-z0-9]))",
                                    std::regex::icase | std::regex::ECMAScript | std::regex::optimize);
    const std::string text(signature);
    std::smatch m;
    if (!std::regex_search(text, m, pattern)) return CancerStage::Unknown;
    const std::string level = to_lower(m[1].str());
    if (level == "0") return CancerStage::Stage0;
    if (level == "i" || level == "1") return CancerStage::StageI;
    if (level == "ii" || level == "2") return CancerStage::StageII;
    if (level == "iii" || level == "3") return CancerStage::StageIII;
    return CancerStage::StageIV;
}

std::string make_sentence_id(std::string_view post_id, std::size_t index) {
    return std::string(post_id) + ":" + std::to_string(index);
}

std::string substitute_emoticons(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    std::size_t i = 0;
    while (i < text.size()) {
        const bool at_boundary = i == 0 || is_space(text[i - 1]);
        bool replaced = false;
        if (at_boundary) {
            for (const auto& e : emoticon_list()) {
                if (text.substr(i).starts_with(e.pattern)) {
                    const std::size_t end = i + e.pattern.size();
                    const bool closed = end == text.size() || is_space(text[end]) ||
                                        std::string_view(".,!?;").find(text[end]) != std::string_view::npos;
                    if (!closed) continue;
                    out += e.code;
                    i = end;
                    replaced = true;
                    break;
                }
            }
        }
        if (!replaced) out += text[i++];
    }
    return out;
}

std::vector<std::string> split_sentences(std::string_view text) {
    std::vector<std::string> out;
    std::size_t start = 0;
    auto emit = [&](std::size_t end) {
        auto piece = trim(text.substr(start, end - start));
        if (!piece.empty()) out.emplace_back(piece);
        start = end;
    };
    std::size_t i = 0;
    while (i < text.size()) {
        const char c = text[i];
        if (c != '.' && c != '!' && c != '?') {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < text.size() && (text[j] == '.' || text[j] == '!' || text[j] == '?')) ++j;
        // Closing quotes and brackets stay with the sentence they end.
        while (j < text.size() && (text[j] == '"' || text[j] == '\'' || text[j] == ')')) ++j;
        std::size_t k = j;
        while (k < text.size() && is_space(text[k])) ++k;
        const bool followed_by_space = k > j;
        const bool next_starts_sentence =
            k < text.size() && (std::isupper(static_cast<unsigned char>(text[k])) ||
                                std::isdigit(static_cast<unsigned char>(text[k])) || text[k] == '"');
        const bool single_period = c == '.' && j - i == 1;
        if (followed_by_space && next_starts_sentence && !(single_period && is_abbreviation(text, i))) emit(j);
        i = j;
    }
    emit(text.size());
    return out;
}

const Post* Corpus::find_post(std::string_view post_id) const {
    auto it = post_by_id_.find(std::string(post_id));
    return it == post_by_id_.end() ? nullptr : &posts_[it->second];
}

const Sentence* Corpus::find_sentence(std::string_view sentence_id) const {
    auto it = sentence_by_id_.find(std::string(sentence_id));
    return it == sentence_by_id_.end() ? nullptr : &sentences_[it->second];
}

std::optional<std::size_t> Corpus::post_index(std::string_view post_id) const {
    auto it = post_by_id_.find(std::string(post_id));
    if (it == post_by_id_.end()) return std::nullopt;
    return it->second;
}

bool Corpus::Builder::add(Post post) {
    post.text = substitute_emoticons(post.text);
    auto texts = split_sentences(post.text);
    return add(std::move(post), std::move(texts));
}

bool Corpus::Builder::add(Post post, std::vector<std::string> sentence_texts) {
    auto& c = corpus_;
    if (c.post_by_id_.contains(post.post_id)) return false;
    const std::size_t index = c.posts_.size();
    c.post_by_id_.emplace(post.post_id, index);
    c.ranges_.push_back({c.sentences_.size(), sentence_texts.size()});
    for (std::size_t i = 0; i < sentence_texts.size(); ++i) {
        Sentence s;
        s.sentence_id = make_sentence_id(post.post_id, i);
        s.post_id = post.post_id;
        s.index = i;
        s.text = std::move(sentence_texts[i]);
        c.sentence_by_id_.emplace(s.sentence_id, c.sentences_.size());
        c.sentences_.push_back(std::move(s));
    }
    const CancerStage stage = post.signature ? parse_stage(*post.signature) : CancerStage::Unknown;
    auto [it, fresh] = c.authors_.try_emplace(post.author_id, AuthorInfo{post.created_at, stage, 0});
    auto& author = it->second;
    if (!fresh) {
        // The stage comes from the author's earliest signature that states one.
        if (post.created_at < author.first_activity) {
            author.first_activity = post.created_at;
            if (stage != CancerStage::Unknown) author.stage = stage;
        } else if (author.stage == CancerStage::Unknown) {
            author.stage = stage;
        }
    }
    ++author.post_count;
    c.posts_.push_back(std::move(post));
    return true;
}

Corpus Corpus::Builder::build() && { return std::move(corpus_); }

IngestResult ingest_posts(std::istream& in) {
    IngestResult result;
    Corpus::Builder builder;
    std::string line;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        ++result.stats.lines;
        Post post;
        try {
            post = post_from_json(json::parse(line));
        } catch (const std::exception&) {
            ++result.stats.malformed;
            continue;
        }
        if (builder.add(std::move(post)))
            ++result.stats.accepted;
        else
            ++result.stats.duplicates;
    }
    if (in.bad()) throw Error("read error while ingesting posts");
    result.corpus = std::move(builder).build();
    return result;
}

IngestResult ingest_posts_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open post source '" + path.string() + "'");
    return ingest_posts(in);
}

std::string post_to_json_line(const Post& p) {
    json j = {{"post_id", p.post_id},     {"thread_id", p.thread_id},
              {"forum_id", p.forum_id},   {"author_id", p.author_id},
              {"created_at", format_timestamp(p.created_at)}, {"text", p.text}};
    if (p.signature) j["signature"] = *p.signature;
    return j.dump();
}

void write_corpus_archive(const Corpus& corpus, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    auto open = [&](const char* name) {
        std::ofstream out(dir / name, std::ios::binary);
        if (!out) throw Error("cannot write " + (dir / name).string());
        return out;
    };
    {
        auto out = open("posts.jsonl");
        for (const auto& p : corpus.posts()) out << post_to_json_line(p) << '\n';
    }
    {
        auto out = open("sentences.jsonl");
        for (const auto& s : corpus.sentences()) {
            json j = {{"sentence_id", s.sentence_id}, {"post_id", s.post_id}, {"index", s.index}, {"text", s.text}};
            if (!s.tokens.empty()) j["tokens"] = s.tokens;
            out << j.dump() << '\n';
        }
    }
    {
        auto out = open("authors.jsonl");
        for (const auto& [id, a] : corpus.authors()) {
            json j = {{"author_id", id},
                      {"first_activity", format_timestamp(a.first_activity)},
                      {"stage", stage_name(a.stage)},
                      {"post_count", a.post_count}};
            out << j.dump() << '\n';
        }
    }
}

Corpus read_corpus_archive(const std::filesystem::path& dir) {
    std::ifstream posts_in(dir / "posts.jsonl");
    if (!posts_in) throw Error("corpus archive missing posts.jsonl in " + dir.string());
    std::ifstream sentences_in(dir / "sentences.jsonl");
    if (!sentences_in) throw Error("corpus archive missing sentences.jsonl in " + dir.string());

    std::unordered_map<std::string, std::vector<std::string>> texts;
    std::string line;
    while (std::getline(sentences_in, line)) {
        if (trim(line).empty()) continue;
        auto j = json::parse(line);
        auto& v = texts[j.at("post_id").get<std::string>()];
        const auto index = j.at("index").get<std::size_t>();
        if (index != v.size()) throw Error("sentences.jsonl: non-contiguous sentence indices");
        v.push_back(j.at("text").get<std::string>());
    }
    Corpus::Builder builder;
    while (std::getline(posts_in, line)) {
        if (trim(line).empty()) continue;
        Post p = post_from_json(json::parse(line));
        auto it = texts.find(p.post_id);
        std::vector<std::string> sentence_texts = it == texts.end() ? std::vector<std::string>{} : it->second;
        if (!builder.add(std::move(p), std::move(sentence_texts))) throw Error("posts.jsonl: duplicate post_id");
    }
    return std::move(builder).build();
}

}  // namespace ohc
