#include "ohc/textprep.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <unordered_set>

#include "ohc/resources.hpp"
#include "ohc/schema.hpp"

namespace ohc {

std::vector<std::string> resources::lines(std::string_view text) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(start, end - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (!line.empty() && line.front() != '#') out.emplace_back(line);
        start = end + 1;
    }
    return out;
}

namespace {

constexpr std::array<std::string_view, 11> kPlaceholders{
    "NUMBER", "MONEY", "TIME", "DATE", "PERSON", "LOCATION", "ORGANIZATION",
    "EMO_POS", "EMO_NEG", "EMO_OTHER", "UNK"};

bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
// Bytes of multi-byte UTF-8 sequences count as word characters.
bool is_word_char(char c) {
    const auto u = static_cast<unsigned char>(c);
    return std::isalnum(u) || c == '_' || u >= 0x80;
}
bool is_upper(char c) { return c >= 'A' && c <= 'Z'; }

std::string lower(std::string_view s) {
    std::string out(s);
    for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

bool iequals_at(std::string_view text, std::size_t pos, std::string_view lower_pattern) {
    if (pos + lower_pattern.size() > text.size()) return false;
    for (std::size_t i = 0; i < lower_pattern.size(); ++i)
        if (std::tolower(static_cast<unsigned char>(text[pos + i])) != lower_pattern[i]) return false;
    return true;
}

const std::vector<std::string>& abbreviations_longest_first() {
    static const std::vector<std::string> list = [] {
        auto v = resources::lines(resources::abbreviations());
        std::stable_sort(v.begin(), v.end(), [](const auto& a, const auto& b) { return a.size() > b.size(); });
        return v;
    }();
    return list;
}

const std::unordered_set<std::string>& stopword_set() {
    static const std::unordered_set<std::string> set = [] {
        std::unordered_set<std::string> s;
        for (auto& w : resources::lines(resources::stopwords())) s.insert(w);
        return s;
    }();
    return set;
}

struct GazetteerEntry {
    Tokens tokens;
    std::string entity;
};

// Entries keyed by their first (lower-cased) token, longest first.
const std::unordered_map<std::string, std::vector<GazetteerEntry>>& gazetteer_index() {
    static const auto index = [] {
        std::unordered_map<std::string, std::vector<GazetteerEntry>> idx;
        for (const auto& line : resources::lines(resources::gazetteer())) {
            const auto tab = line.find('\t');
            if (tab == std::string::npos) continue;
            Tokens toks = tokenize(line.substr(0, tab));
            if (toks.empty()) continue;
            const std::string first = toks.front();
            idx[first].push_back({std::move(toks), line.substr(tab + 1)});
        }
        for (auto& [_, entries] : idx)
            std::stable_sort(entries.begin(), entries.end(),
                             [](const auto& a, const auto& b) { return a.tokens.size() > b.tokens.size(); });
        return idx;
    }();
    return index;
}

// Length of the numeric run starting at pos: digits with single internal
// '.', ',', ':' or '/' separators between digits.
std::size_t scan_number(std::string_view text, std::size_t pos) {
    std::size_t j = pos;
    while (j < text.size()) {
        if (is_digit(text[j])) {
            ++j;
        } else if ((text[j] == '.' || text[j] == ',' || text[j] == ':' || text[j] == '/') && j > pos &&
                   is_digit(text[j - 1]) && j + 1 < text.size() && is_digit(text[j + 1])) {
            ++j;
        } else {
            break;
        }
    }
    return j - pos;
}

std::size_t scan_word(std::string_view text, std::size_t pos) {
    std::size_t j = pos;
    while (j < text.size()) {
        if (is_word_char(text[j])) {
            ++j;
        } else if ((text[j] == '\'' || text[j] == '-') && j > pos && j + 1 < text.size() &&
                   is_word_char(text[j + 1])) {
            ++j;
        } else if ((text[j] == '.' || text[j] == ',' || text[j] == ':' || text[j] == '/') && j > pos &&
                   is_digit(text[j - 1]) && j + 1 < text.size() && is_digit(text[j + 1])) {
            ++j;
        } else {
            break;
        }
    }
    return j - pos;
}

bool starts_url(std::string_view text, std::size_t pos) {
    return iequals_at(text, pos, "http://") || iequals_at(text, pos, "https://") || iequals_at(text, pos, "www.");
}

}  // namespace

bool is_placeholder(std::string_view token) {
    return std::find(kPlaceholders.begin(), kPlaceholders.end(), token) != kPlaceholders.end();
}

Tokens tokenize_cased(std::string_view text) {
    Tokens out;
    std::size_t i = 0;
    const std::size_t n = text.size();
    while (i < n) {
        const char c = text[i];
        if (is_space(c)) {
            ++i;
            continue;
        }
        const bool word_start = i == 0 || !is_word_char(text[i - 1]);
        if (word_start && starts_url(text, i)) {
            std::size_t j = i;
            while (j < n && !is_space(text[j])) ++j;
            while (j > i && std::string_view(".,!?;:)\"'").find(text[j - 1]) != std::string_view::npos) --j;
            out.emplace_back(text.substr(i, j - i));
            i = j;
            continue;
        }
        if (word_start && is_word_char(c)) {
            bool matched = false;
            for (const auto& a : abbreviations_longest_first()) {
                if (iequals_at(text, i, a) && (i + a.size() == n || !is_word_char(text[i + a.size()]))) {
                    out.emplace_back(text.substr(i, a.size()));
                    i += a.size();
                    matched = true;
                    break;
                }
            }
            if (matched) continue;
        }
        if (c == '$' && i + 1 < n && is_digit(text[i + 1])) {
            const std::size_t len = 1 + scan_number(text, i + 1);
            out.emplace_back(text.substr(i, len));
            i += len;
            continue;
        }
        if (is_word_char(c)) {
            const std::size_t len = scan_word(text, i);
            out.emplace_back(text.substr(i, len));
            i += len;
            continue;
        }
        std::size_t j = i;
        while (j < n && text[j] == c) ++j;
        out.emplace_back(text.substr(i, j - i));
        i = j;
    }
    return out;
}

Tokens tokenize(std::string_view text) {
    Tokens out = tokenize_cased(text);
    for (auto& t : out)
        if (!is_placeholder(t)) t = lower(t);
    return out;
}

namespace {

bool all_digits(std::string_view s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), is_digit);
}

bool is_numeric(std::string_view s) {
    if (s.empty() || !is_digit(s.front())) return false;
    return scan_number(s, 0) == s.size();
}

bool is_ordinal(std::string_view s) {
    std::size_t d = 0;
    while (d < s.size() && is_digit(s[d])) ++d;
    if (d == 0 || d + 2 != s.size()) return false;
    const std::string suffix = lower(s.substr(d));
    return suffix == "st" || suffix == "nd" || suffix == "rd" || suffix == "th";
}

bool is_day(std::string_view s) {
    std::string_view digits = s;
    if (is_ordinal(s)) digits = s.substr(0, s.size() - 2);
    if (!all_digits(digits) || digits.size() > 2) return false;
    const int v = std::stoi(std::string(digits));
    return v >= 1 && v <= 31;
}

bool is_year(std::string_view s) {
    if (s.size() != 4 || !all_digits(s)) return false;
    const int v = std::stoi(std::string(s));
    return v >= 1900 && v <= 2099;
}

// 0: not a month, 1: unambiguous month word, 2: needs a day next to it
// ("may", "march", bare abbreviations such as "dec").
int month_kind(std::string_view token) {
    static const std::unordered_set<std::string> full{
        "january", "february", "april", "june", "july", "august", "september", "october", "november", "december"};
    static const std::unordered_set<std::string> ambiguous{
        "may", "march", "jan", "feb", "mar", "apr", "jun", "jul", "aug", "sep", "sept", "oct", "nov", "dec"};
    const std::string t = lower(token);
    if (full.contains(t)) return 1;
    if (t.size() > 1 && t.back() == '.' && ambiguous.contains(t.substr(0, t.size() - 1))) return 1;
    if (ambiguous.contains(t)) return 2;
    return 0;
}

bool is_weekday(std::string_view token) {
    static const std::unordered_set<std::string> days{"monday", "tuesday", "wednesday", "thursday",
                                                      "friday", "saturday", "sunday"};
    return days.contains(lower(token));
}

// 12/18/2014, 3/2010, 2014-12-18
bool is_date_literal(std::string_view s) {
    std::vector<std::string> parts;
    char sep = 0;
    std::string cur;
    for (char c : s) {
        if (is_digit(c)) {
            cur += c;
        } else if ((c == '/' || c == '-') && (sep == 0 || sep == c)) {
            sep = c;
            parts.push_back(cur);
            cur.clear();
        } else {
            return false;
        }
    }
    parts.push_back(cur);
    if (sep == 0 || parts.size() < 2 || parts.size() > 3) return false;
    for (const auto& p : parts)
        if (p.empty() || p.size() > 4) return false;
    return parts.front().size() == 4 || parts.back().size() == 4 || parts.back().size() == 2;
}

bool is_meridiem(std::string_view token) {
    const std::string t = lower(token);
    return t == "am" || t == "pm" || t == "a.m." || t == "p.m.";
}

bool is_time_literal(std::string_view s) {
    const std::string t = lower(s);
    std::string_view body = t;
    bool meridiem = false;
    if (body.ends_with("am") || body.ends_with("pm")) {
        body.remove_suffix(2);
        meridiem = true;
    }
    const auto colon = body.find(':');
    if (colon == std::string_view::npos) {
        if (!meridiem || !all_digits(body) || body.size() > 2) return false;
        const int h = std::stoi(std::string(body));
        return h >= 1 && h <= 12;
    }
    const auto h = body.substr(0, colon);
    const auto m = body.substr(colon + 1);
    if (!all_digits(h) || !all_digits(m) || h.size() > 2 || m.size() != 2) return false;
    return std::stoi(std::string(h)) <= 24 && std::stoi(std::string(m)) <= 59;
}

bool is_capitalized(std::string_view token) {
    return token.size() >= 2 && is_upper(token.front()) && !is_placeholder(token);
}

bool is_title(std::string_view token) {
    static const std::unordered_set<std::string> titles{"dr", "dr.", "mr", "mr.", "mrs", "mrs.",
                                                        "ms", "ms.", "prof", "prof."};
    return titles.contains(lower(token));
}

bool is_org_suffix(std::string_view token) {
    static const std::unordered_set<std::string> suffixes{
        "hospital", "hospitals", "clinic",  "clinics",    "center",  "centers", "centre", "institute",
        "university", "foundation", "society", "association", "inc.", "corporation", "pharmaceuticals"};
    return suffixes.contains(lower(token));
}

std::size_t match_gazetteer(const Tokens& tokens, std::size_t i, std::string& entity) {
    const auto& idx = gazetteer_index();
    auto it = idx.find(lower(tokens[i]));
    if (it == idx.end()) return 0;
    for (const auto& e : it->second) {
        if (i + e.tokens.size() > tokens.size()) continue;
        bool ok = true;
        for (std::size_t k = 1; k < e.tokens.size() && ok; ++k) ok = lower(tokens[i + k]) == e.tokens[k];
        if (ok) {
            entity = e.entity;
            return e.tokens.size();
        }
    }
    return 0;
}

// Tokens consumed by a date expression starting at i (0 if none).
std::size_t match_date(const Tokens& t, std::size_t i) {
    const std::size_t n = t.size();
    auto with_year = [&](std::size_t j) {
        if (j + 1 < n && t[j] == "," && is_year(t[j + 1])) return j + 2;
        if (j < n && is_year(t[j])) return j + 1;
        return j;
    };
    const int mk = month_kind(t[i]);
    if (mk != 0 && i + 1 < n && is_day(t[i + 1])) return with_year(i + 2) - i;
    if (mk != 0 && i + 1 < n && is_year(t[i + 1])) return 2;
    if (is_day(t[i]) && i + 1 < n && month_kind(t[i + 1]) != 0) return with_year(i + 2) - i;
    if (is_day(t[i]) && i + 2 < n && lower(t[i + 1]) == "of" && month_kind(t[i + 2]) != 0)
        return with_year(i + 3) - i;
    if (mk == 1 || is_weekday(t[i]) || is_date_literal(t[i]) || is_year(t[i])) return 1;
    return 0;
}

}  // namespace

Tokens mask_entities(const Tokens& tokens) {
    Tokens out;
    out.reserve(tokens.size());
    const std::size_t n = tokens.size();
    std::size_t i = 0;
    while (i < n) {
        const std::string& tok = tokens[i];
        if (is_placeholder(tok)) {
            out.push_back(tok);
            ++i;
            continue;
        }
        std::string entity;
        if (const std::size_t len = match_gazetteer(tokens, i, entity)) {
            out.push_back(entity);
            i += len;
            continue;
        }
        if (is_title(tok) && i + 1 < n && is_capitalized(tokens[i + 1])) {
            std::size_t j = i + 1;
            while (j < n && is_capitalized(tokens[j]) && !is_stopword(lower(tokens[j]))) ++j;
            out.emplace_back("PERSON");
            i = j;
            continue;
        }
        if (is_capitalized(tok)) {
            std::size_t j = i;
            while (j < n && is_capitalized(tokens[j])) ++j;
            std::size_t last_suffix = n;
            for (std::size_t k = i + 1; k < j; ++k)
                if (is_org_suffix(tokens[k])) last_suffix = k;
            if (last_suffix != n) {
                out.emplace_back("ORGANIZATION");
                i = last_suffix + 1;
                continue;
            }
        }
        // Money before numbers so "$50" never decays to NUMBER.
        if (tok.size() > 1 && tok.front() == '$' && is_digit(tok[1])) {
            out.emplace_back("MONEY");
            ++i;
            continue;
        }
        if (is_numeric(tok) && i + 1 < n) {
            const std::string next = lower(tokens[i + 1]);
            if (next == "dollars" || next == "dollar" || next == "bucks") {
                out.emplace_back("MONEY");
                i += 2;
                continue;
            }
        }
        if (const std::size_t len = match_date(tokens, i)) {
            out.emplace_back("DATE");
            i += len;
            continue;
        }
        if (is_time_literal(tok)) {
            out.emplace_back("TIME");
            ++i;
            continue;
        }
        if ((all_digits(tok) || is_time_literal(tok)) && i + 1 < n && is_meridiem(tokens[i + 1])) {
            out.emplace_back("TIME");
            i += 2;
            continue;
        }
        if (is_numeric(tok) || is_ordinal(tok)) {
            out.emplace_back("NUMBER");
            ++i;
            continue;
        }
        out.push_back(tok);
        ++i;
    }
    return out;
}

bool is_stopword(std::string_view token) { return stopword_set().contains(std::string(token)); }

Tokens remove_stopwords(const Tokens& tokens) {
    Tokens out;
    for (const auto& t : tokens) {
        if (is_placeholder(t)) {
            out.push_back(t);
            continue;
        }
        if (std::none_of(t.begin(), t.end(), is_word_char)) continue;
        if (is_stopword(t)) continue;
        out.push_back(t);
    }
    return out;
}

Tokens preprocess_text(std::string_view text) {
    Tokens masked = mask_entities(tokenize_cased(text));
    for (auto& t : masked)
        if (!is_placeholder(t)) t = lower(t);
    Tokens kept = remove_stopwords(masked);
    for (auto& t : kept)
        if (!is_placeholder(t)) t = stem(t);
    return kept;
}

TokenSequence preprocess_sentence(std::string_view sentence_id, std::string_view text) {
    return {std::string(sentence_id), preprocess_text(text)};
}

Vocabulary::Vocabulary() { add(std::string(kUnkToken)); }

void Vocabulary::add(std::string token) {
    id_of_.emplace(token, token_of_.size());
    token_of_.push_back(std::move(token));
}

std::size_t Vocabulary::id(std::string_view token) const {
    auto it = id_of_.find(std::string(token));
    return it == id_of_.end() ? kUnkId : it->second;
}

bool Vocabulary::contains(std::string_view token) const { return id_of_.contains(std::string(token)); }

std::vector<std::size_t> Vocabulary::ids(const Tokens& tokens) const {
    std::vector<std::size_t> out;
    out.reserve(tokens.size());
    for (const auto& t : tokens) out.push_back(id(t));
    return out;
}

void Vocabulary::write(std::ostream& out) const {
    for (std::size_t i = 0; i < token_of_.size(); ++i) out << token_of_[i] << '\t' << i << '\n';
}

Vocabulary Vocabulary::read(std::istream& in) {
    Vocabulary v;
    std::string line;
    std::size_t expected = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto tab = line.rfind('\t');
        if (tab == std::string::npos) throw Error("vocabulary: malformed line '" + line + "'");
        const std::size_t id = std::stoul(line.substr(tab + 1));
        if (id != expected) throw Error("vocabulary: ids must be dense and ordered");
        std::string token = line.substr(0, tab);
        if (id == kUnkId) {
            if (token != kUnkToken) throw Error("vocabulary: id 0 must be the unknown-token placeholder");
        } else {
            if (v.id_of_.contains(token)) throw Error("vocabulary: duplicate token '" + token + "'");
            v.add(std::move(token));
        }
        ++expected;
    }
    return v;
}

void Vocabulary::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write vocabulary " + path.string());
    write(out);
}

Vocabulary Vocabulary::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot read vocabulary " + path.string());
    return read(in);
}

Vocabulary build_vocab(const std::vector<Tokens>& sequences, std::size_t min_count) {
    if (min_count == 0) throw Error("min_count must be at least 1");
    std::map<std::string, std::size_t> counts;
    for (const auto& seq : sequences)
        for (const auto& t : seq) ++counts[t];
    std::vector<std::pair<std::string, std::size_t>> kept;
    for (auto& [token, count] : counts) {
        if (count < min_count || token == Vocabulary::kUnkToken || token.empty()) continue;
        if (!is_placeholder(token) && is_stopword(token)) continue;
        kept.emplace_back(token, count);
    }
    std::stable_sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    Vocabulary v;
    v.min_count_ = min_count;
    for (auto& [token, _] : kept) v.add(token);
    return v;
}

}  // namespace ohc
