#include "ohc/schema.hpp"

#include <cstdio>

namespace ohc {

std::optional<std::size_t> TopicSchema::find(std::string_view code) {
    for (std::size_t i = 0; i < N; ++i)
        if (codes[i] == code) return i;
    return std::nullopt;
}

std::size_t TopicSchema::parse(std::string_view code) {
    auto i = find(code);
    if (!i) throw Error("unknown label code '" + std::string(code) + "'");
    return *i;
}

std::vector<std::size_t> LabelSet::indices() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < kCapacity; ++i)
        if (contains(i)) out.push_back(i);
    return out;
}

std::vector<std::string> LabelSet::codes() const {
    std::vector<std::string> out;
    for (auto i : indices()) {
        if (i >= TopicSchema::N) throw Error("label index has no schema code");
        out.emplace_back(TopicSchema::code(i));
    }
    return out;
}

LabelSet LabelSet::from_codes(const std::vector<std::string>& codes) {
    LabelSet s;
    for (const auto& c : codes) s.insert(TopicSchema::parse(c));
    return s;
}

std::string format_real(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

}  // namespace ohc
