#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ohc {

/// Error raised by every module for contract violations and bad input.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The fixed topic inventory. Order is the serialization order.
enum class Topic : std::uint8_t {
    ALTR = 0,
    DAIL,
    DIAG,
    FIND,
    HSYS,
    MISC,
    NUTR,
    PERS,
    RSRC,
    TEST,
    TREA,
};

struct TopicSchema {
    static constexpr std::size_t N = 11;

    static constexpr std::array<std::string_view, N> codes{
        "ALTR", "DAIL", "DIAG", "FIND", "HSYS", "MISC",
        "NUTR", "PERS", "RSRC", "TEST", "TREA"};

    static constexpr std::array<std::string_view, N> descriptions{
        "alternative and integrative medicine",
        "daily cancer-related experience",
        "diagnoses, measurements, and results of tests",
        "health finding, sign, symptom or side effect",
        "health systems patients interact with, including nurses, doctors, "
        "practices, hospitals, and insurance companies",
        "greetings, uninformative sentence, or any sentence which does not "
        "fit under any other label",
        "nutrition",
        "personal information",
        "link, pointer, or quote towards an external information resource",
        "testing procedures (but not results of tests)",
        "treatments, including procedures, medications and therapeutic devices"};

    static constexpr std::size_t index(Topic t) { return static_cast<std::size_t>(t); }
    static constexpr std::string_view code(std::size_t i) { return codes.at(i); }

    static std::optional<std::size_t> find(std::string_view code);
    /// Throws Error on an unknown code.
    static std::size_t parse(std::string_view code);
};

/// Multi-label set over at most 16 labels. Models that are generic in the
/// number of labels (synthetic benchmarks use fewer than 11) share this type.
class LabelSet {
public:
    static constexpr std::size_t kCapacity = 16;

    constexpr LabelSet() = default;
    constexpr explicit LabelSet(std::uint16_t mask) : mask_(mask) {}
    LabelSet(std::initializer_list<Topic> topics) {
        for (Topic t : topics) insert(TopicSchema::index(t));
    }

    static LabelSet full(std::size_t n = TopicSchema::N) {
        return LabelSet(static_cast<std::uint16_t>((1u << n) - 1u));
    }
    static LabelSet of_indices(const std::vector<std::size_t>& idx) {
        LabelSet s;
        for (auto i : idx) s.insert(i);
        return s;
    }

    constexpr bool contains(std::size_t i) const { return (mask_ >> i) & 1u; }
    bool contains(Topic t) const { return contains(TopicSchema::index(t)); }
    void insert(std::size_t i) {
        if (i >= kCapacity) throw Error("label index out of range");
        mask_ = static_cast<std::uint16_t>(mask_ | (1u << i));
    }
    void insert(Topic t) { insert(TopicSchema::index(t)); }
    void erase(std::size_t i) { mask_ = static_cast<std::uint16_t>(mask_ & ~(1u << i)); }

    constexpr bool empty() const { return mask_ == 0; }
    int size() const { return __builtin_popcount(mask_); }
    constexpr std::uint16_t mask() const { return mask_; }
    std::vector<std::size_t> indices() const;

    /// Codes in schema order, e.g. {"DIAG","TEST"}.
    std::vector<std::string> codes() const;
    static LabelSet from_codes(const std::vector<std::string>& codes);

    friend constexpr bool operator==(LabelSet a, LabelSet b) = default;
    friend constexpr LabelSet operator|(LabelSet a, LabelSet b) {
        return LabelSet(static_cast<std::uint16_t>(a.mask_ | b.mask_));
    }
    friend constexpr LabelSet operator&(LabelSet a, LabelSet b) {
        return LabelSet(static_cast<std::uint16_t>(a.mask_ & b.mask_));
    }

private:
    std::uint16_t mask_ = 0;
};

/// "%.9g" formatting used by every text artifact.
std::string format_real(double v);

}  // namespace ohc
