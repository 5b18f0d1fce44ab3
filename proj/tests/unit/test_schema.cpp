#include <doctest.h>

#include <set>

#include "ohc/schema.hpp"

using namespace ohc;

TEST_CASE("schema has eleven unique codes in a fixed order") {
    CHECK(TopicSchema::N == 11);
    std::set<std::string_view> unique(TopicSchema::codes.begin(), TopicSchema::codes.end());
    CHECK(unique.size() == 11);
    CHECK(TopicSchema::code(0) == "ALTR");
    CHECK(TopicSchema::code(5) == "MISC");
    CHECK(TopicSchema::code(10) == "TREA");
    for (std::size_t i = 0; i < TopicSchema::N; ++i) CHECK(TopicSchema::parse(TopicSchema::code(i)) == i);
}

TEST_CASE("unknown codes are rejected") {
    CHECK_FALSE(TopicSchema::find("diag").has_value());
    CHECK_THROWS_AS(TopicSchema::parse("XXXX"), Error);
}

TEST_CASE("label sets round-trip through codes in schema order") {
    const LabelSet s = LabelSet::from_codes({"TEST", "DIAG"});
    CHECK(s.size() == 2);
    CHECK(s.codes() == std::vector<std::string>{"DIAG", "TEST"});
    CHECK(LabelSet::from_codes(s.codes()) == s);
    CHECK(LabelSet::full().size() == 11);
    CHECK((LabelSet{Topic::DIAG} | LabelSet{Topic::TEST}) == s);
    CHECK((s & LabelSet{Topic::TEST}) == LabelSet{Topic::TEST});
}

TEST_CASE("label index beyond capacity throws") {
    LabelSet s;
    CHECK_THROWS_AS(s.insert(LabelSet::kCapacity), Error);
    s.insert(12);  // synthetic label spaces may exceed the schema
    CHECK(s.contains(12));
    CHECK_THROWS_AS(s.codes(), Error);
}

TEST_CASE("reals use nine significant digits") {
    CHECK(format_real(0.1) == "0.1");
    CHECK(format_real(1.0 / 3.0) == "0.333333333");
    CHECK(format_real(2.0) == "2");
}
