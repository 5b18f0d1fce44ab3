#include <doctest.h>

#include <filesystem>
#include <sstream>

#include "ohc/corpus.hpp"

using namespace ohc;
namespace fs = std::filesystem;

namespace {

std::string record(const std::string& id, const std::string& author, const std::string& at, const std::string& text,
                   const std::string& signature = "") {
    std::string s = R"({"post_id":")" + id + R"(","thread_id":"t1","forum_id":"f1","author_id":")" + author +
                    R"(","created_at":")" + at + R"(","text":")" + text + "\"";
    if (!signature.empty()) s += R"(,"signature":")" + signature + "\"";
    return s + "}\n";
}

}  // namespace

TEST_CASE("one record with two sentences") {
    std::istringstream in(record("p1", "u1", "2014-01-01T00:00:00Z", "Hi. Thanks."));
    const auto r = ingest_posts(in);
    CHECK(r.corpus.posts().size() == 1);
    REQUIRE(r.corpus.sentences().size() == 2);
    CHECK(r.corpus.sentences()[0].text == "Hi.");
    CHECK(r.corpus.sentences()[1].sentence_id == "p1:1");
    CHECK(r.corpus.sentences()[1].index == 1);
}

TEST_CASE("empty input gives an empty corpus") {
    std::istringstream in("");
    const auto r = ingest_posts(in);
    CHECK(r.corpus.empty());
    CHECK(r.stats.accepted == 0);
}

TEST_CASE("first activity is the earliest post") {
    std::istringstream in(record("p2", "u1", "2014-01-06T00:00:00Z", "Later.") +
                          record("p1", "u1", "2014-01-01T00:00:00Z", "First.") +
                          record("p3", "u1", "2014-01-10T00:00:00Z", "Last."));
    const auto r = ingest_posts(in);
    CHECK(r.corpus.authors().at("u1").first_activity == parse_timestamp("2014-01-01T00:00:00Z"));
    CHECK(r.corpus.authors().at("u1").post_count == 3);
}

TEST_CASE("duplicates and malformed lines are counted and skipped") {
    std::istringstream in(record("p1", "u1", "2014-01-01T00:00:00Z", "Kept.") + "{not json\n" +
                          record("p1", "u2", "2014-01-02T00:00:00Z", "Dropped.") + "\n" +
                          R"({"post_id":"p9","text":"missing fields"})" + "\n");
    const auto r = ingest_posts(in);
    CHECK(r.stats.accepted == 1);
    CHECK(r.stats.duplicates == 1);
    CHECK(r.stats.malformed == 2);
    CHECK(r.corpus.posts().front().author_id == "u1");
}

TEST_CASE("missing input file is an error") {
    CHECK_THROWS_AS(ingest_posts_file("/nonexistent/posts.jsonl"), Error);
}

TEST_CASE("sentence splitting") {
    CHECK(split_sentences("Hope this helps, cheers") == std::vector<std::string>{"Hope this helps, cheers"});
    CHECK(split_sentences("").empty());
    CHECK(split_sentences("   \n\t ").empty());
    CHECK(split_sentences("When I went in for my second mammogram on Dec. 18th, the radiologist told me I had to go "
                          "get a biopsy.")
              .size() == 1);
    CHECK(split_sentences("Dr. Smith is great! Is she? Yes.").size() == 3);
    CHECK(split_sentences("My tumor was 1.2 inches. It was removed.").size() == 2);
    CHECK(split_sentences("see www.cancer.org for more").size() == 1);
    CHECK(split_sentences("It was 2 cm. Then surgery.").size() == 1);  // "cm." is a listed abbreviation
}

TEST_CASE("stage parsing") {
    CHECK(parse_stage("Dx 3/2010, Stage IIA, ER+") == CancerStage::StageII);
    CHECK(parse_stage("no disease info") == CancerStage::Unknown);
    CHECK(parse_stage("stage iv since 2012") == CancerStage::StageIV);
    CHECK(parse_stage("STAGE 0 DCIS") == CancerStage::Stage0);
    CHECK(parse_stage("stage IIIb, then stage I") == CancerStage::StageIII);
    CHECK(parse_stage("stage 3") == CancerStage::StageIII);
    CHECK(parse_stage("backstage pass") == CancerStage::Unknown);
    for (auto s : {CancerStage::Stage0, CancerStage::StageI, CancerStage::StageII, CancerStage::StageIII,
                   CancerStage::StageIV, CancerStage::Unknown})
        CHECK(stage_from_name(stage_name(s)) == s);
}

TEST_CASE("author stage comes from signatures") {
    std::istringstream in(record("p1", "u1", "2014-01-01T00:00:00Z", "One.") +
                          record("p2", "u1", "2014-01-02T00:00:00Z", "Two.", "Stage IIIA, mastectomy") +
                          record("p3", "u2", "2014-01-02T00:00:00Z", "Three."));
    const auto r = ingest_posts(in);
    CHECK(r.corpus.authors().at("u1").stage == CancerStage::StageIII);
    CHECK(r.corpus.authors().at("u2").stage == CancerStage::Unknown);
}

TEST_CASE("timestamps") {
    CHECK(parse_timestamp("1970-01-02T00:00:00Z") == 86400);
    CHECK(parse_timestamp("2014-03-02 10:15:00") == parse_timestamp("2014-03-02T10:15:00Z"));
    CHECK(parse_timestamp("2014-03-02T10:15:00-05:00") == parse_timestamp("2014-03-02T15:15:00Z"));
    CHECK(parse_timestamp("2014-03-02") == parse_timestamp("2014-03-02T00:00:00Z"));
    CHECK(format_timestamp(parse_timestamp("2016-02-29T23:59:59Z")) == "2016-02-29T23:59:59Z");
    CHECK_THROWS_AS(parse_timestamp("2014-13-01T00:00:00Z"), Error);
    CHECK_THROWS_AS(parse_timestamp("yesterday"), Error);
}

TEST_CASE("emoticons become codes") {
    CHECK(substitute_emoticons("great news :) thanks") == "great news EMO_POS thanks");
    CHECK(substitute_emoticons("ugh :( again") == "ugh EMO_NEG again");
}

TEST_CASE("archive round trip reproduces the corpus") {
    const auto r = ingest_posts_file(fs::path(OHC_FIXTURES) / "posts.jsonl");
    const fs::path dir = fs::temp_directory_path() / "ohc-test-corpus-archive";
    fs::remove_all(dir);
    write_corpus_archive(r.corpus, dir);
    const Corpus back = read_corpus_archive(dir);
    CHECK(back == r.corpus);
    std::size_t total = 0;
    for (std::size_t p = 0; p < back.posts().size(); ++p) {
        const auto range = back.sentences_of(p);
        CHECK(range.count >= 1);
        for (std::size_t i = 0; i < range.count; ++i)
            CHECK(back.sentences()[range.first + i].index == i);
        total += range.count;
    }
    CHECK(total == back.sentences().size());

    // Re-ingesting the archived posts gives the same corpus.
    const auto again = ingest_posts_file(dir / "posts.jsonl");
    CHECK(again.corpus == r.corpus);
    fs::remove_all(dir);
}
