#include <doctest.h>

#include <httplib.h>
#include <json.hpp>

#include <thread>

#include "ohc/annotation_server.hpp"

using namespace ohc;
using nlohmann::json;

namespace {

Corpus small_corpus() {
    Corpus::Builder b;
    for (int i = 0; i < 3; ++i) {
        Post p;
        p.post_id = "p" + std::to_string(i);
        p.thread_id = "t1";
        p.forum_id = "f1";
        p.author_id = "a";
        p.created_at = parse_timestamp("2014-05-0" + std::to_string(i + 1) + "T10:00:00Z");
        p.text = "Started chemo today. Feeling tired.";
        b.add(std::move(p));
    }
    return std::move(b).build();
}

// Starts a server on an ephemeral port for the lifetime of the fixture.
struct Running {
    AnnotationServer server;
    std::thread thread;
    int port = -1;

    explicit Running(AnnotationStore& store) : server(store) {
        port = server.bind_any_port();
        REQUIRE(port > 0);
        thread = std::thread([this] { server.listen_after_bind(); });
        while (!server.running()) std::this_thread::yield();
    }
    ~Running() {
        server.stop();
        thread.join();
    }
    httplib::Client client() const { return httplib::Client("127.0.0.1", port); }
};

json body_of(const httplib::Result& r) {
    REQUIRE(r);
    return json::parse(r->body);
}

httplib::Result post_json(httplib::Client& c, const std::string& path, const json& body) {
    return c.Post(path, body.dump(), "application/json");
}

AnnotationOptions fixed_clock() {
    AnnotationOptions o;
    o.batch_size = 2;
    o.clock = [] { return Timestamp{1500000000}; };
    return o;
}

}  // namespace

TEST_CASE("schema and posts") {
    const auto corpus = small_corpus();
    AnnotationStore store(corpus, {}, fixed_clock());
    Running srv(store);
    auto c = srv.client();

    const auto schema = c.Get("/schema");
    REQUIRE(schema);
    CHECK(schema->status == 200);
    CHECK(schema->get_header_value("Content-Type").find("application/json") == 0);
    const auto labels = body_of(schema).at("labels");
    REQUIRE(labels.size() == TopicSchema::N);
    CHECK(labels[0].at("code") == "ALTR");
    CHECK(labels[10].at("code") == "TREA");

    const auto post = c.Get("/posts/p1");
    REQUIRE(post);
    CHECK(post->status == 200);
    const auto pj = body_of(post);
    CHECK(pj.at("post_id") == "p1");
    CHECK(pj.at("created_at") == "2014-05-02T10:00:00Z");
    REQUIRE(pj.at("sentences").size() == 2);
    CHECK(pj.at("sentences")[0].at("sentence_id") == make_sentence_id("p1", 0));
    CHECK(pj.at("sentences")[1].at("text") == "Feeling tired.");

    const auto missing = c.Get("/posts/nope");
    REQUIRE(missing);
    CHECK(missing->status == 404);
    CHECK(body_of(missing).at("code") == "not_found");

    const auto unknown = c.Get("/no/such/endpoint");
    REQUIRE(unknown);
    CHECK(unknown->status == 404);
    CHECK(body_of(unknown).at("code") == "not_found");
}

TEST_CASE("annotation workflow over HTTP") {
    const auto corpus = small_corpus();
    AnnotationStore store(corpus, {}, fixed_clock());
    Running srv(store);
    auto c = srv.client();

    const auto next = c.Get("/batches/next?coder=c1");
    REQUIRE(next);
    CHECK(next->status == 200);
    const auto batch = body_of(next);
    CHECK(batch.at("batch_id") == 0);
    CHECK(batch.at("post_ids") == json::array({"p0", "p1"}));
    CHECK(batch.at("status") == "open");
    CHECK(body_of(c.Get("/batches/next?coder=c2")).at("coders") == json::array({"c1", "c2"}));

    const auto no_coder = c.Get("/batches/next");
    REQUIRE(no_coder);
    CHECK(no_coder->status == 400);
    CHECK(body_of(no_coder).at("code") == "invalid");

    const std::vector<std::string> sentences{make_sentence_id("p0", 0), make_sentence_id("p0", 1),
                                             make_sentence_id("p1", 0), make_sentence_id("p1", 1)};
    for (const auto& s : sentences) {
        const auto r = post_json(c, "/annotations", {{"coder", "c1"}, {"sentence", s}, {"labels", {"TREA"}}});
        REQUIRE(r);
        CHECK(r->status == 200);
        CHECK(body_of(r).at("status") == "ok");
        post_json(c, "/annotations",
                  {{"coder", "c2"}, {"sentence", s}, {"labels", s == sentences[1] ? json{"TREA", "DAIL"} : json{"TREA"}}});
    }

    const auto empty = post_json(c, "/annotations", {{"coder", "c1"}, {"sentence", sentences[0]}, {"labels", json::array()}});
    REQUIRE(empty);
    CHECK(empty->status == 400);
    CHECK(body_of(empty).at("message") == "labels required");

    const auto bad_code = post_json(c, "/annotations", {{"coder", "c1"}, {"sentence", sentences[0]}, {"labels", {"NOPE"}}});
    REQUIRE(bad_code);
    CHECK(bad_code->status == 400);

    const auto stranger = post_json(c, "/annotations", {{"coder", "c9"}, {"sentence", sentences[0]}, {"labels", {"TREA"}}});
    REQUIRE(stranger);
    CHECK(stranger->status == 403);
    CHECK(body_of(stranger).at("code") == "forbidden");

    const auto garbage = c.Post("/annotations", "{not json", "application/json");
    REQUIRE(garbage);
    CHECK(garbage->status == 400);

    const auto queue = body_of(c.Get("/adjudication/queue")).at("items");
    REQUIRE(queue.size() == 4);
    CHECK(queue[0].at("sentence") == sentences[1]);
    CHECK(queue[0].at("disagreement") == true);
    CHECK(queue[0].at("labels_b") == json::array({"DAIL", "TREA"}));
    CHECK(queue[0].at("text") == "Feeling tired.");
    CHECK_FALSE(queue[0].contains("coder_a"));
    CHECK(queue[1].at("disagreement") == false);

    const auto agreement = c.Get("/agreement?batch=0");
    REQUIRE(agreement);
    CHECK(agreement->status == 200);
    const auto aj = body_of(agreement);
    CHECK(aj.at("sentences") == 4);
    CHECK(aj.at("per_label").size() == TopicSchema::N);
    CHECK(aj.at("per_label").at("TREA") == 1.0);
    CHECK(c.Get("/agreement?batch=x")->status == 400);
    CHECK(c.Get("/agreement?batch=5")->status == 404);
    CHECK(c.Get("/agreement")->status == 400);

    const auto adj = post_json(c, "/adjudication", {{"sentence", sentences[1]}, {"labels", {"DAIL"}}, {"adjudicator", "boss"}});
    REQUIRE(adj);
    CHECK(adj->status == 200);
    CHECK(body_of(adj).at("labels") == json::array({"DAIL"}));
    CHECK(body_of(adj).at("resolved_at") == format_timestamp(1500000000));
    CHECK(body_of(c.Get("/adjudication/queue")).at("items").size() == 3);

    const auto early = post_json(c, "/adjudication", {{"sentence", make_sentence_id("p2", 0)}, {"labels", {"DAIL"}}, {"adjudicator", "boss"}});
    REQUIRE(early);
    CHECK(early->status == 404);

    const auto status = body_of(c.Get("/coders/c1/status"));
    CHECK(status.at("passed") == true);
    CHECK(status.at("training_kappa").is_null());

    CHECK(body_of(c.Get("/batches/next?coder=c1")).at("batch_id") == 1);
    CHECK(body_of(c.Get("/batches/next?coder=c2")).at("batch_id") == 1);
    const auto exhausted = c.Get("/batches/next?coder=c3");
    REQUIRE(exhausted);
    CHECK(exhausted->status == 409);
    CHECK(body_of(exhausted).at("code") == "exhausted");
}

TEST_CASE("training gate over HTTP") {
    const auto corpus = small_corpus();
    const std::map<std::string, LabelSet> gold{{make_sentence_id("p2", 0), LabelSet{Topic::TREA}},
                                               {make_sentence_id("p2", 1), LabelSet{Topic::PERS}}};
    AnnotationStore store(corpus, gold, fixed_clock());
    Running srv(store);
    auto c = srv.client();

    const auto training = body_of(c.Get("/training")).at("sentences");
    REQUIRE(training.size() == 2);
    CHECK(training[1].at("text") == "Feeling tired.");

    const auto refused = c.Get("/batches/next?coder=new");
    REQUIRE(refused);
    CHECK(refused->status == 403);

    post_json(c, "/annotations", {{"coder", "new"}, {"sentence", make_sentence_id("p2", 0)}, {"labels", {"TREA"}}});
    auto status = body_of(c.Get("/coders/new/status"));
    CHECK(status.at("training_done") == 1);
    CHECK(status.at("training_total") == 2);
    CHECK(status.at("passed") == false);

    post_json(c, "/annotations", {{"coder", "new"}, {"sentence", make_sentence_id("p2", 1)}, {"labels", {"PERS"}}});
    status = body_of(c.Get("/coders/new/status"));
    CHECK(status.at("passed") == true);
    CHECK(status.at("training_kappa").at("average") == 1.0);
    CHECK(c.Get("/batches/next?coder=new")->status == 200);
}
