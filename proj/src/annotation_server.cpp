#include "ohc/annotation_server.hpp"

#include <httplib.h>
#include <json.hpp>

namespace ohc {

using nlohmann::json;

namespace {

int status_for(const std::string& code) {
    if (code == "invalid") return 400;
    if (code == "forbidden") return 403;
    if (code == "not_found") return 404;
    return 409;  // conflict, exhausted
}

void reply(httplib::Response& res, const json& body, int status = 200) {
    res.status = status;
    res.set_content(body.dump(), "application/json; charset=utf-8");
}

void reply_error(httplib::Response& res, const std::string& code, const std::string& message) {
    reply(res, json{{"code", code}, {"message", message}}, status_for(code));
}

json batch_json(const Batch& b) {
    return {{"batch_id", b.batch_id},
            {"post_ids", b.post_ids},
            {"coders", b.coders},
            {"status", batch_status_name(b.status)}};
}

json kappa_json(const KappaReport& k) {
    json per = json::object();
    for (std::size_t l = 0; l < k.per_label.size(); ++l) per[std::string(TopicSchema::code(l))] = k.per_label[l];
    return {{"average", k.average}, {"per_label", per}};
}

LabelSet labels_from_body(const json& body) {
    const auto& j = body.at("labels");
    if (!j.is_array()) throw AnnotationError("invalid", "labels must be an array of codes");
    try {
        return LabelSet::from_codes(j.get<std::vector<std::string>>());
    } catch (const AnnotationError&) {
        throw;
    } catch (const std::exception& e) {
        throw AnnotationError("invalid", e.what());
    }
}

std::string string_field(const json& body, const char* key) {
    if (!body.contains(key) || !body.at(key).is_string())
        throw AnnotationError("invalid", std::string(key) + " required");
    return body.at(key).get<std::string>();
}

std::string query(const httplib::Request& req, const char* key) {
    if (!req.has_param(key)) throw AnnotationError("invalid", std::string(key) + " parameter required");
    return req.get_param_value(key);
}

template <class F>
httplib::Server::Handler guarded(F f) {
    return [f](const httplib::Request& req, httplib::Response& res) {
        try {
            f(req, res);
        } catch (const AnnotationError& e) {
            reply_error(res, e.code(), e.what());
        } catch (const json::exception& e) {
            reply_error(res, "invalid", std::string("malformed request: ") + e.what());
        } catch (const std::exception& e) {
            reply_error(res, "invalid", e.what());
        }
    };
}

}  // namespace

struct AnnotationServer::Impl {
    AnnotationStore& store;
    httplib::Server server;

    explicit Impl(AnnotationStore& s) : store(s) { routes(); }

    void routes() {
        server.Get("/schema", guarded([](const httplib::Request&, httplib::Response& res) {
            json labels = json::array();
            for (std::size_t l = 0; l < TopicSchema::N; ++l)
                labels.push_back({{"code", TopicSchema::code(l)}, {"description", TopicSchema::descriptions[l]}});
            reply(res, json{{"labels", labels}});
        }));

        server.Get("/batches/next", guarded([this](const httplib::Request& req, httplib::Response& res) {
            reply(res, batch_json(store.assign_batch(query(req, "coder"))));
        }));

        server.Get(R"(/posts/([^/]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
            const std::string id = req.matches[1];
            const auto idx = store.corpus().post_index(id);
            if (!idx) throw AnnotationError("not_found", "no post " + id);
            const Post& p = store.corpus().posts()[*idx];
            json sentences = json::array();
            const auto range = store.corpus().sentences_of(*idx);
            for (std::size_t i = 0; i < range.count; ++i) {
                const Sentence& s = store.corpus().sentences()[range.first + i];
                sentences.push_back({{"sentence_id", s.sentence_id}, {"text", s.text}});
            }
            reply(res, json{{"post_id", p.post_id},
                            {"thread_id", p.thread_id},
                            {"forum_id", p.forum_id},
                            {"created_at", format_timestamp(p.created_at)},
                            {"text", p.text},
                            {"sentences", sentences}});
        }));

        server.Post("/annotations", guarded([this](const httplib::Request& req, httplib::Response& res) {
            const json body = json::parse(req.body);
            const auto coder = string_field(body, "coder");
            const auto sentence = string_field(body, "sentence");
            const auto labels = labels_from_body(body);
            store.submit_annotation(coder, sentence, labels);
            reply(res, json{{"status", "ok"}, {"coder", coder}, {"sentence", sentence}, {"labels", labels.codes()}});
        }));

        server.Get(R"(/coders/([^/]+)/status)", guarded([this](const httplib::Request& req, httplib::Response& res) {
            const auto s = store.coder_status(req.matches[1]);
            reply(res, json{{"coder", s.coder_id},
                            {"passed", s.passed},
                            {"training_done", s.training_done},
                            {"training_total", s.training_total},
                            {"training_kappa", s.training_kappa ? kappa_json(*s.training_kappa) : json(nullptr)}});
        }));

        server.Get("/training", guarded([this](const httplib::Request&, httplib::Response& res) {
            json items = json::array();
            for (const auto& id : store.training_sentences()) {
                const Sentence* s = store.corpus().find_sentence(id);
                items.push_back({{"sentence_id", id}, {"text", s ? json(s->text) : json(nullptr)}});
            }
            reply(res, json{{"sentences", items}});
        }));

        server.Get("/adjudication/queue", guarded([this](const httplib::Request&, httplib::Response& res) {
            json items = json::array();
            for (const auto& q : store.adjudication_queue()) {
                const Sentence* s = store.corpus().find_sentence(q.sentence_id);
                items.push_back({{"sentence", q.sentence_id},
                                 {"text", s ? s->text : std::string()},
                                 {"batch", q.batch_id},
                                 {"labels_a", q.first.codes()},
                                 {"labels_b", q.second.codes()},
                                 {"disagreement", q.disagreement}});
            }
            reply(res, json{{"items", items}});
        }));

        server.Post("/adjudication", guarded([this](const httplib::Request& req, httplib::Response& res) {
            const json body = json::parse(req.body);
            const auto a = store.adjudicate(string_field(body, "sentence"), labels_from_body(body),
                                            string_field(body, "adjudicator"));
            reply(res, json{{"sentence", a.sentence_id},
                            {"labels", a.labels.codes()},
                            {"adjudicator", a.adjudicator_id},
                            {"resolved_at", format_timestamp(a.resolved_at)}});
        }));

        server.Get("/agreement", guarded([this](const httplib::Request& req, httplib::Response& res) {
            const std::string text = query(req, "batch");
            std::size_t used = 0;
            std::size_t id = 0;
            try {
                id = std::stoul(text, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used == 0 || used != text.size()) throw AnnotationError("invalid", "batch must be a number");
            const auto a = store.agreement(id);
            json body = kappa_json(a.kappa);
            body["batch"] = a.batch_id;
            body["sentences"] = a.sentences;
            reply(res, body);
        }));

        server.set_error_handler([](const httplib::Request&, httplib::Response& res) {
            if (res.status == 404 && res.body.empty()) reply_error(res, "not_found", "no such endpoint");
        });
    }
};

AnnotationServer::AnnotationServer(AnnotationStore& store) : impl_(std::make_unique<Impl>(store)) {}
AnnotationServer::~AnnotationServer() { stop(); }

int AnnotationServer::bind_any_port(const std::string& host) { return impl_->server.bind_to_any_port(host); }
bool AnnotationServer::bind(const std::string& host, int port) { return impl_->server.bind_to_port(host, port); }
bool AnnotationServer::listen_after_bind() { return impl_->server.listen_after_bind(); }
void AnnotationServer::stop() {
    if (impl_) impl_->server.stop();
}
bool AnnotationServer::running() const { return impl_->server.is_running(); }

}  // namespace ohc
