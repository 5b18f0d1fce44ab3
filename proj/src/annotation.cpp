#include "ohc/annotation.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <istream>
#include <ostream>

#include <json.hpp>

namespace ohc {

using nlohmann::json;
namespace fs = std::filesystem;

std::string_view batch_status_name(BatchStatus s) {
    switch (s) {
        case BatchStatus::Open: return "open";
        case BatchStatus::Complete: return "complete";
        case BatchStatus::Adjudicated: return "adjudicated";
    }
    return "";
}

namespace {

BatchStatus batch_status_from(std::string_view s) {
    if (s == "open") return BatchStatus::Open;
    if (s == "complete") return BatchStatus::Complete;
    if (s == "adjudicated") return BatchStatus::Adjudicated;
    throw Error("unknown batch status '" + std::string(s) + "'");
}

json labels_json(LabelSet s) { return s.codes(); }
LabelSet labels_from(const json& j) { return LabelSet::from_codes(j.get<std::vector<std::string>>()); }

json versions_json(const std::vector<LabelVersion>& h) {
    json out = json::array();
    for (const auto& v : h) out.push_back({{"labels", labels_json(v.labels)}, {"at", v.at}});
    return out;
}

std::vector<LabelVersion> versions_from(const json& j) {
    std::vector<LabelVersion> out;
    for (const auto& v : j) out.push_back({labels_from(v.at("labels")), v.at("at").get<Timestamp>()});
    return out;
}

json record_json(const AnnotationRecord& r) {
    return {{"sentence", r.sentence_id},
            {"coder", r.coder_id},
            {"labels", labels_json(r.labels)},
            {"at", r.submitted_at},
            {"history", versions_json(r.history)}};
}

AnnotationRecord record_from(const json& j) {
    return {j.at("sentence").get<std::string>(), j.at("coder").get<std::string>(), labels_from(j.at("labels")),
            j.at("at").get<Timestamp>(), versions_from(j.at("history"))};
}

void upsert(AnnotationRecord& r, LabelSet labels, Timestamp at) {
    r.history.push_back({r.labels, r.submitted_at});
    r.labels = labels;
    r.submitted_at = at;
}

fs::path snapshot_path(const fs::path& log) { return fs::path(log.string() + ".snapshot.json"); }

void write_atomic(const fs::path& path, const std::string& text) {
    const fs::path tmp = fs::path(path.string() + ".tmp");
    {
        std::ofstream out(tmp, std::ios::binary);
        out << text << '\n';
        if (!out) throw Error("cannot write " + tmp.string());
    }
    fs::rename(tmp, path);
}

void validate_labels(LabelSet labels) {
    if (labels.empty()) throw AnnotationError("invalid", "labels required");
    if ((labels & LabelSet::full()) != labels) throw AnnotationError("invalid", "label outside the schema");
}

void require_id(const std::string& id, const char* what) {
    if (id.empty()) throw AnnotationError("invalid", std::string(what) + " required");
}

}  // namespace

AnnotationStore::AnnotationStore(const Corpus& corpus, std::map<std::string, LabelSet> training_gold,
                                 AnnotationOptions options)
    : corpus_(corpus), training_gold_(std::move(training_gold)), options_(std::move(options)) {
    if (options_.batch_size == 0) throw Error("batch size must be positive");
    if (!options_.clock)
        options_.clock = [] {
            return std::chrono::duration_cast<std::chrono::seconds>(
                       std::chrono::system_clock::now().time_since_epoch())
                .count();
        };
    load();
}

void AnnotationStore::load() {
    if (options_.log_path.empty()) return;
    const fs::path snap = snapshot_path(options_.log_path);
    if (fs::exists(snap)) {
        std::ifstream in(snap);
        const json s = json::parse(in);
        seq_ = s.at("seq").get<std::size_t>();
        next_post_ = s.at("next_post").get<std::size_t>();
        for (const auto& b : s.at("batches")) {
            Batch batch{b.at("id").get<std::size_t>(), b.at("posts").get<std::vector<std::string>>(),
                        b.at("coders").get<std::vector<std::string>>(),
                        batch_status_from(b.at("status").get<std::string>())};
            for (const auto& p : batch.post_ids) post_batch_[p] = batch.batch_id;
            batches_.push_back(std::move(batch));
        }
        for (const auto& r : s.at("records")) {
            auto rec = record_from(r);
            records_[{rec.sentence_id, rec.coder_id}] = std::move(rec);
        }
        for (const auto& r : s.at("training")) {
            auto rec = record_from(r);
            training_records_[{rec.sentence_id, rec.coder_id}] = std::move(rec);
        }
        for (const auto& a : s.at("adjudications")) {
            Adjudication adj{a.at("sentence").get<std::string>(), labels_from(a.at("labels")),
                             a.at("adjudicator").get<std::string>(), a.at("at").get<Timestamp>(),
                             versions_from(a.at("history"))};
            adjudications_[adj.sentence_id] = std::move(adj);
        }
        for (const auto& c : s.at("passed")) passed_.insert(c.get<std::string>());
    }
    std::ifstream log(options_.log_path);
    std::string line;
    while (std::getline(log, line)) {
        if (line.empty()) continue;
        const auto seq = json::parse(line).at("seq").get<std::size_t>();
        if (seq <= seq_) continue;
        if (seq != seq_ + 1) throw Error("annotation log: gap before event " + std::to_string(seq));
        apply(line);
    }
}

void AnnotationStore::commit(const std::string& event_json) {
    if (!options_.log_path.empty()) {
        if (options_.log_path.has_parent_path()) fs::create_directories(options_.log_path.parent_path());
        std::ofstream out(options_.log_path, std::ios::app | std::ios::binary);
        out << event_json << '\n';
        out.flush();
        if (!out) throw Error("annotation log: cannot append to " + options_.log_path.string());
    }
    apply(event_json);
    if (!options_.log_path.empty() && options_.snapshot_interval > 0 && seq_ % options_.snapshot_interval == 0) {
        write_atomic(snapshot_path(options_.log_path), snapshot_unlocked());
    }
}

void AnnotationStore::apply(const std::string& event_json) {
    const json e = json::parse(event_json);
    seq_ = e.at("seq").get<std::size_t>();
    const auto type = e.at("type").get<std::string>();
    if (type == "assign") {
        const auto id = e.at("batch").get<std::size_t>();
        if (e.contains("posts")) {
            Batch b;
            b.batch_id = id;
            b.post_ids = e.at("posts").get<std::vector<std::string>>();
            for (const auto& p : b.post_ids) post_batch_[p] = id;
            next_post_ += b.post_ids.size();
            batches_.push_back(std::move(b));
        }
        batches_.at(id).coders.push_back(e.at("coder").get<std::string>());
        refresh_batch(id);
    } else if (type == "submit") {
        const auto sentence = e.at("sentence").get<std::string>();
        const auto coder = e.at("coder").get<std::string>();
        const auto labels = labels_from(e.at("labels"));
        const auto at = e.at("at").get<Timestamp>();
        auto& target = e.at("training").get<bool>() ? training_records_ : records_;
        auto it = target.find({sentence, coder});
        if (it == target.end())
            target[{sentence, coder}] = AnnotationRecord{sentence, coder, labels, at, {}};
        else
            upsert(it->second, labels, at);
        if (auto b = batch_of_sentence(sentence)) refresh_batch(*b);
    } else if (type == "gate") {
        passed_.insert(e.at("coder").get<std::string>());
    } else if (type == "adjudicate") {
        const auto sentence = e.at("sentence").get<std::string>();
        const auto labels = labels_from(e.at("labels"));
        const auto adjudicator = e.at("adjudicator").get<std::string>();
        const auto at = e.at("at").get<Timestamp>();
        auto it = adjudications_.find(sentence);
        if (it == adjudications_.end()) {
            adjudications_[sentence] = Adjudication{sentence, labels, adjudicator, at, {}};
        } else {
            it->second.history.push_back({it->second.labels, it->second.resolved_at});
            it->second.labels = labels;
            it->second.adjudicator_id = adjudicator;
            it->second.resolved_at = at;
        }
        if (auto b = batch_of_sentence(sentence)) refresh_batch(*b);
    } else {
        throw Error("annotation log: unknown event type '" + type + "'");
    }
}

std::vector<std::string> AnnotationStore::batch_sentences(const Batch& b) const {
    std::vector<std::string> out;
    for (const auto& p : b.post_ids) {
        const auto idx = corpus_.post_index(p);
        if (!idx) continue;
        const auto range = corpus_.sentences_of(*idx);
        for (std::size_t i = 0; i < range.count; ++i) out.push_back(corpus_.sentences()[range.first + i].sentence_id);
    }
    return out;
}

std::optional<std::size_t> AnnotationStore::batch_of_sentence(const std::string& sentence_id) const {
    const Sentence* s = corpus_.find_sentence(sentence_id);
    if (!s) return std::nullopt;
    const auto it = post_batch_.find(s->post_id);
    if (it == post_batch_.end()) return std::nullopt;
    return it->second;
}

void AnnotationStore::refresh_batch(std::size_t batch_id) {
    Batch& b = batches_.at(batch_id);
    if (b.coders.size() < 2) return;
    const auto sentences = batch_sentences(b);
    auto covered = [&](const std::string& coder) {
        return std::all_of(sentences.begin(), sentences.end(),
                           [&](const std::string& s) { return records_.count({s, coder}) > 0; });
    };
    if (b.status == BatchStatus::Open && covered(b.coders[0]) && covered(b.coders[1])) b.status = BatchStatus::Complete;
    if (b.status == BatchStatus::Complete &&
        std::all_of(sentences.begin(), sentences.end(),
                    [&](const std::string& s) { return adjudications_.count(s) > 0; }))
        b.status = BatchStatus::Adjudicated;
}

Batch AnnotationStore::assign_batch(const std::string& coder_id) {
    require_id(coder_id, "coder");
    std::lock_guard lock(mutex_);
    if (!training_gold_.empty() && !passed_.count(coder_id))
        throw AnnotationError("forbidden", "coder " + coder_id + " has not passed the training gate");
    json e{{"seq", seq_ + 1}, {"type", "assign"}, {"coder", coder_id}};
    std::optional<std::size_t> chosen;
    for (const auto& b : batches_) {
        if (b.coders.size() < 2 && std::find(b.coders.begin(), b.coders.end(), coder_id) == b.coders.end()) {
            chosen = b.batch_id;
            break;
        }
    }
    if (!chosen) {
        const auto& posts = corpus_.posts();
        if (next_post_ >= posts.size()) throw AnnotationError("exhausted", "exhausted: no unassigned posts left");
        const std::size_t end = std::min(posts.size(), next_post_ + options_.batch_size);
        std::vector<std::string> ids;
        for (std::size_t i = next_post_; i < end; ++i) ids.push_back(posts[i].post_id);
        chosen = batches_.size();
        e["posts"] = ids;
    }
    e["batch"] = *chosen;
    commit(e.dump());
    return batches_.at(*chosen);
}

void AnnotationStore::submit_annotation(const std::string& coder_id, const std::string& sentence_id, LabelSet labels) {
    require_id(coder_id, "coder");
    require_id(sentence_id, "sentence");
    validate_labels(labels);
    std::lock_guard lock(mutex_);
    bool training = false;
    const auto batch = batch_of_sentence(sentence_id);
    const bool assigned = batch && std::find(batches_[*batch].coders.begin(), batches_[*batch].coders.end(),
                                             coder_id) != batches_[*batch].coders.end();
    if (!assigned) {
        if (!training_gold_.count(sentence_id))
            throw AnnotationError("forbidden", "sentence " + sentence_id + " is not assigned to coder " + coder_id);
        training = true;
    }
    const json e{{"seq", seq_ + 1},     {"type", "submit"},       {"coder", coder_id}, {"sentence", sentence_id},
                 {"labels", labels_json(labels)}, {"at", options_.clock()}, {"training", training}};
    commit(e.dump());
    if (training && !passed_.count(coder_id)) {
        const auto kappa = training_kappa(coder_id);
        if (kappa && kappa->average >= options_.gate_threshold)
            commit(json{{"seq", seq_ + 1}, {"type", "gate"}, {"coder", coder_id}}.dump());
    }
}

std::optional<KappaReport> AnnotationStore::training_kappa(const std::string& coder_id) const {
    if (training_gold_.empty()) return std::nullopt;
    std::vector<LabelSet> gold, coded;
    for (const auto& [sid, labels] : training_gold_) {
        const auto it = training_records_.find({sid, coder_id});
        if (it == training_records_.end()) return std::nullopt;
        gold.push_back(labels);
        coded.push_back(it->second.labels);
    }
    return kappa_report(gold, coded);
}

CoderStatus AnnotationStore::status_unlocked(const std::string& coder_id) const {
    CoderStatus s;
    s.coder_id = coder_id;
    s.training_total = training_gold_.size();
    for (const auto& [sid, _] : training_gold_) s.training_done += training_records_.count({sid, coder_id});
    s.training_kappa = training_kappa(coder_id);
    s.passed = training_gold_.empty() || passed_.count(coder_id) > 0;
    return s;
}

CoderStatus AnnotationStore::training_gate(const std::string& coder_id) {
    require_id(coder_id, "coder");
    std::lock_guard lock(mutex_);
    if (training_gold_.empty()) return status_unlocked(coder_id);
    const auto kappa = training_kappa(coder_id);
    if (!kappa) throw AnnotationError("conflict", "training annotations incomplete for coder " + coder_id);
    if (!passed_.count(coder_id) && kappa->average >= options_.gate_threshold)
        commit(json{{"seq", seq_ + 1}, {"type", "gate"}, {"coder", coder_id}}.dump());
    return status_unlocked(coder_id);
}

CoderStatus AnnotationStore::coder_status(const std::string& coder_id) const {
    std::lock_guard lock(mutex_);
    return status_unlocked(coder_id);
}

std::vector<QueueItem> AnnotationStore::adjudication_queue() const {
    std::lock_guard lock(mutex_);
    std::vector<QueueItem> disagree, agree;
    for (const auto& b : batches_) {
        if (b.status != BatchStatus::Complete) continue;
        for (const auto& s : batch_sentences(b)) {
            if (adjudications_.count(s)) continue;
            QueueItem item{s, b.batch_id, records_.at({s, b.coders[0]}).labels, records_.at({s, b.coders[1]}).labels,
                           false};
            item.disagreement = item.first != item.second;
            (item.disagreement ? disagree : agree).push_back(std::move(item));
        }
    }
    disagree.insert(disagree.end(), agree.begin(), agree.end());
    return disagree;
}

Adjudication AnnotationStore::adjudicate(const std::string& sentence_id, LabelSet labels,
                                         const std::string& adjudicator_id) {
    require_id(sentence_id, "sentence");
    require_id(adjudicator_id, "adjudicator");
    validate_labels(labels);
    std::lock_guard lock(mutex_);
    const auto batch = batch_of_sentence(sentence_id);
    if (!batch) throw AnnotationError("not_found", "sentence " + sentence_id + " is not in any batch");
    const Batch& b = batches_[*batch];
    if (b.coders.size() < 2 || !records_.count({sentence_id, b.coders[0]}) ||
        !records_.count({sentence_id, b.coders[1]}))
        throw AnnotationError("conflict", "sentence " + sentence_id + " lacks two coder records");
    const json e{{"seq", seq_ + 1},
                 {"type", "adjudicate"},
                 {"sentence", sentence_id},
                 {"labels", labels_json(labels)},
                 {"adjudicator", adjudicator_id},
                 {"at", options_.clock()}};
    commit(e.dump());
    return adjudications_.at(sentence_id);
}

BatchAgreement AnnotationStore::agreement(std::size_t batch_id) const {
    std::lock_guard lock(mutex_);
    if (batch_id >= batches_.size()) throw AnnotationError("not_found", "no batch " + std::to_string(batch_id));
    const Batch& b = batches_[batch_id];
    if (b.coders.size() < 2) throw AnnotationError("conflict", "batch has fewer than two coders");
    std::vector<LabelSet> first, second;
    for (const auto& s : batch_sentences(b)) {
        const auto a = records_.find({s, b.coders[0]});
        const auto c = records_.find({s, b.coders[1]});
        if (a == records_.end() || c == records_.end()) continue;
        first.push_back(a->second.labels);
        second.push_back(c->second.labels);
    }
    if (first.empty()) throw AnnotationError("conflict", "no sentence of the batch is coded by both coders");
    return {batch_id, first.size(), kappa_report(first, second)};
}

std::vector<Batch> AnnotationStore::batches() const {
    std::lock_guard lock(mutex_);
    return batches_;
}

std::optional<AnnotationRecord> AnnotationStore::record(const std::string& sentence_id,
                                                        const std::string& coder_id) const {
    std::lock_guard lock(mutex_);
    const auto it = records_.find({sentence_id, coder_id});
    if (it == records_.end()) return std::nullopt;
    return it->second;
}

std::optional<Adjudication> AnnotationStore::adjudication(const std::string& sentence_id) const {
    std::lock_guard lock(mutex_);
    const auto it = adjudications_.find(sentence_id);
    if (it == adjudications_.end()) return std::nullopt;
    return it->second;
}

std::map<std::string, LabelSet> AnnotationStore::adjudicated_labels() const {
    std::lock_guard lock(mutex_);
    std::map<std::string, LabelSet> out;
    for (const auto& [id, a] : adjudications_) out[id] = a.labels;
    return out;
}

std::vector<std::string> AnnotationStore::training_sentences() const {
    std::vector<std::string> out;
    for (const auto& [sid, _] : training_gold_) out.push_back(sid);
    return out;
}

std::size_t AnnotationStore::event_count() const {
    std::lock_guard lock(mutex_);
    return seq_;
}

std::string AnnotationStore::snapshot_unlocked() const {
    json s;
    s["seq"] = seq_;
    s["next_post"] = next_post_;
    s["batches"] = json::array();
    for (const auto& b : batches_)
        s["batches"].push_back({{"id", b.batch_id},
                                {"posts", b.post_ids},
                                {"coders", b.coders},
                                {"status", batch_status_name(b.status)}});
    s["records"] = json::array();
    for (const auto& [_, r] : records_) s["records"].push_back(record_json(r));
    s["training"] = json::array();
    for (const auto& [_, r] : training_records_) s["training"].push_back(record_json(r));
    s["adjudications"] = json::array();
    for (const auto& [_, a] : adjudications_)
        s["adjudications"].push_back({{"sentence", a.sentence_id},
                                      {"labels", labels_json(a.labels)},
                                      {"adjudicator", a.adjudicator_id},
                                      {"at", a.resolved_at},
                                      {"history", versions_json(a.history)}});
    s["passed"] = passed_;
    return s.dump();
}

std::string AnnotationStore::snapshot_text() const {
    std::lock_guard lock(mutex_);
    return snapshot_unlocked();
}

void AnnotationStore::write_snapshot() const {
    std::lock_guard lock(mutex_);
    if (options_.log_path.empty()) return;
    write_atomic(snapshot_path(options_.log_path), snapshot_unlocked());
}

std::map<std::string, LabelSet> read_gold_jsonl(std::istream& in) {
    std::map<std::string, LabelSet> out;
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            const json j = json::parse(line);
            const auto id = j.at("sentence_id").get<std::string>();
            const auto labels = labels_from(j.at("labels"));
            if (labels.empty()) throw Error("empty label set");
            out[id] = labels;
        } catch (const std::exception& e) {
            throw Error("gold annotations line " + std::to_string(n) + ": " + e.what());
        }
    }
    return out;
}

void write_gold_jsonl(const std::map<std::string, LabelSet>& gold, std::ostream& out) {
    for (const auto& [id, labels] : gold) out << json{{"sentence_id", id}, {"labels", labels_json(labels)}}.dump() << '\n';
}

}  // namespace ohc
