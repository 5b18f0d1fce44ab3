#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ohc/corpus.hpp"
#include "ohc/eval.hpp"
#include "ohc/schema.hpp"

namespace ohc {

/// Refusals carry a machine-readable code: invalid, forbidden, not_found,
/// conflict or exhausted.
class AnnotationError : public Error {
public:
    AnnotationError(std::string code, const std::string& message) : Error(message), code_(std::move(code)) {}
    const std::string& code() const { return code_; }

private:
    std::string code_;
};

struct LabelVersion {
    LabelSet labels;
    Timestamp at = 0;
    friend bool operator==(const LabelVersion&, const LabelVersion&) = default;
};

struct AnnotationRecord {
    std::string sentence_id;
    std::string coder_id;
    LabelSet labels;
    Timestamp submitted_at = 0;
    std::vector<LabelVersion> history;  // replaced versions, oldest first
    friend bool operator==(const AnnotationRecord&, const AnnotationRecord&) = default;
};

enum class BatchStatus { Open, Complete, Adjudicated };
std::string_view batch_status_name(BatchStatus s);

struct Batch {
    std::size_t batch_id = 0;
    std::vector<std::string> post_ids;
    std::vector<std::string> coders;  // at most two, distinct, in assignment order
    BatchStatus status = BatchStatus::Open;
    friend bool operator==(const Batch&, const Batch&) = default;
};

struct Adjudication {
    std::string sentence_id;
    LabelSet labels;
    std::string adjudicator_id;
    Timestamp resolved_at = 0;
    std::vector<LabelVersion> history;
    friend bool operator==(const Adjudication&, const Adjudication&) = default;
};

struct CoderStatus {
    std::string coder_id;
    std::size_t training_done = 0;
    std::size_t training_total = 0;
    std::optional<KappaReport> training_kappa;  // set once the training set is complete
    bool passed = false;
};

struct QueueItem {
    std::string sentence_id;
    std::size_t batch_id = 0;
    LabelSet first;   // labels of the batch's first coder
    LabelSet second;  // labels of the batch's second coder
    bool disagreement = false;
};

struct BatchAgreement {
    std::size_t batch_id = 0;
    std::size_t sentences = 0;  // sentences coded by both coders
    KappaReport kappa;
};

struct AnnotationOptions {
    std::size_t batch_size = 50;
    double gate_threshold = 0.6;
    /// Events between automatic snapshots; 0 disables them.
    std::size_t snapshot_interval = 100;
    /// Append-only JSON-lines log; the snapshot lives next to it. Empty
    /// keeps everything in memory.
    std::filesystem::path log_path;
    std::function<Timestamp()> clock;  // defaults to the system clock
};

/// Double annotation with a kappa training gate and adjudication. Every
/// state change is one event in a total order, so replaying the log
/// rebuilds the store exactly. All methods are safe to call concurrently.
class AnnotationStore {
public:
    /// training_gold maps training sentence ids to reference labels. An empty
    /// training set disables the gate. Existing log and snapshot are loaded.
    AnnotationStore(const Corpus& corpus, std::map<std::string, LabelSet> training_gold, AnnotationOptions options);

    const Corpus& corpus() const { return corpus_; }

    /// Oldest batch with a free seat this coder does not hold, else a new
    /// batch from the next unassigned posts in corpus order.
    Batch assign_batch(const std::string& coder_id);
    /// Upserts the coder's labels for a sentence of one of their batches or of
    /// the training set.
    void submit_annotation(const std::string& coder_id, const std::string& sentence_id, LabelSet labels);
    /// Kappa against the training gold; refuses while training is incomplete.
    CoderStatus training_gate(const std::string& coder_id);
    CoderStatus coder_status(const std::string& coder_id) const;
    std::vector<QueueItem> adjudication_queue() const;
    Adjudication adjudicate(const std::string& sentence_id, LabelSet labels, const std::string& adjudicator_id);
    BatchAgreement agreement(std::size_t batch_id) const;

    std::vector<Batch> batches() const;
    std::optional<AnnotationRecord> record(const std::string& sentence_id, const std::string& coder_id) const;
    std::optional<Adjudication> adjudication(const std::string& sentence_id) const;
    /// Final labels of every adjudicated sentence.
    std::map<std::string, LabelSet> adjudicated_labels() const;
    std::vector<std::string> training_sentences() const;
    std::size_t event_count() const;

    /// Full state as canonical JSON text; equal states give equal text.
    std::string snapshot_text() const;
    void write_snapshot() const;

private:
    void apply(const std::string& event_json);
    void commit(const std::string& event_json);
    void refresh_batch(std::size_t batch_id);
    std::vector<std::string> batch_sentences(const Batch& b) const;
    std::optional<std::size_t> batch_of_sentence(const std::string& sentence_id) const;
    CoderStatus status_unlocked(const std::string& coder_id) const;
    std::optional<KappaReport> training_kappa(const std::string& coder_id) const;
    std::string snapshot_unlocked() const;
    void load();

    const Corpus& corpus_;
    std::map<std::string, LabelSet> training_gold_;
    AnnotationOptions options_;

    mutable std::mutex mutex_;
    std::size_t seq_ = 0;
    std::vector<Batch> batches_;
    std::size_t next_post_ = 0;
    std::map<std::string, std::size_t> post_batch_;
    std::map<std::pair<std::string, std::string>, AnnotationRecord> records_;           // (sentence, coder)
    std::map<std::pair<std::string, std::string>, AnnotationRecord> training_records_;  // (sentence, coder)
    std::map<std::string, Adjudication> adjudications_;
    std::set<std::string> passed_;
};

/// Reads {"sentence_id": ..., "labels": [codes]} lines.
std::map<std::string, LabelSet> read_gold_jsonl(std::istream& in);
void write_gold_jsonl(const std::map<std::string, LabelSet>& gold, std::ostream& out);

}  // namespace ohc
