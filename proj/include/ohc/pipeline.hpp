#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "ohc/classifiers.hpp"

namespace ohc {

/// One reproducibility artifact per experiment: every path, seed and module
/// setting. Loaded from a JSON file with one section per module.
struct PipelineConfig {
    std::filesystem::path posts;          // raw posts, one JSON object per line
    std::filesystem::path work = "ohc-work";
    std::filesystem::path models;         // defaults to work/models
    std::filesystem::path reports;        // defaults to work/reports
    std::filesystem::path gold;           // adjudicated sentence labels (gold.jsonl)
    std::filesystem::path training_gold;  // reference labels for the coder gate
    std::filesystem::path annotation_log; // defaults to work/annotations.jsonl

    std::string model = "cnn";
    std::size_t folds = 5;
    std::uint64_t seed = 1;
    std::size_t threads = 1;
    std::size_t min_count = Vocabulary::kDefaultMinCount;
    EmbedConfig embed;
    LldaConfig llda;
    LinearConfig linear;
    CnnConfig cnn;
    std::string host = "127.0.0.1";
    int port = 8080;

    /// Unknown keys are rejected so typos do not pass silently.
    static PipelineConfig from_json_text(const std::string& text);
    static PipelineConfig load(const std::filesystem::path& path);
    /// Canonical JSON with every setting spelled out.
    std::string to_json_text() const;
    /// FNV-1a of the canonical JSON, 16 hex digits.
    std::string hash() const;

    std::filesystem::path corpus_dir() const { return work / "corpus"; }
    std::filesystem::path tokens_file() const { return work / "tokens.jsonl"; }
    std::filesystem::path vectors_file() const { return work / "vectors.txt"; }
    std::filesystem::path model_dir(std::string_view name) const;
    std::filesystem::path reports_dir() const { return reports.empty() ? work / "reports" : reports; }
    std::filesystem::path labels_dir() const { return work / "labels"; }
    std::filesystem::path log_file() const {
        return annotation_log.empty() ? work / "annotations.jsonl" : annotation_log;
    }

    /// Throws Error when two configured paths coincide.
    void validate() const;
};

/// Every step writes its files plus a manifest.json in the output directory
/// recording the config hash that produced each file. Steps throw Error with
/// the failing module named in the message.
void run_ingest(const PipelineConfig& cfg, std::ostream& log);
void run_preprocess(const PipelineConfig& cfg, std::ostream& log);
void run_embed(const PipelineConfig& cfg, std::ostream& log);
void run_train(const PipelineConfig& cfg, std::ostream& log);
/// models: classifier names; "all" expands to every classifier. The tag-all
/// baseline is always the first column.
void run_eval(const PipelineConfig& cfg, const std::vector<std::string>& models, std::ostream& log);
void run_label(const PipelineConfig& cfg, std::ostream& log);
/// by: prevalence, stage, post, day or week.
void run_analyze(const PipelineConfig& cfg, const std::string& by, std::ostream& log);
/// Pairwise per-label kappa between coder files (gold.jsonl format): the
/// first file against each other file, over shared sentences.
void run_agreement(const PipelineConfig& cfg, const std::vector<std::filesystem::path>& coder_files,
                   std::ostream& log);
/// Writes adjudicated labels from the annotation log to cfg.gold.
void run_export_gold(const PipelineConfig& cfg, std::ostream& log);
/// Blocks until interrupted.
void run_serve(const PipelineConfig& cfg, std::ostream& log);

}  // namespace ohc
