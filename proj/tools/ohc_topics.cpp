// Command-line front end: ingest -> preprocess -> embed -> train -> eval ->
// label -> analyze, plus agreement, serve and export-gold.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ohc/pipeline.hpp"

namespace {

constexpr int kUsageError = 2;

struct Overrides {
    std::optional<std::string> posts, work, models, reports, gold, training_gold, log, host;
    std::optional<std::string> model;
    std::vector<std::string> eval_models;
    std::optional<std::size_t> folds, threads, min_count;
    std::optional<std::uint64_t> seed;
    std::optional<int> port;

    void apply(ohc::PipelineConfig& c) const {
        if (posts) c.posts = *posts;
        if (work) c.work = *work;
        if (models) c.models = *models;
        if (reports) c.reports = *reports;
        if (gold) c.gold = *gold;
        if (training_gold) c.training_gold = *training_gold;
        if (log) c.annotation_log = *log;
        if (host) c.host = *host;
        if (model) c.model = *model;
        if (folds) c.folds = *folds;
        if (threads) c.threads = *threads;
        if (min_count) c.min_count = *min_count;
        if (seed) c.seed = *seed;
        if (port) c.port = *port;
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Topic classification and analytics for online health community posts"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    Overrides o;
    app.add_option("-c,--config", config_path, "JSON config file (falls back to $OHC_TOPICS_CONFIG)");
    app.add_option("--work", o.work, "Working directory for intermediate artifacts");
    app.add_option("--models", o.models, "Directory for trained models");
    app.add_option("--reports", o.reports, "Directory for reports");
    app.add_option("--gold", o.gold, "Adjudicated sentence labels (gold.jsonl)");
    app.add_option("--min-count", o.min_count, "Vocabulary minimum count");

    auto* ingest = app.add_subcommand("ingest", "Read raw posts into a corpus archive");
    ingest->add_option("--posts", o.posts, "Posts file, one JSON object per line");

    app.add_subcommand("preprocess", "Tokenize, mask, stem and build the vocabulary");
    app.add_subcommand("embed", "Train skip-gram word vectors on the corpus");

    auto* train = app.add_subcommand("train", "Train one classifier on the gold sentences");
    train->add_option("--model", o.model, "llda | linear | linear-emb | cnn")->required();

    auto* eval = app.add_subcommand("eval", "Cross-validate classifiers against the tag-all baseline");
    eval->add_option("--model", o.eval_models, "Classifier(s) to evaluate, or 'all' (repeatable)");
    eval->add_option("--folds", o.folds, "Number of folds");
    eval->add_option("--seed", o.seed, "Fold split seed");
    eval->add_option("--threads", o.threads, "Folds evaluated in parallel");

    auto* label = app.add_subcommand("label", "Label every corpus sentence and aggregate posts");
    label->add_option("--model", o.model, "Trained classifier to apply");

    std::string by;
    auto* analyze = app.add_subcommand("analyze", "Prevalence, stage or trajectory tables");
    analyze->add_option("--by", by, "prevalence | stage | post | day | week")
        ->required()
        ->check(CLI::IsMember({"prevalence", "stage", "post", "day", "week"}));

    std::vector<std::string> coder_files;
    auto* agreement = app.add_subcommand("agreement", "Per-label Cohen's kappa between coders");
    agreement->add_option("files", coder_files, "Coder label files; the first is compared with each other")
        ->required()
        ->expected(2, -1);

    auto* serve = app.add_subcommand("serve", "Run the annotation service");
    serve->add_option("--port", o.port, "TCP port");
    serve->add_option("--host", o.host, "Bind address");
    serve->add_option("--log", o.log, "Annotation event log path");
    serve->add_option("--training-gold", o.training_gold, "Reference labels for the coder training gate");

    auto* export_gold = app.add_subcommand("export-gold", "Write adjudicated labels from the annotation log");
    export_gold->add_option("--log", o.log, "Annotation event log path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n\n" << app.help();
        return kUsageError;
    }

    try {
        ohc::PipelineConfig cfg;
        if (config_path.empty())
            if (const char* env = std::getenv("OHC_TOPICS_CONFIG"); env && *env) config_path = env;
        if (!config_path.empty()) cfg = ohc::PipelineConfig::load(config_path);
        o.apply(cfg);
        cfg.validate();

        auto& log = std::cout;
        if (ingest->parsed()) ohc::run_ingest(cfg, log);
        else if (app.got_subcommand("preprocess")) ohc::run_preprocess(cfg, log);
        else if (app.got_subcommand("embed")) ohc::run_embed(cfg, log);
        else if (train->parsed()) ohc::run_train(cfg, log);
        else if (eval->parsed())
            ohc::run_eval(cfg, o.eval_models.empty() ? std::vector<std::string>{cfg.model} : o.eval_models, log);
        else if (label->parsed()) ohc::run_label(cfg, log);
        else if (analyze->parsed()) ohc::run_analyze(cfg, by, log);
        else if (agreement->parsed())
            ohc::run_agreement(cfg, std::vector<std::filesystem::path>(coder_files.begin(), coder_files.end()), log);
        else if (serve->parsed()) ohc::run_serve(cfg, log);
        else if (export_gold->parsed()) ohc::run_export_gold(cfg, log);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
