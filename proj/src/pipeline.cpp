#include "ohc/pipeline.hpp"

#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "ohc/analytics.hpp"
#include "ohc/annotation.hpp"
#include "ohc/annotation_server.hpp"
#include "ohc/corpus.hpp"

namespace ohc {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

template <class T>
void take(const json& section, const char* key, T& target) {
    if (section.contains(key)) target = section.at(key).get<T>();
}

void take_path(const json& section, const char* key, fs::path& target) {
    if (section.contains(key)) target = section.at(key).get<std::string>();
}

void check_keys(const json& section, const std::string& name, std::initializer_list<const char*> allowed) {
    if (!section.is_object()) throw Error("config: section '" + name + "' must be an object");
    for (const auto& [key, _] : section.items()) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || key == a;
        if (!ok) throw Error("config: unknown key '" + name + "." + key + "'");
    }
}

std::ofstream open_out(const fs::path& p) {
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    if (!out) throw Error("cannot write " + p.string());
    return out;
}

std::ifstream open_in(const fs::path& p, const std::string& hint) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw Error(p.string() + " not found; " + hint);
    return in;
}

/// Sidecar manifest.json mapping each artifact to its step and config hash.
void record_artifacts(const PipelineConfig& cfg, const fs::path& dir, const std::vector<std::string>& files,
                      const std::string& step) {
    const fs::path path = dir / "manifest.json";
    json m = json::object();
    if (fs::exists(path)) {
        std::ifstream in(path);
        m = json::parse(in, nullptr, false);
        if (m.is_discarded() || !m.is_object()) m = json::object();
    }
    for (const auto& f : files) m[f] = {{"config_hash", cfg.hash()}, {"step", step}};
    auto out = open_out(path);
    out << m.dump(2) << '\n';
}

std::vector<TokenSequence> read_tokens(const PipelineConfig& cfg) {
    auto in = open_in(cfg.tokens_file(), "run preprocess first");
    std::vector<TokenSequence> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const json j = json::parse(line);
        out.push_back({j.at("sentence_id").get<std::string>(), j.at("tokens").get<Tokens>()});
    }
    return out;
}

std::vector<AnnotatedSentence> annotated_sentences(const PipelineConfig& cfg, std::ostream& log) {
    if (cfg.gold.empty()) throw Error("no gold annotations configured (paths.gold or --gold)");
    auto gin = open_in(cfg.gold, "export gold annotations first");
    auto gold = read_gold_jsonl(gin);
    const Corpus corpus = read_corpus_archive(cfg.corpus_dir());
    std::vector<AnnotatedSentence> out;
    for (auto& seq : read_tokens(cfg)) {
        const auto it = gold.find(seq.sentence_id);
        if (it == gold.end()) continue;
        const Sentence* s = corpus.find_sentence(seq.sentence_id);
        if (!s) throw Error("tokens reference unknown sentence " + seq.sentence_id);
        out.push_back({seq.sentence_id, s->post_id, std::move(seq.tokens), it->second});
        gold.erase(it);
    }
    if (!gold.empty())
        log << "warning: " << gold.size() << " gold sentences are not in the corpus and were skipped\n";
    if (out.empty()) throw Error("no gold sentence matches the corpus");
    return out;
}

ClassifierSettings settings_for(const PipelineConfig& cfg, const EmbeddingTable* vectors) {
    ClassifierSettings s;
    s.min_count = cfg.min_count;
    s.llda = cfg.llda;
    s.linear = cfg.linear;
    s.embed = cfg.embed;
    s.cnn = cfg.cnn;
    s.embeddings = vectors;
    return s;
}

std::optional<EmbeddingTable> pretrained(const PipelineConfig& cfg, ClassifierKind kind, std::ostream& log) {
    if (kind != ClassifierKind::LinearEmb && kind != ClassifierKind::Cnn) return std::nullopt;
    if (!fs::exists(cfg.vectors_file())) {
        log << "note: no pretrained vectors at " << cfg.vectors_file().string()
            << "; vectors are trained on the training sentences\n";
        return std::nullopt;
    }
    return EmbeddingTable::load(cfg.vectors_file());
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::atomic<bool> g_interrupted{false};
extern "C" void on_signal(int) { g_interrupted = true; }

}  // namespace

fs::path PipelineConfig::model_dir(std::string_view name) const {
    return (models.empty() ? work / "models" : models) / std::string(name);
}

PipelineConfig PipelineConfig::from_json_text(const std::string& text) {
    PipelineConfig c;
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw Error(std::string("config: not valid JSON: ") + e.what());
    }
    check_keys(j, "config", {"paths", "preprocess", "embed", "llda", "linear", "cnn", "eval", "serve"});
    try {
        if (j.contains("paths")) {
            const auto& p = j["paths"];
            check_keys(p, "paths",
                       {"posts", "work", "models", "reports", "gold", "training_gold", "annotation_log"});
            take_path(p, "posts", c.posts);
            take_path(p, "work", c.work);
            take_path(p, "models", c.models);
            take_path(p, "reports", c.reports);
            take_path(p, "gold", c.gold);
            take_path(p, "training_gold", c.training_gold);
            take_path(p, "annotation_log", c.annotation_log);
        }
        if (j.contains("preprocess")) {
            check_keys(j["preprocess"], "preprocess", {"min_count"});
            take(j["preprocess"], "min_count", c.min_count);
        }
        if (j.contains("embed")) {
            const auto& e = j["embed"];
            check_keys(e, "embed", {"dim", "window", "negatives", "epochs", "initial_lr", "subsample_threshold", "seed"});
            take(e, "dim", c.embed.dim);
            take(e, "window", c.embed.window);
            take(e, "negatives", c.embed.negatives);
            take(e, "epochs", c.embed.epochs);
            take(e, "initial_lr", c.embed.initial_lr);
            take(e, "subsample_threshold", c.embed.subsample_threshold);
            take(e, "seed", c.embed.seed);
        }
        if (j.contains("llda")) {
            const auto& l = j["llda"];
            check_keys(l, "llda", {"alpha", "beta", "train_iterations", "infer_iterations", "burn_in", "seed"});
            take(l, "alpha", c.llda.alpha);
            take(l, "beta", c.llda.beta);
            take(l, "train_iterations", c.llda.train_iterations);
            take(l, "infer_iterations", c.llda.infer_iterations);
            take(l, "burn_in", c.llda.burn_in);
            take(l, "seed", c.llda.seed);
        }
        if (j.contains("linear")) {
            const auto& l = j["linear"];
            check_keys(l, "linear", {"C", "epochs", "seed", "tolerance", "max_polish_steps"});
            take(l, "C", c.linear.C);
            take(l, "epochs", c.linear.epochs);
            take(l, "seed", c.linear.seed);
            take(l, "tolerance", c.linear.tolerance);
            take(l, "max_polish_steps", c.linear.max_polish_steps);
        }
        if (j.contains("cnn")) {
            const auto& n = j["cnn"];
            check_keys(n, "cnn", {"hidden", "filter_widths", "alpha", "learning_rate", "epochs", "batch_size",
                                  "init_range", "seed", "fine_tune_embeddings"});
            take(n, "hidden", c.cnn.hidden);
            take(n, "filter_widths", c.cnn.filter_widths);
            take(n, "alpha", c.cnn.alpha);
            take(n, "learning_rate", c.cnn.learning_rate);
            take(n, "epochs", c.cnn.epochs);
            take(n, "batch_size", c.cnn.batch_size);
            take(n, "init_range", c.cnn.init_range);
            take(n, "seed", c.cnn.seed);
            take(n, "fine_tune_embeddings", c.cnn.fine_tune_embeddings);
        }
        if (j.contains("eval")) {
            const auto& e = j["eval"];
            check_keys(e, "eval", {"model", "folds", "seed", "threads"});
            take(e, "model", c.model);
            take(e, "folds", c.folds);
            take(e, "seed", c.seed);
            take(e, "threads", c.threads);
        }
        if (j.contains("serve")) {
            check_keys(j["serve"], "serve", {"host", "port"});
            take(j["serve"], "host", c.host);
            take(j["serve"], "port", c.port);
        }
    } catch (const json::exception& e) {
        throw Error(std::string("config: wrong value type: ") + e.what());
    }
    return c;
}

PipelineConfig PipelineConfig::load(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("config file " + path.string() + " not found");
    std::ostringstream text;
    text << in.rdbuf();
    return from_json_text(text.str());
}

std::string PipelineConfig::to_json_text() const {
    // Reals are rounded through format_real so the text, and the hash, are stable,
    // and stay numbers so the text loads back.
    const auto real = [](double x) { return json::parse(format_real(x)); };
    json j;
    j["paths"] = {{"posts", posts.string()},
                  {"work", work.string()},
                  {"models", models.string()},
                  {"reports", reports.string()},
                  {"gold", gold.string()},
                  {"training_gold", training_gold.string()},
                  {"annotation_log", annotation_log.string()}};
    j["preprocess"] = {{"min_count", min_count}};
    j["embed"] = {{"dim", embed.dim},
                  {"window", embed.window},
                  {"negatives", embed.negatives},
                  {"epochs", embed.epochs},
                  {"initial_lr", real(embed.initial_lr)},
                  {"subsample_threshold", real(embed.subsample_threshold)},
                  {"seed", embed.seed}};
    j["llda"] = {{"alpha", real(llda.alpha)},
                 {"beta", real(llda.beta)},
                 {"train_iterations", llda.train_iterations},
                 {"infer_iterations", llda.infer_iterations},
                 {"burn_in", llda.burn_in},
                 {"seed", llda.seed}};
    j["linear"] = {{"C", real(linear.C)},
                   {"epochs", linear.epochs},
                   {"seed", linear.seed},
                   {"tolerance", real(linear.tolerance)},
                   {"max_polish_steps", linear.max_polish_steps}};
    j["cnn"] = {{"hidden", cnn.hidden},
                {"filter_widths", cnn.filter_widths},
                {"alpha", real(cnn.alpha)},
                {"learning_rate", real(cnn.learning_rate)},
                {"epochs", cnn.epochs},
                {"batch_size", cnn.batch_size},
                {"init_range", real(cnn.init_range)},
                {"seed", cnn.seed},
                {"fine_tune_embeddings", cnn.fine_tune_embeddings}};
    j["eval"] = {{"model", model}, {"folds", folds}, {"seed", seed}, {"threads", threads}};
    j["serve"] = {{"host", host}, {"port", port}};
    return j.dump(2);
}

std::string PipelineConfig::hash() const {
    // Locations and thread count do not change results, so they stay out of
    // the hash and runs in different directories share it.
    json j = json::parse(to_json_text());
    j.erase("paths");
    j["eval"].erase("threads");
    j.erase("serve");
    const std::string text = j.dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return hex64(h);
}

void PipelineConfig::validate() const {
    std::map<std::string, std::string> seen;
    auto check = [&](const fs::path& p, const char* name) {
        if (p.empty()) return;
        const std::string key = fs::weakly_canonical(p).string();
        auto [it, inserted] = seen.emplace(key, name);
        if (!inserted) throw Error(std::string("config: paths '") + it->second + "' and '" + name + "' coincide");
    };
    check(posts, "posts");
    check(work, "work");
    check(models, "models");
    check(reports, "reports");
    check(gold, "gold");
    check(training_gold, "training_gold");
    check(annotation_log, "annotation_log");
    if (folds < 2) throw Error("config: folds must be at least 2");
    if (threads == 0) throw Error("config: threads must be positive");
    embed.validate();
    llda.validate();
    linear.validate();
    cnn.validate();
}

void run_ingest(const PipelineConfig& cfg, std::ostream& log) {
    if (cfg.posts.empty()) throw Error("ingest: no posts file configured (paths.posts or --posts)");
    auto result = ingest_posts_file(cfg.posts);
    write_corpus_archive(result.corpus, cfg.corpus_dir());
    record_artifacts(cfg, cfg.corpus_dir(), {"posts.jsonl", "sentences.jsonl", "authors.jsonl"}, "ingest");
    const auto& s = result.stats;
    log << "ingest: " << s.accepted << " posts, " << result.corpus.sentences().size() << " sentences, "
        << result.corpus.authors().size() << " authors (" << s.malformed << " malformed, " << s.duplicates
        << " duplicate lines skipped)\n";
}

void run_preprocess(const PipelineConfig& cfg, std::ostream& log) {
    const Corpus corpus = read_corpus_archive(cfg.corpus_dir());
    std::vector<Tokens> seqs;
    {
        auto out = open_out(cfg.tokens_file());
        for (const auto& s : corpus.sentences()) {
            auto seq = preprocess_sentence(s.sentence_id, s.text);
            out << json{{"sentence_id", seq.sentence_id}, {"tokens", seq.tokens}}.dump() << '\n';
            seqs.push_back(std::move(seq.tokens));
        }
    }
    const auto vocab = build_vocab(seqs, cfg.min_count);
    vocab.save(cfg.work / "vocab.tsv");
    record_artifacts(cfg, cfg.work, {"tokens.jsonl", "vocab.tsv"}, "preprocess");
    log << "preprocess: " << seqs.size() << " sentences, vocabulary of " << vocab.size() << " types\n";
}

void run_embed(const PipelineConfig& cfg, std::ostream& log) {
    std::vector<Tokens> seqs;
    for (auto& s : read_tokens(cfg)) seqs.push_back(std::move(s.tokens));
    const auto vocab = build_vocab(seqs, cfg.min_count);
    const auto table = train_embeddings(seqs, vocab, cfg.embed);
    table.save(cfg.vectors_file());
    record_artifacts(cfg, cfg.work, {"vectors.txt"}, "embed");
    log << "embed: " << table.rows() << " vectors of dimension " << table.dim() << '\n';
}

void run_train(const PipelineConfig& cfg, std::ostream& log) {
    const auto kind = parse_classifier(cfg.model);
    const auto data = annotated_sentences(cfg, log);
    const auto vectors = pretrained(cfg, kind, log);
    std::vector<std::string> warnings;
    const auto model = train_classifier(kind, data, settings_for(cfg, vectors ? &*vectors : nullptr), &warnings);
    for (const auto& w : warnings) log << "warning: " << w << '\n';
    const fs::path dir = cfg.model_dir(classifier_name(kind));
    model->save(dir);
    std::vector<std::string> files;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.path().filename() != "manifest.json") files.push_back(e.path().filename().string());
    std::sort(files.begin(), files.end());
    record_artifacts(cfg, dir, files, "train");
    log << "train: " << classifier_name(kind) << " on " << data.size() << " sentences, saved to " << dir.string()
        << '\n';
}

void run_eval(const PipelineConfig& cfg, const std::vector<std::string>& models, std::ostream& log) {
    std::vector<ClassifierKind> kinds{ClassifierKind::Baseline};
    for (const auto& m : models) {
        if (m == "all") {
            for (auto k : {ClassifierKind::Llda, ClassifierKind::LinearBow, ClassifierKind::LinearEmb,
                           ClassifierKind::Cnn})
                if (std::find(kinds.begin(), kinds.end(), k) == kinds.end()) kinds.push_back(k);
            continue;
        }
        const auto k = parse_classifier(m);
        if (std::find(kinds.begin(), kinds.end(), k) == kinds.end()) kinds.push_back(k);
    }
    const auto data = annotated_sentences(cfg, log);
    std::vector<EvalReport> reports;
    std::string stem = "eval";
    for (auto kind : kinds) {
        const auto vectors = pretrained(cfg, kind, log);
        reports.push_back(run_cv(kind, data, cfg.folds, cfg.seed, settings_for(cfg, vectors ? &*vectors : nullptr),
                                 cfg.threads));
        if (kind != ClassifierKind::Baseline) stem += "_" + std::string(classifier_name(kind));
        log << "eval: " << classifier_name(kind) << " micro F " << format_real(reports.back().micro().f) << '\n';
    }
    if (kinds.size() == 1) stem += "_baseline";
    const fs::path dir = cfg.reports_dir();
    {
        auto out = open_out(dir / (stem + ".txt"));
        write_report_text(reports, out);
    }
    {
        auto out = open_out(dir / (stem + ".csv"));
        write_report_csv(reports, out);
    }
    record_artifacts(cfg, dir, {stem + ".txt", stem + ".csv"}, "eval");
    write_report_text(reports, log);
}

void run_label(const PipelineConfig& cfg, std::ostream& log) {
    const auto kind = parse_classifier(cfg.model);
    const auto model = load_classifier(cfg.model_dir(classifier_name(kind)));
    const Corpus corpus = read_corpus_archive(cfg.corpus_dir());
    std::map<std::string, Tokens> tokens;
    for (auto& s : read_tokens(cfg)) tokens.emplace(s.sentence_id, std::move(s.tokens));

    const fs::path dir = cfg.labels_dir();
    auto sent_out = open_out(dir / "sentence_labels.jsonl");
    std::vector<PostLabels> posts;
    std::size_t empty_posts = 0;
    for (std::size_t p = 0; p < corpus.posts().size(); ++p) {
        const auto range = corpus.sentences_of(p);
        if (range.count == 0) {
            ++empty_posts;
            continue;
        }
        std::vector<LabelSet> labels;
        for (std::size_t i = 0; i < range.count; ++i) {
            const Sentence& s = corpus.sentences()[range.first + i];
            const auto it = tokens.find(s.sentence_id);
            if (it == tokens.end()) throw Error("label: sentence " + s.sentence_id + " missing from tokens; rerun preprocess");
            labels.push_back(model->predict(it->second));
            sent_out << json{{"sentence_id", s.sentence_id}, {"labels", labels.back().codes()}}.dump() << '\n';
        }
        auto agg = aggregate_post_labels(labels);
        agg.post_id = corpus.posts()[p].post_id;
        posts.push_back(std::move(agg));
    }
    sent_out.close();
    {
        auto out = open_out(dir / "post_labels.csv");
        write_post_labels(posts, out);
    }
    record_artifacts(cfg, dir, {"sentence_labels.jsonl", "post_labels.csv"}, "label");
    log << "label: " << posts.size() << " posts labeled with " << classifier_name(kind);
    if (empty_posts) log << " (" << empty_posts << " posts without sentences skipped)";
    log << '\n';
}

void run_analyze(const PipelineConfig& cfg, const std::string& by, std::ostream& log) {
    auto in = open_in(cfg.labels_dir() / "post_labels.csv", "run label first");
    const auto posts = read_post_labels(in);
    const fs::path dir = cfg.reports_dir();
    std::vector<std::string> files;
    if (by == "prevalence") {
        const auto p = prevalence(posts);
        auto out = open_out(dir / "prevalence.csv");
        write_prevalence_csv(p, out);
        auto longf = open_out(dir / "prevalence_long.csv");
        write_long_csv("prevalence", p, longf);
        files = {"prevalence.csv", "prevalence_long.csv"};
        write_prevalence_text(p, log);
    } else if (by == "stage") {
        const Corpus corpus = read_corpus_archive(cfg.corpus_dir());
        std::vector<std::string> warnings;
        const auto rows = stratify_by_stage(corpus, posts, &warnings);
        for (const auto& w : warnings) log << "warning: " << w << '\n';
        auto out = open_out(dir / "stage.csv");
        write_stage_csv(rows, out);
        auto longf = open_out(dir / "stage_long.csv");
        write_long_csv("stage", rows, longf);
        files = {"stage.csv", "stage_long.csv"};
        for (const auto& r : rows) log << stage_name(r.stage) << ": " << r.n_posts << " posts\n";
    } else {
        const auto unit = parse_time_unit(by);
        const Corpus corpus = read_corpus_archive(cfg.corpus_dir());
        const auto bins = trajectory(corpus, posts, unit);
        const std::string name = "trajectory_" + std::string(time_unit_name(unit));
        auto out = open_out(dir / (name + ".csv"));
        write_trajectory_csv(bins, out);
        auto longf = open_out(dir / (name + "_long.csv"));
        write_long_csv(name, bins, longf);
        files = {name + ".csv", name + "_long.csv"};
        log << name << ": " << bins.size() << " bins\n";
    }
    record_artifacts(cfg, dir, files, "analyze");
}

void run_agreement(const PipelineConfig& cfg, const std::vector<fs::path>& coder_files, std::ostream& log) {
    if (coder_files.size() < 2) throw Error("agreement: at least two coder files are required");
    std::vector<std::map<std::string, LabelSet>> coders;
    for (const auto& f : coder_files) {
        auto in = open_in(f, "check the coder file path");
        coders.push_back(read_gold_jsonl(in));
    }
    std::vector<std::string> names;
    std::vector<KappaReport> reports;
    std::vector<std::size_t> shared;
    for (std::size_t j = 1; j < coders.size(); ++j) {
        std::vector<LabelSet> a, b;
        for (const auto& [id, labels] : coders[0]) {
            const auto it = coders[j].find(id);
            if (it == coders[j].end()) continue;
            a.push_back(labels);
            b.push_back(it->second);
        }
        if (a.empty()) throw Error("agreement: coders 1 and " + std::to_string(j + 1) + " share no sentence");
        names.push_back("Coder 1 and " + std::to_string(j + 1));
        reports.push_back(kappa_report(a, b));
        shared.push_back(a.size());
    }
    const fs::path dir = cfg.reports_dir();
    {
        auto out = open_out(dir / "agreement.txt");
        write_kappa_text(names, reports, out);
    }
    {
        auto out = open_out(dir / "agreement.csv");
        out << "pair,label,kappa,sentences\n";
        for (std::size_t r = 0; r < reports.size(); ++r) {
            out << names[r] << ",Avg K," << format_real(reports[r].average) << ',' << shared[r] << '\n';
            for (std::size_t l = 0; l < reports[r].per_label.size(); ++l)
                out << names[r] << ',' << TopicSchema::code(l) << ',' << format_real(reports[r].per_label[l]) << ','
                    << shared[r] << '\n';
        }
    }
    record_artifacts(cfg, dir, {"agreement.txt", "agreement.csv"}, "agreement");
    write_kappa_text(names, reports, log);
}

void run_export_gold(const PipelineConfig& cfg, std::ostream& log) {
    if (cfg.gold.empty()) throw Error("export-gold: no gold path configured (paths.gold or --gold)");
    const Corpus corpus = read_corpus_archive(cfg.corpus_dir());
    AnnotationOptions opts;
    opts.log_path = cfg.log_file();
    opts.snapshot_interval = 0;
    if (!fs::exists(opts.log_path)) throw Error("export-gold: annotation log " + opts.log_path.string() + " not found");
    AnnotationStore store(corpus, {}, opts);
    const auto gold = store.adjudicated_labels();
    auto out = open_out(cfg.gold);
    write_gold_jsonl(gold, out);
    log << "export-gold: " << gold.size() << " adjudicated sentences written to " << cfg.gold.string() << '\n';
}

void run_serve(const PipelineConfig& cfg, std::ostream& log) {
    const Corpus corpus = read_corpus_archive(cfg.corpus_dir());
    std::map<std::string, LabelSet> training;
    if (!cfg.training_gold.empty()) {
        auto in = open_in(cfg.training_gold, "check paths.training_gold");
        training = read_gold_jsonl(in);
    }
    AnnotationOptions opts;
    opts.log_path = cfg.log_file();
    AnnotationStore store(corpus, training, opts);
    AnnotationServer server(store);
    if (!server.bind(cfg.host, cfg.port))
        throw Error("serve: cannot bind " + cfg.host + ":" + std::to_string(cfg.port));
    log << "serve: listening on http://" << cfg.host << ':' << cfg.port << " (log " << opts.log_path.string()
        << ", " << store.event_count() << " events replayed)" << std::endl;
    g_interrupted = false;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    std::thread watcher([&] {
        while (!g_interrupted) std::this_thread::sleep_for(std::chrono::milliseconds(100));
        server.stop();
    });
    server.listen_after_bind();
    g_interrupted = true;
    watcher.join();
    store.write_snapshot();
    log << "serve: stopped\n";
}

}  // namespace ohc
