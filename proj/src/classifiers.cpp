#include "ohc/classifiers.hpp"

#include <fstream>
#include <map>
#include <set>
#include <thread>

namespace ohc {

namespace fs = std::filesystem;

ClassifierKind parse_classifier(std::string_view name) {
    if (name == "baseline") return ClassifierKind::Baseline;
    if (name == "llda") return ClassifierKind::Llda;
    if (name == "linear" || name == "linear-bow") return ClassifierKind::LinearBow;
    if (name == "linear-emb") return ClassifierKind::LinearEmb;
    if (name == "cnn") return ClassifierKind::Cnn;
    throw Error("unknown classifier '" + std::string(name) + "'");
}

std::string_view classifier_name(ClassifierKind kind) {
    switch (kind) {
        case ClassifierKind::Baseline: return "baseline";
        case ClassifierKind::Llda: return "llda";
        case ClassifierKind::LinearBow: return "linear";
        case ClassifierKind::LinearEmb: return "linear-emb";
        case ClassifierKind::Cnn: return "cnn";
    }
    return "";
}

std::string_view classifier_column(ClassifierKind kind) {
    switch (kind) {
        case ClassifierKind::Baseline: return "bsline";
        case ClassifierKind::Llda: return "l-lda";
        case ClassifierKind::LinearBow: return "svm";
        case ClassifierKind::LinearEmb: return "svm-e";
        case ClassifierKind::Cnn: return "cnn";
    }
    return "";
}

namespace {

constexpr const char* kHeaderFile = "classifier.txt";
constexpr const char* kVocabFile = "vocab.tsv";
constexpr const char* kVectorsFile = "vectors.txt";
constexpr const char* kModelFile = "model.txt";

std::ofstream open_out(const fs::path& p) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw Error("cannot write " + p.string());
    return out;
}

std::ifstream open_in(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw Error("cannot read " + p.string());
    return in;
}

void write_header(const fs::path& dir, ClassifierKind kind, std::size_t labels) {
    fs::create_directories(dir);
    auto out = open_out(dir / kHeaderFile);
    out << classifier_name(kind) << ' ' << labels << '\n';
}

std::vector<Tokens> token_lists(std::span<const AnnotatedSentence> data) {
    std::vector<Tokens> out;
    out.reserve(data.size());
    for (const auto& s : data) out.push_back(s.tokens);
    return out;
}

EmbeddingTable embeddings_for(std::span<const AnnotatedSentence> data, const ClassifierSettings& s) {
    if (s.embeddings) return *s.embeddings;
    const auto seqs = token_lists(data);
    return train_embeddings(seqs, build_vocab(seqs, s.min_count), s.embed);
}

class BaselineClassifier final : public Classifier {
public:
    explicit BaselineClassifier(std::size_t n) : n_(n) {}
    ClassifierKind kind() const override { return ClassifierKind::Baseline; }
    std::size_t num_labels() const override { return n_; }
    LabelSet predict(const Tokens&) const override { return LabelSet::full(n_); }
    void save(const fs::path& dir) const override { write_header(dir, kind(), n_); }

private:
    std::size_t n_;
};

class LldaClassifier final : public Classifier {
public:
    LldaClassifier(Vocabulary vocab, LldaModel model, LldaConfig config)
        : vocab_(std::move(vocab)), model_(std::move(model)), config_(config) {}

    ClassifierKind kind() const override { return ClassifierKind::Llda; }
    std::size_t num_labels() const override { return model_.num_topics(); }
    LabelSet predict(const Tokens& tokens) const override {
        const auto theta = infer_theta(model_, words(vocab_, tokens), config_).theta;
        return decide_labels(theta, model_.thresholds());
    }
    void save(const fs::path& dir) const override {
        write_header(dir, kind(), num_labels());
        vocab_.save(dir / kVocabFile);
        auto out = open_out(dir / kModelFile);
        out << "iterations " << config_.infer_iterations << ' ' << config_.burn_in << ' ' << config_.seed << '\n';
        model_.write(out);
    }
    static std::unique_ptr<Classifier> load(const fs::path& dir) {
        auto vocab = Vocabulary::load(dir / kVocabFile);
        auto in = open_in(dir / kModelFile);
        std::string tag;
        LldaConfig cfg;
        if (!(in >> tag >> cfg.infer_iterations >> cfg.burn_in >> cfg.seed) || tag != "iterations")
            throw Error("llda classifier: bad model file");
        auto model = LldaModel::read(in);
        cfg.alpha = model.alpha();
        cfg.beta = model.beta();
        if (model.thresholds().empty()) throw Error("llda classifier: thresholds missing");
        return std::make_unique<LldaClassifier>(std::move(vocab), std::move(model), cfg);
    }

    /// In-vocabulary word ids; unknown tokens carry no topic evidence.
    static std::vector<std::size_t> words(const Vocabulary& vocab, const Tokens& tokens) {
        std::vector<std::size_t> out;
        for (const auto& t : tokens)
            if (auto id = vocab.id(t); id != Vocabulary::kUnkId) out.push_back(id);
        return out;
    }

private:
    Vocabulary vocab_;
    LldaModel model_;
    LldaConfig config_;
};

std::unique_ptr<Classifier> train_llda(std::span<const AnnotatedSentence> data, const ClassifierSettings& s) {
    const auto seqs = token_lists(data);
    auto vocab = build_vocab(seqs, s.min_count);
    std::vector<LabeledDoc> docs;
    docs.reserve(data.size());
    for (const auto& d : data) docs.push_back({LldaClassifier::words(vocab, d.tokens), d.labels});
    auto model = fit_llda(docs, vocab.size(), s.num_labels, s.llda);
    std::vector<std::vector<double>> thetas;
    std::vector<LabelSet> gold;
    for (const auto& d : docs) {
        thetas.push_back(infer_theta(model, d.words, s.llda).theta);
        gold.push_back(d.labels);
    }
    model.set_thresholds(tune_thresholds(thetas, gold, s.num_labels));
    return std::make_unique<LldaClassifier>(std::move(vocab), std::move(model), s.llda);
}

class LinearBowClassifier final : public Classifier {
public:
    LinearBowClassifier(Vocabulary vocab, LinearModel model) : vocab_(std::move(vocab)), model_(std::move(model)) {}
    ClassifierKind kind() const override { return ClassifierKind::LinearBow; }
    std::size_t num_labels() const override { return model_.num_labels(); }
    LabelSet predict(const Tokens& tokens) const override { return model_.predict(featurize_bow(tokens, vocab_)); }
    void save(const fs::path& dir) const override {
        write_header(dir, kind(), num_labels());
        vocab_.save(dir / kVocabFile);
        auto out = open_out(dir / kModelFile);
        model_.write(out);
    }
    static std::unique_ptr<Classifier> load(const fs::path& dir) {
        auto vocab = Vocabulary::load(dir / kVocabFile);
        auto in = open_in(dir / kModelFile);
        return std::make_unique<LinearBowClassifier>(std::move(vocab), LinearModel::read(in));
    }

private:
    Vocabulary vocab_;
    LinearModel model_;
};

class LinearEmbClassifier final : public Classifier {
public:
    LinearEmbClassifier(EmbeddingTable table, LinearModel model) : table_(std::move(table)), model_(std::move(model)) {}
    ClassifierKind kind() const override { return ClassifierKind::LinearEmb; }
    std::size_t num_labels() const override { return model_.num_labels(); }
    LabelSet predict(const Tokens& tokens) const override { return model_.predict(featurize_emb(tokens, table_)); }
    void save(const fs::path& dir) const override {
        write_header(dir, kind(), num_labels());
        table_.save(dir / kVectorsFile);
        auto out = open_out(dir / kModelFile);
        model_.write(out);
    }
    static std::unique_ptr<Classifier> load(const fs::path& dir) {
        auto table = EmbeddingTable::load(dir / kVectorsFile);
        auto in = open_in(dir / kModelFile);
        return std::make_unique<LinearEmbClassifier>(std::move(table), LinearModel::read(in));
    }

private:
    EmbeddingTable table_;
    LinearModel model_;
};

class CnnClassifier final : public Classifier {
public:
    explicit CnnClassifier(CnnModel model) : model_(std::move(model)) {}
    ClassifierKind kind() const override { return ClassifierKind::Cnn; }
    std::size_t num_labels() const override { return model_.num_labels(); }
    LabelSet predict(const Tokens& tokens) const override { return predict_cnn(model_, model_.encode(tokens)); }
    void save(const fs::path& dir) const override {
        write_header(dir, kind(), num_labels());
        model_.embeddings().save(dir / kVectorsFile);
        auto out = open_out(dir / kModelFile);
        model_.write(out);
    }
    static std::unique_ptr<Classifier> load(const fs::path& dir) {
        const auto base = EmbeddingTable::load(dir / kVectorsFile);
        auto in = open_in(dir / kModelFile);
        return std::make_unique<CnnClassifier>(CnnModel::read(in, base));
    }

private:
    CnnModel model_;
};

}  // namespace

std::unique_ptr<Classifier> train_classifier(ClassifierKind kind, std::span<const AnnotatedSentence> data,
                                             const ClassifierSettings& settings, std::vector<std::string>* warnings) {
    if (data.empty()) throw Error("no annotated training sentences");
    for (const auto& d : data)
        if (d.labels.empty()) throw Error("unlabeled training instance " + d.sentence_id);
    switch (kind) {
        case ClassifierKind::Baseline: return std::make_unique<BaselineClassifier>(settings.num_labels);
        case ClassifierKind::Llda: return train_llda(data, settings);
        case ClassifierKind::LinearBow: {
            auto vocab = build_vocab(token_lists(data), settings.min_count);
            std::vector<LabeledFeatures> xs;
            for (const auto& d : data) xs.push_back({featurize_bow(d.tokens, vocab), d.labels});
            auto model = train_ovr(xs, settings.num_labels, settings.linear, warnings);
            return std::make_unique<LinearBowClassifier>(std::move(vocab), std::move(model));
        }
        case ClassifierKind::LinearEmb: {
            auto table = embeddings_for(data, settings);
            std::vector<LabeledFeatures> xs;
            for (const auto& d : data) xs.push_back({featurize_emb(d.tokens, table), d.labels});
            auto model = train_ovr(xs, settings.num_labels, settings.linear, warnings);
            return std::make_unique<LinearEmbClassifier>(std::move(table), std::move(model));
        }
        case ClassifierKind::Cnn: {
            auto table = embeddings_for(data, settings);
            CnnConfig cfg = settings.cnn;
            cfg.num_labels = settings.num_labels;
            std::vector<CnnExample> xs;
            for (const auto& d : data) xs.push_back({table.vocab().ids(d.tokens), d.labels});
            return std::make_unique<CnnClassifier>(train_cnn(xs, cfg, std::move(table)));
        }
    }
    throw Error("unknown classifier");
}

std::unique_ptr<Classifier> load_classifier(const fs::path& dir) {
    std::ifstream in(dir / kHeaderFile);
    std::string name;
    std::size_t labels = 0;
    if (!in || !(in >> name >> labels)) throw Error("model not found: " + dir.string());
    switch (parse_classifier(name)) {
        case ClassifierKind::Baseline: return std::make_unique<BaselineClassifier>(labels);
        case ClassifierKind::Llda: return LldaClassifier::load(dir);
        case ClassifierKind::LinearBow: return LinearBowClassifier::load(dir);
        case ClassifierKind::LinearEmb: return LinearEmbClassifier::load(dir);
        case ClassifierKind::Cnn: return CnnClassifier::load(dir);
    }
    throw Error("model not found: " + dir.string());
}

std::vector<std::size_t> assign_folds(std::span<const AnnotatedSentence> data, std::size_t k, std::uint64_t seed) {
    std::vector<std::string> post_ids;
    std::set<std::string> seen;
    for (const auto& d : data)
        if (seen.insert(d.post_id).second) post_ids.push_back(d.post_id);
    const auto folds = kfold_split(post_ids, k, seed);
    std::map<std::string, std::size_t> fold_of;
    for (std::size_t f = 0; f < folds.size(); ++f)
        for (const auto& id : folds[f]) fold_of[id] = f;
    std::vector<std::size_t> out;
    out.reserve(data.size());
    for (const auto& d : data) out.push_back(fold_of.at(d.post_id));
    return out;
}

EvalReport run_cv(ClassifierKind kind, std::span<const AnnotatedSentence> data, std::size_t k, std::uint64_t seed,
                  const ClassifierSettings& settings, std::size_t threads) {
    const auto fold = assign_folds(data, k, seed);
    std::vector<std::vector<LabelCounts>> counts(k);
    std::vector<std::size_t> sizes(k, 0);
    std::vector<std::exception_ptr> errors(k);
    auto run_fold = [&](std::size_t f) {
        try {
            std::vector<AnnotatedSentence> train;
            std::vector<LabelSet> gold, pred;
            for (std::size_t i = 0; i < data.size(); ++i)
                if (fold[i] != f) train.push_back(data[i]);
            const auto model = train_classifier(kind, train, settings);
            for (std::size_t i = 0; i < data.size(); ++i) {
                if (fold[i] != f) continue;
                gold.push_back(data[i].labels);
                pred.push_back(model->predict(data[i].tokens));
            }
            counts[f] = label_counts(gold, pred, settings.num_labels);
            sizes[f] = gold.size();
        } catch (...) {
            errors[f] = std::current_exception();
        }
    };
    threads = std::max<std::size_t>(1, std::min(threads, k));
    for (std::size_t start = 0; start < k; start += threads) {
        std::vector<std::thread> pool;
        for (std::size_t f = start; f < std::min(k, start + threads); ++f) pool.emplace_back(run_fold, f);
        for (auto& t : pool) t.join();
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);

    EvalReport report;
    report.system = std::string(classifier_column(kind));
    report.per_label.assign(settings.num_labels, {});
    report.folds = k;
    report.seed = seed;
    for (std::size_t f = 0; f < k; ++f) {
        for (std::size_t l = 0; l < settings.num_labels; ++l) report.per_label[l] += counts[f][l];
        report.instances += sizes[f];
    }
    return report;
}

}  // namespace ohc
