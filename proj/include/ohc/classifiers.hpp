#pragma once

#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ohc/cnn.hpp"
#include "ohc/embed.hpp"
#include "ohc/eval.hpp"
#include "ohc/linear.hpp"
#include "ohc/llda.hpp"

namespace ohc {

enum class ClassifierKind { Baseline, Llda, LinearBow, LinearEmb, Cnn };

/// Command-line names: baseline, llda, linear (or linear-bow), linear-emb, cnn.
ClassifierKind parse_classifier(std::string_view name);
std::string_view classifier_name(ClassifierKind kind);
/// Column headings of the performance table: bsline, l-lda, svm, svm-e, cnn.
std::string_view classifier_column(ClassifierKind kind);

struct AnnotatedSentence {
    std::string sentence_id;
    std::string post_id;
    Tokens tokens;  // preprocessed
    LabelSet labels;
};

struct ClassifierSettings {
    std::size_t num_labels = TopicSchema::N;
    std::size_t min_count = Vocabulary::kDefaultMinCount;
    LldaConfig llda;
    LinearConfig linear;
    EmbedConfig embed;
    CnnConfig cnn;
    /// Pretrained vectors for linear-emb and cnn; when null they are trained
    /// on the training sentences.
    const EmbeddingTable* embeddings = nullptr;
};

class Classifier {
public:
    virtual ~Classifier() = default;
    virtual ClassifierKind kind() const = 0;
    virtual std::size_t num_labels() const = 0;
    virtual LabelSet predict(const Tokens& tokens) const = 0;
    /// Writes classifier.txt plus whatever vocabulary or vector files the
    /// model needs, so the directory is self-contained.
    virtual void save(const std::filesystem::path& dir) const = 0;
};

std::unique_ptr<Classifier> train_classifier(ClassifierKind kind, std::span<const AnnotatedSentence> data,
                                             const ClassifierSettings& settings,
                                             std::vector<std::string>* warnings = nullptr);

/// Throws Error("model not found") when dir holds no saved classifier.
std::unique_ptr<Classifier> load_classifier(const std::filesystem::path& dir);

/// Fold index of every sentence: posts are split by kfold_split and each
/// sentence follows its post.
std::vector<std::size_t> assign_folds(std::span<const AnnotatedSentence> data, std::size_t k, std::uint64_t seed);

/// Post-level k-fold cross validation: train on k-1 folds, predict the held
/// out fold, sum counts over folds. Folds run on up to `threads` threads; the
/// result does not depend on the thread count.
EvalReport run_cv(ClassifierKind kind, std::span<const AnnotatedSentence> data, std::size_t k, std::uint64_t seed,
                  const ClassifierSettings& settings, std::size_t threads = 1);

}  // namespace ohc
