#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <limits>
#include <map>
#include <span>
#include <vector>

#include "ohc/embed.hpp"
#include "ohc/schema.hpp"

namespace ohc {

struct CnnConfig {
    std::size_t hidden = 800;  // total filter count H
    std::vector<std::size_t> filter_widths{3, 4, 5};
    std::size_t num_labels = TopicSchema::N;
    double alpha = 0.25;  // weight of negative-label loss terms
    double learning_rate = 0.05;
    std::size_t epochs = 25;
    std::size_t batch_size = 32;
    double init_range = 0.05;
    std::uint64_t seed = 1;
    bool fine_tune_embeddings = false;

    void validate() const;
    /// H split as evenly as possible, earlier widths take the remainder.
    std::vector<std::size_t> filters_per_width() const;
};

/// Maps to the all-zero vector; never part of a vocabulary.
inline constexpr std::size_t kPadToken = std::numeric_limits<std::size_t>::max();

struct CnnExample {
    std::vector<std::size_t> ids;
    LabelSet labels;
};

struct ForwardTrace {
    std::vector<std::vector<double>> scores;  // per width group: positions x filters, before ReLU
    std::vector<double> pooled;               // length H
    std::vector<std::size_t> argmax;          // position of the max per filter, lowest on ties
    std::vector<double> logits;
};

struct FilterGroup {
    std::size_t width = 0;
    std::size_t count = 0;
    std::size_t weight_offset = 0;  // (width*D) x count block, column per filter
    std::size_t bias_offset = 0;
    std::size_t first_filter = 0;   // index into the pooled vector
};

/// Parameters live in one flat array in declared order: for each width
/// group its weight block then its biases, then the labels x H output
/// matrix, then the output biases.
class CnnModel {
public:
    CnnModel(const CnnConfig& config, EmbeddingTable embeddings);

    /// Filter weights uniform in +-init_range, everything else zero.
    static CnnModel initialize(const CnnConfig& config, EmbeddingTable embeddings);

    const CnnConfig& config() const { return config_; }
    std::size_t dim() const { return embeddings_.dim(); }
    std::size_t hidden() const { return config_.hidden; }
    std::size_t num_labels() const { return config_.num_labels; }
    std::size_t max_width() const;
    const std::vector<FilterGroup>& groups() const { return groups_; }

    std::vector<double>& params() { return params_; }
    const std::vector<double>& params() const { return params_; }
    EmbeddingTable& embeddings() { return embeddings_; }
    const EmbeddingTable& embeddings() const { return embeddings_; }

    std::size_t output_weight_offset() const { return output_offset_; }
    std::size_t output_bias_offset() const { return output_offset_ + num_labels() * hidden(); }
    double output_weight(std::size_t label, std::size_t h) const { return params_[output_offset_ + label * hidden() + h]; }

    std::vector<std::size_t> encode(const Tokens& tokens) const;

    /// embed, zero-pad to the widest filter, ReLU convolution, max over
    /// positions, fully connected layer.
    std::vector<double> forward(std::span<const std::size_t> ids, ForwardTrace* trace = nullptr) const;

    bool all_finite() const;

    /// Header "cnn D H labels alpha fine_tune widths..." then one
    /// "width count" line per group, then the parameter array (and the
    /// embedding rows when fine-tuned), 9 significant digits.
    void write(std::ostream& out) const;
    /// Frozen-embedding models take their table from base.
    static CnnModel read(std::istream& in, const EmbeddingTable& base);

    friend bool operator==(const CnnModel& a, const CnnModel& b) {
        return a.params_ == b.params_ && a.embeddings_ == b.embeddings_;
    }

private:
    void build_sentence(std::span<const std::size_t> ids, std::vector<double>& x, std::size_t& rows) const;

    CnnConfig config_;
    EmbeddingTable embeddings_;
    std::vector<FilterGroup> groups_;
    std::size_t output_offset_ = 0;
    std::vector<double> params_;

    friend struct CnnBackprop;
};

/// sum_l w_l log(1 + exp(-y_l z_l)); w_l = 1 for gold labels, alpha otherwise.
double cnn_loss(std::span<const double> logits, LabelSet gold, double alpha);

struct CnnGradient {
    double loss = 0.0;                                   // mean over the batch
    std::vector<double> params;                          // same layout as CnnModel::params()
    std::map<std::size_t, std::vector<double>> embeddings;  // only when fine-tuning
};

/// Exact gradient of the mean batch loss. Max pooling routes the gradient
/// to the argmax position only.
CnnGradient cnn_gradient(const CnnModel& model, std::span<const CnnExample> batch);

/// params -= step * gradient (and embedding rows when fine-tuning).
void apply_gradient(CnnModel& model, const CnnGradient& g, double step);

struct CnnTrainLog {
    std::vector<double> epoch_loss;
};

/// Mini-batch SGD, deterministic per seed. Throws Error on a non-finite loss.
CnnModel train_cnn(std::span<const CnnExample> data, const CnnConfig& config, EmbeddingTable embeddings,
                   CnnTrainLog* log = nullptr);

/// Labels with sigmoid(logit) >= 0.5; the argmax when none qualifies.
LabelSet decide_cnn(std::span<const double> logits);
LabelSet predict_cnn(const CnnModel& model, std::span<const std::size_t> ids);

}  // namespace ohc
