#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ohc/embed.hpp"
#include "ohc/schema.hpp"
#include "ohc/textprep.hpp"

namespace ohc {

enum class FeatureMode : std::uint8_t { Bow, Emb };

std::string_view feature_mode_name(FeatureMode m);

/// Sparse entries are sorted by id and unique.
struct FeatureVector {
    FeatureMode mode = FeatureMode::Bow;
    std::size_t dim = 0;
    std::vector<std::pair<std::uint32_t, double>> sparse;
    std::vector<double> dense;
    double norm = 0.0;

    double dot(std::span<const double> w) const;
    /// w += scale * x
    void add_to(std::span<double> w, double scale) const;
};

/// Token counts over vocabulary ids (out-of-vocabulary tokens count as the
/// unknown id), L2-normalized unless normalize is false.
FeatureVector featurize_bow(const Tokens& tokens, const Vocabulary& vocab, bool normalize = true);
/// Mean of the tokens' embedding rows; the zero vector for no tokens.
FeatureVector featurize_emb(const Tokens& tokens, const EmbeddingTable& table);

struct LinearConfig {
    double C = 1.0;
    std::size_t epochs = 30;
    std::uint64_t seed = 1;
    /// Optimality gap at which the final pair steps stop.
    double tolerance = 1e-4;
    std::size_t max_polish_steps = 200000;
    /// Replaces the derived seed of individual labels.
    std::map<std::size_t, std::uint64_t> label_seed_override;

    void validate() const;
    std::uint64_t seed_for(std::size_t label) const;
};

struct LabeledFeatures {
    FeatureVector x;
    LabelSet labels;
};

/// (1/m) sum max(0, 1 - y (w.x + b)) + (1/(C m)) |w|^2 / 2 for one label.
double hinge_objective(std::span<const double> w, double b, std::span<const LabeledFeatures> data, std::size_t label,
                       double C);
/// A subgradient of hinge_objective; margins exactly at 1 count as inactive.
/// Returns d/db; d/dw is written to grad_w.
double hinge_subgradient(std::span<const double> w, double b, std::span<const LabeledFeatures> data,
                         std::size_t label, double C, std::span<double> grad_w);

struct BinaryTrace {
    std::vector<double> epoch_objective;  // after each sweep, bias at its optimum
    std::vector<double> epoch_dual;       // dual value after each sweep, same scale
    double final_objective = 0.0;
    double final_dual = 0.0;
};

struct BinaryClassifier {
    std::vector<double> weights;
    double bias = 0.0;
};

/// Minimizes hinge_objective for one label through its dual: `epochs` sweeps
/// of shuffled pair steps, then maximal-violating-pair steps down to
/// `tolerance`. The unregularized bias is set to its exact optimum.
BinaryClassifier train_binary(std::span<const LabeledFeatures> data, std::size_t label, const LinearConfig& config,
                              BinaryTrace* trace = nullptr);

class LinearModel {
public:
    LinearModel() = default;
    LinearModel(FeatureMode mode, std::size_t dim, std::vector<BinaryClassifier> per_label);

    FeatureMode mode() const { return mode_; }
    std::size_t dim() const { return dim_; }
    std::size_t num_labels() const { return per_label_.size(); }
    const BinaryClassifier& classifier(std::size_t label) const { return per_label_.at(label); }

    std::vector<double> margins(const FeatureVector& x) const;
    /// Labels with a positive margin; may be empty. Throws Error when the
    /// feature mode or dimension does not match.
    LabelSet predict(const FeatureVector& x) const;

    /// Header "linear <bow|emb> <dim> <labels>", then one line per label:
    /// code, bias, then "id:weight" pairs (bow, non-zero only) or dim decimals.
    void write(std::ostream& out) const;
    static LinearModel read(std::istream& in);

    friend bool operator==(const LinearModel&, const LinearModel&) = default;

private:
    FeatureMode mode_ = FeatureMode::Bow;
    std::size_t dim_ = 0;
    std::vector<BinaryClassifier> per_label_;
};

inline bool operator==(const BinaryClassifier& a, const BinaryClassifier& b) {
    return a.weights == b.weights && a.bias == b.bias;
}

/// One binary classifier per label. A label without positive (or negative)
/// examples gets a constant always-negative (always-positive) classifier and
/// a warning.
LinearModel train_ovr(std::span<const LabeledFeatures> data, std::size_t num_labels, const LinearConfig& config,
                      std::vector<std::string>* warnings = nullptr);

LabelSet predict_linear(const LinearModel& model, const FeatureVector& x);

}  // namespace ohc
