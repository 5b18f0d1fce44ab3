#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "ohc/schema.hpp"

namespace ohc {

struct LldaConfig {
    double alpha = 0.1;
    double beta = 0.5;
    std::size_t train_iterations = 1000;
    std::size_t infer_iterations = 200;
    std::size_t burn_in = 100;
    std::uint64_t seed = 1;

    void validate() const;
};

/// A training document: word ids and the topics its tokens may take.
struct LabeledDoc {
    std::vector<std::size_t> words;
    LabelSet labels;
};

/// Read-only view of the sampler state handed to a per-sweep observer.
struct LldaSweepView {
    std::size_t sweep = 0;
    std::span<const LabeledDoc> docs;
    const std::vector<std::vector<std::uint16_t>>& assignments;  // z per doc token
    const std::vector<std::uint32_t>& doc_topic_counts;          // docs x topics
    const std::vector<std::uint32_t>& topic_word_counts;         // topics x V
    const std::vector<std::uint64_t>& topic_totals;
};

class LldaModel {
public:
    LldaModel() = default;
    LldaModel(std::size_t num_topics, std::size_t vocab_size, double alpha, double beta);

    std::size_t num_topics() const { return num_topics_; }
    std::size_t vocab_size() const { return vocab_size_; }
    double alpha() const { return alpha_; }
    double beta() const { return beta_; }

    std::uint32_t count(std::size_t topic, std::size_t word) const { return topic_word_[topic * vocab_size_ + word]; }
    std::uint64_t topic_total(std::size_t topic) const { return topic_totals_[topic]; }
    const std::vector<std::uint32_t>& topic_word_counts() const { return topic_word_; }
    const std::vector<std::uint64_t>& topic_totals() const { return topic_totals_; }

    /// (n_kw + beta) / (n_k + V beta)
    double phi(std::size_t topic, std::size_t word) const;
    std::vector<double> phi_row(std::size_t topic) const;

    /// Per-label decision thresholds; empty until tuned.
    const std::vector<double>& thresholds() const { return thresholds_; }
    void set_thresholds(std::vector<double> t);

    /// "llda N V alpha beta", N lines of V counts, optional "thresholds ..." line.
    void write(std::ostream& out) const;
    static LldaModel read(std::istream& in);

    friend bool operator==(const LldaModel&, const LldaModel&) = default;

private:
    friend LldaModel fit_llda(std::span<const LabeledDoc>, std::size_t, std::size_t, const LldaConfig&,
                              const std::function<void(const LldaSweepView&)>&);

    std::size_t num_topics_ = 0;
    std::size_t vocab_size_ = 0;
    double alpha_ = 0.1;
    double beta_ = 0.5;
    std::vector<std::uint32_t> topic_word_;
    std::vector<std::uint64_t> topic_totals_;
    std::vector<double> thresholds_;
};

/// Collapsed Gibbs sampling with every token's topic restricted to its
/// document's label set. Throws Error("unlabeled training instance") for a
/// document without labels and Error for an empty corpus.
LldaModel fit_llda(std::span<const LabeledDoc> docs, std::size_t vocab_size, std::size_t num_topics,
                   const LldaConfig& config, const std::function<void(const LldaSweepView&)>& on_sweep = {});

/// Unnormalized conditional weights p(z = k | rest) for k in allowed, written
/// into out (zero for topics outside allowed). Returns their sum.
double llda_conditional(std::span<const std::uint32_t> doc_topic_counts,
                        std::span<const std::uint32_t> topic_word_counts, std::span<const std::uint64_t> topic_totals,
                        std::size_t word, std::size_t vocab_size, LabelSet allowed, double alpha, double beta,
                        std::span<double> out);

struct ThetaEstimate {
    std::vector<double> theta;
    bool empty_input = false;
};

/// Gibbs over one document with all topics allowed and phi fixed; theta is
/// averaged over the sweeps after burn-in. Empty input gives uniform theta.
ThetaEstimate infer_theta(const LldaModel& model, std::span<const std::size_t> words, const LldaConfig& config);

/// Labels whose theta reaches the threshold; the argmax when none does.
LabelSet decide_labels(std::span<const double> theta, std::span<const double> thresholds);

/// Per-label threshold maximizing that label's F on the given estimates,
/// searched over {0.05, 0.10, ..., 0.50}; ties keep the smaller threshold.
std::vector<double> tune_thresholds(const std::vector<std::vector<double>>& thetas, std::span<const LabelSet> gold,
                                    std::size_t num_topics);

}  // namespace ohc
