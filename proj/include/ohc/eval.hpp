#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "ohc/schema.hpp"

namespace ohc {

struct Prf {
    double precision = 0.0;
    double recall = 0.0;
    double f = 0.0;
};

struct LabelCounts {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;

    /// 0/0 is taken as 0 for P, R and F.
    Prf prf() const;
    LabelCounts& operator+=(const LabelCounts& o) {
        tp += o.tp;
        fp += o.fp;
        fn += o.fn;
        return *this;
    }
    friend bool operator==(const LabelCounts&, const LabelCounts&) = default;
};

/// Post ids shuffled by seed and dealt into k folds whose sizes differ by at
/// most one. Throws Error when there are fewer than k ids or k < 2.
std::vector<std::vector<std::string>> kfold_split(std::span<const std::string> post_ids, std::size_t k,
                                                  std::uint64_t seed);

/// Per-label counts over paired gold and predicted sets. Throws Error on a
/// length mismatch.
std::vector<LabelCounts> label_counts(std::span<const LabelSet> gold, std::span<const LabelSet> pred,
                                      std::size_t num_labels = TopicSchema::N);
Prf micro_prf(std::span<const LabelSet> gold, std::span<const LabelSet> pred, std::size_t num_labels = TopicSchema::N);
Prf per_label_prf(std::span<const LabelSet> gold, std::span<const LabelSet> pred, std::size_t label);

/// Every prediction is the full label set.
std::vector<LabelSet> baseline_all(std::size_t n, std::size_t num_labels = TopicSchema::N);

/// Binary Cohen's kappa on presence of one label. When chance agreement is 1
/// the value is 1 for perfect observed agreement and 0 otherwise.
double cohen_kappa(std::span<const LabelSet> a, std::span<const LabelSet> b, std::size_t label);

struct KappaReport {
    std::vector<double> per_label;
    double average = 0.0;  // unweighted mean over labels
};
KappaReport kappa_report(std::span<const LabelSet> a, std::span<const LabelSet> b,
                         std::size_t num_labels = TopicSchema::N);

struct EvalReport {
    std::string system;
    std::vector<LabelCounts> per_label = std::vector<LabelCounts>(TopicSchema::N);
    std::size_t folds = 0;
    std::uint64_t seed = 0;
    std::size_t instances = 0;

    void add(std::span<const LabelSet> gold, std::span<const LabelSet> pred);
    /// Sums of the per-label counts.
    LabelCounts micro_counts() const;
    Prf micro() const { return micro_counts().prf(); }
};

/// Aligned text table: a "Micro" row then one row per label, F in percent
/// with one decimal, one column per system.
void write_report_text(std::span<const EvalReport> reports, std::ostream& out);
/// system,label,tp,fp,fn,precision,recall,f with 9 significant digits.
void write_report_csv(std::span<const EvalReport> reports, std::ostream& out);

/// "Avg K" row then one row per label, one column per coder pair.
void write_kappa_text(std::span<const std::string> pair_names, std::span<const KappaReport> reports,
                      std::ostream& out);

}  // namespace ohc
