#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "ohc/textprep.hpp"

namespace ohc {

struct EmbedConfig {
    std::size_t dim = 100;
    std::size_t window = 5;
    std::size_t negatives = 5;
    std::size_t epochs = 5;
    double initial_lr = 0.025;
    double subsample_threshold = 1e-3;
    std::uint64_t seed = 1;

    /// Throws Error on an invalid setting.
    void validate() const;
};

/// One row per vocabulary id, including the unknown-token row 0.
class EmbeddingTable {
public:
    EmbeddingTable(Vocabulary vocab, std::size_t dim);

    std::size_t dim() const { return dim_; }
    std::size_t rows() const { return vocab_.size(); }
    const Vocabulary& vocab() const { return vocab_; }

    std::span<const double> row(std::size_t id) const { return {data_.data() + id * dim_, dim_}; }
    std::span<double> row(std::size_t id) { return {data_.data() + id * dim_, dim_}; }
    /// Out-of-vocabulary tokens share the unknown-token row.
    std::span<const double> lookup(std::string_view token) const { return row(vocab_.id(token)); }

    const std::vector<double>& data() const { return data_; }
    bool all_finite() const;

    /// "V D" header, then "token v1 ... vD" per row, 9 significant digits.
    void write_text(std::ostream& out) const;
    static EmbeddingTable read_text(std::istream& in);
    void save(const std::filesystem::path& path) const;
    static EmbeddingTable load(const std::filesystem::path& path);

    friend bool operator==(const EmbeddingTable&, const EmbeddingTable&) = default;

private:
    Vocabulary vocab_;
    std::size_t dim_;
    std::vector<double> data_;
};

/// Skip-gram with negative sampling, single-threaded and deterministic per
/// seed. Tokens mapping to the unknown id are skipped; afterwards the unknown
/// row is set to the mean of the trained rows. Throws Error("insufficient
/// data") when there is nothing to train on.
EmbeddingTable train_embeddings(const std::vector<Tokens>& sequences, const Vocabulary& vocab,
                                const EmbedConfig& config);

/// Loss of one (center, context) pair with sampled negatives:
///   -log sigmoid(u_o . v_c) - sum_n log sigmoid(-u_n . v_c)
/// and its gradient with respect to every vector involved.
struct SkipGramGradient {
    double loss = 0.0;
    std::vector<double> center;                 // d/dv_c
    std::vector<double> context;                // d/du_o
    std::vector<std::vector<double>> negatives;  // d/du_n
};

SkipGramGradient skipgram_pair_gradient(std::span<const double> center, std::span<const double> context,
                                        const std::vector<std::span<const double>>& negatives);

double cosine(std::span<const double> a, std::span<const double> b);

}  // namespace ohc
