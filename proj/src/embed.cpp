#include "ohc/embed.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "ohc/random.hpp"
#include "ohc/schema.hpp"

namespace ohc {

namespace {

double sigmoid(double x) {
    if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

void skipgram_pair_gradient_into(std::span<const double> center, std::span<const double> context,
                                 const std::vector<std::span<const double>>& negatives, SkipGramGradient& g) {
    const std::size_t d = center.size();
    g.center.assign(d, 0.0);
    g.context.resize(d);
    g.negatives.resize(negatives.size());

    const double pos = sigmoid(dot(context, center));
    g.loss = -std::log(std::max(pos, 1e-300));
    const double c = pos - 1.0;
    for (std::size_t i = 0; i < d; ++i) {
        g.context[i] = c * center[i];
        g.center[i] += c * context[i];
    }
    for (std::size_t n = 0; n < negatives.size(); ++n) {
        const double neg = sigmoid(dot(negatives[n], center));
        g.loss -= std::log(std::max(1.0 - neg, 1e-300));
        auto& gn = g.negatives[n];
        gn.resize(d);
        for (std::size_t i = 0; i < d; ++i) {
            gn[i] = neg * center[i];
            g.center[i] += neg * negatives[n][i];
        }
    }
}

// Sampling distribution proportional to count^0.75.
class NegativeSampler {
public:
    explicit NegativeSampler(const std::vector<std::uint64_t>& counts) {
        cumulative_.reserve(counts.size());
        double total = 0.0;
        for (auto c : counts) {
            total += std::pow(static_cast<double>(c), 0.75);
            cumulative_.push_back(total);
        }
        total_ = total;
    }
    std::size_t draw(Rng& rng) const {
        const double x = rng.uniform() * total_;
        auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), x);
        return static_cast<std::size_t>(std::min<std::ptrdiff_t>(it - cumulative_.begin(),
                                                                 static_cast<std::ptrdiff_t>(cumulative_.size()) - 1));
    }

private:
    std::vector<double> cumulative_;
    double total_ = 0.0;
};

}  // namespace

void EmbedConfig::validate() const {
    if (dim == 0) throw Error("embedding dimension must be positive");
    if (window < 1) throw Error("window must be at least 1");
    if (negatives < 1) throw Error("negatives must be at least 1");
    if (epochs < 1) throw Error("epochs must be at least 1");
    if (!(initial_lr > 0)) throw Error("initial learning rate must be positive");
    if (!(subsample_threshold >= 0)) throw Error("subsample threshold must be non-negative");
}

EmbeddingTable::EmbeddingTable(Vocabulary vocab, std::size_t dim)
    : vocab_(std::move(vocab)), dim_(dim), data_(vocab_.size() * dim, 0.0) {
    if (dim == 0) throw Error("embedding dimension must be positive");
}

bool EmbeddingTable::all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](double x) { return std::isfinite(x); });
}

void EmbeddingTable::write_text(std::ostream& out) const {
    out << rows() << ' ' << dim_ << '\n';
    for (std::size_t r = 0; r < rows(); ++r) {
        out << vocab_.token(r);
        for (double x : row(r)) out << ' ' << format_real(x);
        out << '\n';
    }
}

EmbeddingTable EmbeddingTable::read_text(std::istream& in) {
    std::size_t v = 0, d = 0;
    std::string line;
    if (!std::getline(in, line)) throw Error("embedding file: missing header");
    {
        std::istringstream header(line);
        if (!(header >> v >> d) || d == 0) throw Error("embedding file: malformed header");
    }
    std::ostringstream vocab_text;
    std::vector<double> values;
    values.reserve(v * d);
    for (std::size_t r = 0; r < v; ++r) {
        if (!std::getline(in, line)) throw Error("embedding file: truncated");
        std::istringstream row(line);
        std::string token;
        row >> token;
        vocab_text << token << '\t' << r << '\n';
        for (std::size_t k = 0; k < d; ++k) {
            std::string num;
            if (!(row >> num)) throw Error("embedding file: short row for '" + token + "'");
            values.push_back(std::stod(num));
        }
    }
    std::istringstream vin(vocab_text.str());
    EmbeddingTable table(Vocabulary::read(vin), d);
    table.data_ = std::move(values);
    return table;
}

void EmbeddingTable::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write embeddings " + path.string());
    write_text(out);
}

EmbeddingTable EmbeddingTable::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot read embeddings " + path.string());
    return read_text(in);
}

SkipGramGradient skipgram_pair_gradient(std::span<const double> center, std::span<const double> context,
                                        const std::vector<std::span<const double>>& negatives) {
    SkipGramGradient g;
    skipgram_pair_gradient_into(center, context, negatives, g);
    return g;
}

double cosine(std::span<const double> a, std::span<const double> b) {
    const double na = std::sqrt(dot(a, a));
    const double nb = std::sqrt(dot(b, b));
    if (na == 0 || nb == 0) return 0.0;
    return dot(a, b) / (na * nb);
}

EmbeddingTable train_embeddings(const std::vector<Tokens>& sequences, const Vocabulary& vocab,
                                const EmbedConfig& config) {
    config.validate();
    if (vocab.size() < 2) throw Error("insufficient data: vocabulary has no trainable tokens");

    std::vector<std::vector<std::size_t>> corpus;
    std::vector<std::uint64_t> counts(vocab.size(), 0);
    std::uint64_t total = 0;
    for (const auto& seq : sequences) {
        std::vector<std::size_t> ids;
        for (const auto& t : seq) {
            const std::size_t id = vocab.id(t);
            if (id == Vocabulary::kUnkId) continue;
            ids.push_back(id);
            ++counts[id];
            ++total;
        }
        if (!ids.empty()) corpus.push_back(std::move(ids));
    }
    if (total == 0) throw Error("insufficient data: no in-vocabulary tokens");

    const std::size_t dim = config.dim;
    EmbeddingTable table(vocab, dim);
    std::vector<double> output(vocab.size() * dim, 0.0);
    Rng rng(config.seed);
    for (std::size_t r = 1; r < vocab.size(); ++r)
        for (double& x : table.row(r)) x = (rng.uniform() - 0.5) / static_cast<double>(dim);

    std::vector<double> keep_prob(vocab.size(), 1.0);
    if (config.subsample_threshold > 0) {
        const double t = config.subsample_threshold * static_cast<double>(total);
        for (std::size_t r = 1; r < vocab.size(); ++r) {
            if (counts[r] == 0) continue;
            const double f = static_cast<double>(counts[r]);
            keep_prob[r] = std::min(1.0, (std::sqrt(f / t) + 1.0) * t / f);
        }
    }
    std::vector<std::uint64_t> sampler_counts = counts;
    sampler_counts[Vocabulary::kUnkId] = 0;
    NegativeSampler sampler(sampler_counts);

    auto out_row = [&](std::size_t id) { return std::span<double>(output.data() + id * dim, dim); };

    const double schedule_total = static_cast<double>(config.epochs) * static_cast<double>(total) + 1.0;
    std::uint64_t processed = 0;
    SkipGramGradient grad;
    std::vector<std::span<const double>> negative_rows;
    std::vector<std::size_t> negative_ids;
    std::vector<std::size_t> kept;

    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        for (const auto& sentence : corpus) {
            kept.clear();
            for (std::size_t id : sentence)
                if (keep_prob[id] >= 1.0 || rng.uniform() < keep_prob[id]) kept.push_back(id);
            processed += sentence.size();
            const double lr =
                config.initial_lr * std::max(1e-4, 1.0 - static_cast<double>(processed) / schedule_total);

            for (std::size_t pos = 0; pos < kept.size(); ++pos) {
                const std::size_t center = kept[pos];
                const std::size_t reach = 1 + rng.below(config.window);
                const std::size_t lo = pos >= reach ? pos - reach : 0;
                const std::size_t hi = std::min(kept.size() - 1, pos + reach);
                for (std::size_t c = lo; c <= hi; ++c) {
                    if (c == pos) continue;
                    const std::size_t context = kept[c];
                    negative_ids.clear();
                    negative_rows.clear();
                    for (std::size_t k = 0; k < config.negatives; ++k) {
                        const std::size_t n = sampler.draw(rng);
                        if (n == context) continue;
                        negative_ids.push_back(n);
                        negative_rows.emplace_back(out_row(n));
                    }
                    skipgram_pair_gradient_into(table.row(center), out_row(context), negative_rows, grad);
                    auto v = table.row(center);
                    auto u = out_row(context);
                    for (std::size_t i = 0; i < dim; ++i) u[i] -= lr * grad.context[i];
                    for (std::size_t k = 0; k < negative_ids.size(); ++k) {
                        auto un = out_row(negative_ids[k]);
                        for (std::size_t i = 0; i < dim; ++i) un[i] -= lr * grad.negatives[k][i];
                    }
                    for (std::size_t i = 0; i < dim; ++i) v[i] -= lr * grad.center[i];
                }
            }
        }
        if (!table.all_finite()) throw Error("embedding training diverged (non-finite values)");
    }

    auto unk = table.row(Vocabulary::kUnkId);
    std::fill(unk.begin(), unk.end(), 0.0);
    for (std::size_t r = 1; r < vocab.size(); ++r)
        for (std::size_t i = 0; i < dim; ++i) unk[i] += table.row(r)[i];
    for (double& x : unk) x /= static_cast<double>(vocab.size() - 1);
    return table;
}

}  // namespace ohc
