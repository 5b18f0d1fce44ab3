#include "ohc/llda.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "ohc/random.hpp"

namespace ohc {

void LldaConfig::validate() const {
    if (!(alpha > 0)) throw Error("alpha must be positive");
    if (!(beta > 0)) throw Error("beta must be positive");
    if (train_iterations == 0) throw Error("train_iterations must be positive");
    if (burn_in >= infer_iterations) throw Error("burn_in must be smaller than infer_iterations");
}

LldaModel::LldaModel(std::size_t num_topics, std::size_t vocab_size, double alpha, double beta)
    : num_topics_(num_topics),
      vocab_size_(vocab_size),
      alpha_(alpha),
      beta_(beta),
      topic_word_(num_topics * vocab_size, 0),
      topic_totals_(num_topics, 0) {
    if (num_topics == 0 || num_topics > LabelSet::kCapacity) throw Error("unsupported topic count");
    if (vocab_size == 0) throw Error("vocabulary size must be positive");
}

double LldaModel::phi(std::size_t topic, std::size_t word) const {
    return (count(topic, word) + beta_) /
           (static_cast<double>(topic_totals_[topic]) + static_cast<double>(vocab_size_) * beta_);
}

std::vector<double> LldaModel::phi_row(std::size_t topic) const {
    std::vector<double> row(vocab_size_);
    for (std::size_t w = 0; w < vocab_size_; ++w) row[w] = phi(topic, w);
    return row;
}

void LldaModel::set_thresholds(std::vector<double> t) {
    if (t.size() != num_topics_) throw Error("threshold count must equal topic count");
    thresholds_ = std::move(t);
}

void LldaModel::write(std::ostream& out) const {
    out << "llda " << num_topics_ << ' ' << vocab_size_ << ' ' << format_real(alpha_) << ' ' << format_real(beta_)
        << '\n';
    for (std::size_t k = 0; k < num_topics_; ++k) {
        for (std::size_t w = 0; w < vocab_size_; ++w) out << (w ? " " : "") << count(k, w);
        out << '\n';
    }
    if (!thresholds_.empty()) {
        out << "thresholds";
        for (double t : thresholds_) out << ' ' << format_real(t);
        out << '\n';
    }
}

LldaModel LldaModel::read(std::istream& in) {
    std::string magic;
    std::size_t n = 0, v = 0;
    std::string alpha, beta;
    if (!(in >> magic >> n >> v >> alpha >> beta) || magic != "llda") throw Error("llda model: bad header");
    LldaModel m(n, v, std::stod(alpha), std::stod(beta));
    for (std::size_t k = 0; k < n; ++k) {
        std::uint64_t total = 0;
        for (std::size_t w = 0; w < v; ++w) {
            std::uint32_t c = 0;
            if (!(in >> c)) throw Error("llda model: truncated count matrix");
            m.topic_word_[k * v + w] = c;
            total += c;
        }
        m.topic_totals_[k] = total;
    }
    std::string tag;
    if (in >> tag) {
        if (tag != "thresholds") throw Error("llda model: unexpected trailing data");
        std::vector<double> t(n);
        for (auto& x : t) {
            std::string s;
            if (!(in >> s)) throw Error("llda model: truncated thresholds");
            x = std::stod(s);
        }
        m.thresholds_ = std::move(t);
    }
    return m;
}

double llda_conditional(std::span<const std::uint32_t> doc_topic_counts,
                        std::span<const std::uint32_t> topic_word_counts, std::span<const std::uint64_t> topic_totals,
                        std::size_t word, std::size_t vocab_size, LabelSet allowed, double alpha, double beta,
                        std::span<double> out) {
    const double vbeta = static_cast<double>(vocab_size) * beta;
    double sum = 0.0;
    for (std::size_t k = 0; k < out.size(); ++k) {
        if (!allowed.contains(k)) {
            out[k] = 0.0;
            continue;
        }
        const double p = (doc_topic_counts[k] + alpha) * (topic_word_counts[k * vocab_size + word] + beta) /
                         (static_cast<double>(topic_totals[k]) + vbeta);
        out[k] = p;
        sum += p;
    }
    return sum;
}

namespace {

std::size_t sample_index(std::span<const double> weights, double total, Rng& rng) {
    double u = rng.uniform() * total;
    std::size_t last = 0;
    for (std::size_t k = 0; k < weights.size(); ++k) {
        if (weights[k] <= 0.0) continue;
        last = k;
        u -= weights[k];
        if (u < 0.0) return k;
    }
    return last;
}

}  // namespace

LldaModel fit_llda(std::span<const LabeledDoc> docs, std::size_t vocab_size, std::size_t num_topics,
                   const LldaConfig& config, const std::function<void(const LldaSweepView&)>& on_sweep) {
    config.validate();
    if (docs.empty()) throw Error("labeled LDA: empty training corpus");
    const LabelSet all = LabelSet::full(num_topics);
    for (const auto& d : docs) {
        if (d.labels.empty()) throw Error("unlabeled training instance");
        if ((d.labels & all) != d.labels) throw Error("labeled LDA: document label outside topic range");
        for (auto w : d.words)
            if (w >= vocab_size) throw Error("labeled LDA: word id outside vocabulary");
    }

    LldaModel model(num_topics, vocab_size, config.alpha, config.beta);
    Rng rng(config.seed);
    std::vector<std::vector<std::uint16_t>> z(docs.size());
    std::vector<std::uint32_t> ndk(docs.size() * num_topics, 0);
    auto& nkw = model.topic_word_;
    auto& nk = model.topic_totals_;

    for (std::size_t d = 0; d < docs.size(); ++d) {
        const auto allowed = docs[d].labels.indices();
        z[d].resize(docs[d].words.size());
        for (std::size_t i = 0; i < docs[d].words.size(); ++i) {
            const auto k = static_cast<std::uint16_t>(allowed[rng.below(allowed.size())]);
            z[d][i] = k;
            ++ndk[d * num_topics + k];
            ++nkw[k * vocab_size + docs[d].words[i]];
            ++nk[k];
        }
    }

    std::vector<double> weights(num_topics);
    for (std::size_t sweep = 0; sweep < config.train_iterations; ++sweep) {
        for (std::size_t d = 0; d < docs.size(); ++d) {
            const auto& doc = docs[d];
            std::span<std::uint32_t> doc_counts(ndk.data() + d * num_topics, num_topics);
            if (doc.labels.size() == 1) continue;  // a single allowed topic never moves
            for (std::size_t i = 0; i < doc.words.size(); ++i) {
                const std::size_t w = doc.words[i];
                const std::size_t old = z[d][i];
                --doc_counts[old];
                --nkw[old * vocab_size + w];
                --nk[old];
                const double total = llda_conditional(doc_counts, nkw, nk, w, vocab_size, doc.labels, config.alpha,
                                                      config.beta, weights);
                const std::size_t k = sample_index(weights, total, rng);
                assert(doc.labels.contains(k));
                z[d][i] = static_cast<std::uint16_t>(k);
                ++doc_counts[k];
                ++nkw[k * vocab_size + w];
                ++nk[k];
            }
        }
        if (on_sweep) on_sweep(LldaSweepView{sweep, docs, z, ndk, nkw, nk});
    }
    return model;
}

ThetaEstimate infer_theta(const LldaModel& model, std::span<const std::size_t> words, const LldaConfig& config) {
    config.validate();
    const std::size_t n = model.num_topics();
    ThetaEstimate est;
    if (words.empty()) {
        est.theta.assign(n, 1.0 / static_cast<double>(n));
        est.empty_input = true;
        return est;
    }
    // phi is fixed, so per-word topic weights are precomputed once.
    std::vector<double> phi(words.size() * n);
    for (std::size_t i = 0; i < words.size(); ++i) {
        if (words[i] >= model.vocab_size()) throw Error("labeled LDA: word id outside vocabulary");
        for (std::size_t k = 0; k < n; ++k) phi[i * n + k] = model.phi(k, words[i]);
    }
    Rng rng(config.seed);
    std::vector<std::size_t> z(words.size());
    std::vector<std::uint32_t> ndk(n, 0);
    for (auto& k : z) {
        k = rng.below(n);
        ++ndk[k];
    }
    std::vector<double> weights(n), acc(n, 0.0);
    std::size_t samples = 0;
    const double denom = static_cast<double>(words.size()) + static_cast<double>(n) * config.alpha;
    for (std::size_t sweep = 0; sweep < config.infer_iterations; ++sweep) {
        for (std::size_t i = 0; i < words.size(); ++i) {
            --ndk[z[i]];
            double total = 0.0;
            for (std::size_t k = 0; k < n; ++k) {
                weights[k] = (ndk[k] + config.alpha) * phi[i * n + k];
                total += weights[k];
            }
            z[i] = sample_index(weights, total, rng);
            ++ndk[z[i]];
        }
        if (sweep >= config.burn_in) {
            for (std::size_t k = 0; k < n; ++k) acc[k] += (ndk[k] + config.alpha) / denom;
            ++samples;
        }
    }
    est.theta.resize(n);
    double sum = 0.0;
    for (std::size_t k = 0; k < n; ++k) sum += est.theta[k] = acc[k] / static_cast<double>(samples);
    for (double& t : est.theta) t /= sum;
    return est;
}

LabelSet decide_labels(std::span<const double> theta, std::span<const double> thresholds) {
    if (theta.size() != thresholds.size()) throw Error("theta and thresholds differ in length");
    if (theta.empty()) return {};
    LabelSet out;
    std::size_t best = 0;
    for (std::size_t k = 0; k < theta.size(); ++k) {
        if (theta[k] >= thresholds[k]) out.insert(k);
        if (theta[k] > theta[best]) best = k;
    }
    if (out.empty()) out.insert(best);
    return out;
}

std::vector<double> tune_thresholds(const std::vector<std::vector<double>>& thetas, std::span<const LabelSet> gold,
                                    std::size_t num_topics) {
    if (thetas.size() != gold.size()) throw Error("threshold tuning: estimate and gold counts differ");
    std::vector<double> out(num_topics, 0.5);
    for (std::size_t k = 0; k < num_topics; ++k) {
        double best_f = -1.0;
        for (int step = 1; step <= 10; ++step) {
            const double t = 0.05 * step;
            std::size_t tp = 0, fp = 0, fn = 0;
            for (std::size_t i = 0; i < thetas.size(); ++i) {
                const bool predicted = thetas[i][k] >= t;
                const bool actual = gold[i].contains(k);
                tp += predicted && actual;
                fp += predicted && !actual;
                fn += !predicted && actual;
            }
            const double f = tp == 0 ? 0.0 : 2.0 * tp / (2.0 * tp + fp + fn);
            if (f > best_f) {
                best_f = f;
                out[k] = t;
            }
        }
    }
    return out;
}

}  // namespace ohc
