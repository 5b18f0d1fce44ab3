#include "ohc/linear.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "ohc/random.hpp"

namespace ohc {

std::string_view feature_mode_name(FeatureMode m) { return m == FeatureMode::Bow ? "bow" : "emb"; }

double FeatureVector::dot(std::span<const double> w) const {
    double s = 0.0;
    if (mode == FeatureMode::Bow) {
        for (const auto& [id, v] : sparse) s += w[id] * v;
    } else {
        for (std::size_t i = 0; i < dense.size(); ++i) s += w[i] * dense[i];
    }
    return s;
}

void FeatureVector::add_to(std::span<double> w, double scale) const {
    if (mode == FeatureMode::Bow) {
        for (const auto& [id, v] : sparse) w[id] += scale * v;
    } else {
        for (std::size_t i = 0; i < dense.size(); ++i) w[i] += scale * dense[i];
    }
}

FeatureVector featurize_bow(const Tokens& tokens, const Vocabulary& vocab, bool normalize) {
    FeatureVector f;
    f.mode = FeatureMode::Bow;
    f.dim = vocab.size();
    std::map<std::uint32_t, double> counts;
    for (const auto& t : tokens) counts[static_cast<std::uint32_t>(vocab.id(t))] += 1.0;
    f.sparse.assign(counts.begin(), counts.end());
    double sq = 0.0;
    for (const auto& [_, v] : f.sparse) sq += v * v;
    f.norm = std::sqrt(sq);
    if (normalize && f.norm > 0) {
        for (auto& [_, v] : f.sparse) v /= f.norm;
        f.norm = 1.0;
    }
    return f;
}

FeatureVector featurize_emb(const Tokens& tokens, const EmbeddingTable& table) {
    FeatureVector f;
    f.mode = FeatureMode::Emb;
    f.dim = table.dim();
    f.dense.assign(table.dim(), 0.0);
    for (const auto& t : tokens) {
        const auto row = table.lookup(t);
        for (std::size_t i = 0; i < row.size(); ++i) f.dense[i] += row[i];
    }
    if (!tokens.empty())
        for (double& x : f.dense) x /= static_cast<double>(tokens.size());
    double sq = 0.0;
    for (double x : f.dense) sq += x * x;
    f.norm = std::sqrt(sq);
    return f;
}

void LinearConfig::validate() const {
    if (!(C > 0)) throw Error("C must be positive");
    if (!(tolerance > 0)) throw Error("linear tolerance must be positive");
}

std::uint64_t LinearConfig::seed_for(std::size_t label) const {
    if (auto it = label_seed_override.find(label); it != label_seed_override.end()) return it->second;
    // splitmix64 finalizer over (seed, label) keeps per-label streams unrelated.
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (label + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

namespace {

double label_sign(const LabeledFeatures& d, std::size_t label) { return d.labels.contains(label) ? 1.0 : -1.0; }

std::size_t common_dim(std::span<const LabeledFeatures> data) {
    if (data.empty()) throw Error("linear training: empty dataset");
    const auto mode = data.front().x.mode;
    const auto dim = data.front().x.dim;
    for (const auto& d : data)
        if (d.x.mode != mode || d.x.dim != dim) throw Error("linear training: mixed feature shapes");
    return dim;
}

// Exact minimizer of the hinge term over the unregularized bias. Each example
// contributes a kink at y - w.x; the sum is minimized where its slope turns
// non-negative, taking the middle of a flat stretch.
double optimal_bias(std::span<const double> w, std::span<const LabeledFeatures> data, std::size_t label) {
    std::vector<std::pair<double, bool>> kinks;  // (position, positive example)
    kinks.reserve(data.size());
    double slope = 0.0;
    for (const auto& d : data) {
        const double y = label_sign(d, label);
        kinks.emplace_back(y - d.x.dot(w), y > 0);
        if (y > 0) slope -= 1.0;
    }
    if (slope == 0.0) {
        // No positives: any b <= min(-1 - w.x) zeroes the loss.
        double lo = kinks.empty() ? 0.0 : kinks.front().first;
        for (const auto& k : kinks) lo = std::min(lo, k.first);
        return lo;
    }
    std::sort(kinks.begin(), kinks.end());
    for (std::size_t i = 0; i < kinks.size(); ++i) {
        slope += 1.0;
        if (slope > 0.0) return kinks[i].first;
        if (slope == 0.0) return i + 1 < kinks.size() ? 0.5 * (kinks[i].first + kinks[i + 1].first) : kinks[i].first;
    }
    return kinks.back().first;
}

}  // namespace

double hinge_objective(std::span<const double> w, double b, std::span<const LabeledFeatures> data, std::size_t label,
                       double C) {
    const double m = static_cast<double>(data.size());
    double loss = 0.0;
    for (const auto& d : data) loss += std::max(0.0, 1.0 - label_sign(d, label) * (d.x.dot(w) + b));
    double sq = 0.0;
    for (double x : w) sq += x * x;
    return loss / m + sq / (2.0 * C * m);
}

double hinge_subgradient(std::span<const double> w, double b, std::span<const LabeledFeatures> data,
                         std::size_t label, double C, std::span<double> grad_w) {
    const double m = static_cast<double>(data.size());
    for (std::size_t i = 0; i < w.size(); ++i) grad_w[i] = w[i] / (C * m);
    double grad_b = 0.0;
    for (const auto& d : data) {
        const double y = label_sign(d, label);
        if (y * (d.x.dot(w) + b) < 1.0) {
            d.x.add_to(grad_w, -y / m);
            grad_b -= y / m;
        }
    }
    return grad_b;
}

namespace {

double feature_dot(const FeatureVector& a, const FeatureVector& b) {
    double s = 0.0;
    if (a.mode == FeatureMode::Emb) {
        for (std::size_t i = 0; i < a.dense.size(); ++i) s += a.dense[i] * b.dense[i];
        return s;
    }
    auto i = a.sparse.begin(), j = b.sparse.begin();
    while (i != a.sparse.end() && j != b.sparse.end()) {
        if (i->first < j->first) ++i;
        else if (j->first < i->first) ++j;
        else s += (i++)->second * (j++)->second;
    }
    return s;
}

// Pairwise inner products are cached when they fit; larger sets compute
// margins from w on every step and get a shorter final phase.
constexpr std::size_t kGramLimit = 4096;
constexpr std::size_t kUncachedStepsPerExample = 20;

std::vector<double> gram_matrix(std::span<const LabeledFeatures> data) {
    const std::size_t m = data.size();
    std::vector<double> k(m * m);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = i; j < m; ++j) k[i * m + j] = k[j * m + i] = feature_dot(data[i].x, data[j].x);
    return k;
}

// Dual of C * sum hinge + |w|^2 / 2 with w = sum alpha_i y_i x_i, 0 <= alpha <= C
// and sum alpha_i y_i = 0 (the bias). Every step moves one pair (i, j) along
// the constraint: alpha_i += y_i d, alpha_j -= y_j d, w += d (x_i - x_j).
class PairSolver {
public:
    PairSolver(std::span<const LabeledFeatures> data, std::size_t label, double C, std::size_t dim,
               const std::vector<double>* gram)
        : data_(data), gram_(gram), C_(C), alpha_(data.size(), 0.0), y_(data.size()), w_(dim, 0.0) {
        for (std::size_t i = 0; i < data.size(); ++i) y_[i] = label_sign(data[i], label);
        if (gram_) v_ = y_;
    }

    const std::vector<double>& weights() const { return w_; }

    // sum alpha - |w|^2 / 2, scaled by 1 / (C m) to match hinge_objective.
    double dual_objective() const {
        double a = 0.0, ww = 0.0;
        for (double x : alpha_) a += x;
        for (double x : w_) ww += x * x;
        return (a - 0.5 * ww) / (C_ * static_cast<double>(alpha_.size()));
    }

    // One shuffled sweep pairing order[k] with partner[k].
    void sweep(std::span<const std::size_t> order, std::span<const std::size_t> partner) {
        for (std::size_t k = 0; k < order.size(); ++k) {
            const std::size_t i = order[k], j = partner[k];
            if (i != j) step(i, j, violation(i), violation(j));
        }
    }

    // Maximal violating pair steps until the optimality gap is below tol.
    void polish(double tol, std::size_t max_steps) {
        const std::size_t m = alpha_.size();
        if (!gram_) max_steps = std::min(max_steps, kUncachedStepsPerExample * m);
        std::vector<double> fresh(m);
        for (std::size_t it = 0; it < max_steps; ++it) {
            const std::vector<double>* v = &v_;
            if (!gram_) {
                for (std::size_t t = 0; t < m; ++t) fresh[t] = violation(t);
                v = &fresh;
            }
            std::size_t i = m, j = m;
            for (std::size_t t = 0; t < m; ++t)
                if (can_raise(t) && (i == m || (*v)[t] > (*v)[i])) i = t;
            if (i == m) return;
            if (gram_) {
                // Second-order choice: the partner giving the largest dual gain.
                double best = 0.0, lowest = std::numeric_limits<double>::infinity();
                for (std::size_t t = 0; t < m; ++t) {
                    if (!can_lower(t)) continue;
                    lowest = std::min(lowest, (*v)[t]);
                    const double gap = (*v)[i] - (*v)[t];
                    if (gap <= 0.0) continue;
                    const double q = std::max(kernel(i, i) + kernel(t, t) - 2.0 * kernel(i, t), 1e-12);
                    if (const double gain = gap * gap / q; gain > best) {
                        best = gain;
                        j = t;
                    }
                }
                if (j == m || (*v)[i] - lowest < tol) return;
            } else {
                for (std::size_t t = 0; t < m; ++t)
                    if (can_lower(t) && (j == m || (*v)[t] < (*v)[j])) j = t;
                if (j == m || (*v)[i] - (*v)[j] < tol) return;
            }
            if (!step(i, j, (*v)[i], (*v)[j])) return;
        }
    }

private:
    // y_t * (1 - y_t w.x_t): moving along +y_t raises the dual at this rate.
    double violation(std::size_t t) const { return gram_ ? v_[t] : y_[t] - data_[t].x.dot(w_); }
    bool can_raise(std::size_t t) const { return y_[t] > 0 ? alpha_[t] < C_ : alpha_[t] > 0; }
    bool can_lower(std::size_t t) const { return y_[t] > 0 ? alpha_[t] > 0 : alpha_[t] < C_; }
    double kernel(std::size_t i, std::size_t j) const {
        return gram_ ? (*gram_)[i * alpha_.size() + j] : feature_dot(data_[i].x, data_[j].x);
    }

    bool step(std::size_t i, std::size_t j, double vi, double vj) {
        const double q = kernel(i, i) + kernel(j, j) - 2.0 * kernel(i, j);
        if (q <= 1e-12) return false;
        double lo = -std::numeric_limits<double>::infinity(), hi = std::numeric_limits<double>::infinity();
        auto bound = [&](double a, double dir) {  // 0 <= a + dir * d <= C
            if (dir > 0) {
                lo = std::max(lo, -a);
                hi = std::min(hi, C_ - a);
            } else {
                lo = std::max(lo, a - C_);
                hi = std::min(hi, a);
            }
        };
        bound(alpha_[i], y_[i]);
        bound(alpha_[j], -y_[j]);
        const double d = std::clamp((vi - vj) / q, lo, hi);
        if (d == 0.0) return false;
        alpha_[i] = std::clamp(alpha_[i] + y_[i] * d, 0.0, C_);
        alpha_[j] = std::clamp(alpha_[j] - y_[j] * d, 0.0, C_);
        data_[i].x.add_to(w_, d);
        data_[j].x.add_to(w_, -d);
        if (gram_) {
            const std::size_t m = alpha_.size();
            const double* ki = gram_->data() + i * m;
            const double* kj = gram_->data() + j * m;
            for (std::size_t t = 0; t < m; ++t) v_[t] -= d * (ki[t] - kj[t]);
        }
        return true;
    }

    std::span<const LabeledFeatures> data_;
    const std::vector<double>* gram_;
    double C_;
    std::vector<double> alpha_, y_, v_, w_;
};

BinaryClassifier train_binary_with(std::span<const LabeledFeatures> data, std::size_t label,
                                   const LinearConfig& config, const std::vector<double>* gram, BinaryTrace* trace) {
    const std::size_t dim = common_dim(data);
    const std::size_t m = data.size();
    PairSolver solver(data, label, config.C, dim, gram);

    Rng rng(config.seed_for(label));
    std::vector<std::size_t> order(m), partner(m);
    for (std::size_t i = 0; i < m; ++i) order[i] = partner[i] = i;
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        rng.shuffle(order);
        rng.shuffle(partner);
        solver.sweep(order, partner);
        if (trace) {
            const auto& w = solver.weights();
            trace->epoch_objective.push_back(hinge_objective(w, optimal_bias(w, data, label), data, label, config.C));
            trace->epoch_dual.push_back(solver.dual_objective());
        }
    }
    solver.polish(config.tolerance, config.max_polish_steps);

    BinaryClassifier out{solver.weights(), 0.0};
    out.bias = optimal_bias(out.weights, data, label);
    if (trace) {
        trace->final_objective = hinge_objective(out.weights, out.bias, data, label, config.C);
        trace->final_dual = solver.dual_objective();
    }
    return out;
}

}  // namespace

BinaryClassifier train_binary(std::span<const LabeledFeatures> data, std::size_t label, const LinearConfig& config,
                              BinaryTrace* trace) {
    config.validate();
    common_dim(data);
    std::vector<double> gram;
    if (data.size() <= kGramLimit) gram = gram_matrix(data);
    return train_binary_with(data, label, config, gram.empty() ? nullptr : &gram, trace);
}

LinearModel::LinearModel(FeatureMode mode, std::size_t dim, std::vector<BinaryClassifier> per_label)
    : mode_(mode), dim_(dim), per_label_(std::move(per_label)) {
    for (const auto& c : per_label_)
        if (c.weights.size() != dim_) throw Error("linear model: weight vector has wrong dimension");
}

std::vector<double> LinearModel::margins(const FeatureVector& x) const {
    if (x.mode != mode_) throw Error("linear model: feature mode mismatch");
    if (x.dim != dim_) throw Error("linear model: feature dimension mismatch");
    std::vector<double> out(per_label_.size());
    for (std::size_t l = 0; l < per_label_.size(); ++l) out[l] = x.dot(per_label_[l].weights) + per_label_[l].bias;
    return out;
}

LabelSet LinearModel::predict(const FeatureVector& x) const {
    LabelSet out;
    const auto m = margins(x);
    for (std::size_t l = 0; l < m.size(); ++l)
        if (m[l] > 0) out.insert(l);
    return out;
}

void LinearModel::write(std::ostream& out) const {
    out << "linear " << feature_mode_name(mode_) << ' ' << dim_ << ' ' << per_label_.size() << '\n';
    for (std::size_t l = 0; l < per_label_.size(); ++l) {
        const auto& c = per_label_[l];
        out << (l < TopicSchema::N ? std::string(TopicSchema::code(l)) : "L" + std::to_string(l)) << ' '
            << format_real(c.bias);
        for (std::size_t k = 0; k < dim_; ++k) {
            if (mode_ == FeatureMode::Bow) {
                if (c.weights[k] != 0.0) out << ' ' << k << ':' << format_real(c.weights[k]);
            } else {
                out << ' ' << format_real(c.weights[k]);
            }
        }
        out << '\n';
    }
}

LinearModel LinearModel::read(std::istream& in) {
    std::string magic, mode_name;
    std::size_t dim = 0, labels = 0;
    if (!(in >> magic >> mode_name >> dim >> labels) || magic != "linear") throw Error("linear model: bad header");
    FeatureMode mode;
    if (mode_name == "bow") mode = FeatureMode::Bow;
    else if (mode_name == "emb") mode = FeatureMode::Emb;
    else throw Error("linear model: unknown feature mode '" + mode_name + "'");
    std::string line;
    std::getline(in, line);
    std::vector<BinaryClassifier> per_label;
    for (std::size_t l = 0; l < labels; ++l) {
        if (!std::getline(in, line)) throw Error("linear model: truncated");
        std::istringstream row(line);
        std::string code, bias;
        row >> code >> bias;
        BinaryClassifier c{std::vector<double>(dim, 0.0), std::stod(bias)};
        std::string item;
        std::size_t k = 0;
        while (row >> item) {
            if (mode == FeatureMode::Bow) {
                const auto colon = item.find(':');
                if (colon == std::string::npos) throw Error("linear model: expected id:weight");
                const std::size_t id = std::stoul(item.substr(0, colon));
                if (id >= dim) throw Error("linear model: feature id out of range");
                c.weights[id] = std::stod(item.substr(colon + 1));
            } else {
                if (k >= dim) throw Error("linear model: too many weights");
                c.weights[k++] = std::stod(item);
            }
        }
        if (mode == FeatureMode::Emb && k != dim) throw Error("linear model: too few weights");
        per_label.push_back(std::move(c));
    }
    return LinearModel(mode, dim, std::move(per_label));
}

LinearModel train_ovr(std::span<const LabeledFeatures> data, std::size_t num_labels, const LinearConfig& config,
                      std::vector<std::string>* warnings) {
    config.validate();
    const std::size_t dim = common_dim(data);
    std::vector<double> gram;
    std::vector<BinaryClassifier> per_label;
    for (std::size_t l = 0; l < num_labels; ++l) {
        std::size_t positives = 0;
        for (const auto& d : data) positives += d.labels.contains(l);
        const std::string code = l < TopicSchema::N ? std::string(TopicSchema::code(l)) : std::to_string(l);
        if (positives == 0 || positives == data.size()) {
            const bool none = positives == 0;
            if (warnings)
                warnings->push_back("label " + code + (none ? " has no positive" : " has no negative") +
                                    " training examples; using a constant classifier");
            per_label.push_back({std::vector<double>(dim, 0.0), none ? -1.0 : 1.0});
            continue;
        }
        if (gram.empty() && data.size() <= kGramLimit) gram = gram_matrix(data);
        per_label.push_back(train_binary_with(data, l, config, gram.empty() ? nullptr : &gram, nullptr));
    }
    return LinearModel(data.front().x.mode, dim, std::move(per_label));
}

LabelSet predict_linear(const LinearModel& model, const FeatureVector& x) { return model.predict(x); }

}  // namespace ohc
