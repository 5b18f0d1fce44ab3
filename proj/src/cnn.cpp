#include "ohc/cnn.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "ohc/random.hpp"

namespace ohc {

void CnnConfig::validate() const {
    if (hidden == 0) throw Error("CNN: H must be positive");
    if (filter_widths.empty()) throw Error("CNN: at least one filter width required");
    for (auto w : filter_widths)
        if (w < 1) throw Error("CNN: filter widths must be at least 1");
    if (hidden < filter_widths.size()) throw Error("CNN: fewer filters than widths");
    if (num_labels == 0 || num_labels > LabelSet::kCapacity) throw Error("CNN: unsupported label count");
    if (!(alpha > 0 && alpha <= 1)) throw Error("CNN: alpha must be in (0, 1]");
    if (!(learning_rate > 0)) throw Error("CNN: learning rate must be positive");
    if (batch_size == 0) throw Error("CNN: batch size must be positive");
}

std::vector<std::size_t> CnnConfig::filters_per_width() const {
    std::vector<std::size_t> out(filter_widths.size(), hidden / filter_widths.size());
    for (std::size_t i = 0; i < hidden % filter_widths.size(); ++i) ++out[i];
    return out;
}

CnnModel::CnnModel(const CnnConfig& config, EmbeddingTable embeddings)
    : config_(config), embeddings_(std::move(embeddings)) {
    config_.validate();
    const std::size_t d = embeddings_.dim();
    const auto counts = config_.filters_per_width();
    std::size_t offset = 0, filter = 0;
    for (std::size_t g = 0; g < counts.size(); ++g) {
        FilterGroup grp;
        grp.width = config_.filter_widths[g];
        grp.count = counts[g];
        grp.weight_offset = offset;
        offset += grp.width * d * grp.count;
        grp.bias_offset = offset;
        offset += grp.count;
        grp.first_filter = filter;
        filter += grp.count;
        groups_.push_back(grp);
    }
    output_offset_ = offset;
    offset += config_.num_labels * config_.hidden + config_.num_labels;
    params_.assign(offset, 0.0);
}

CnnModel CnnModel::initialize(const CnnConfig& config, EmbeddingTable embeddings) {
    CnnModel m(config, std::move(embeddings));
    Rng rng(config.seed);
    for (const auto& g : m.groups_)
        for (std::size_t i = 0; i < g.width * m.dim() * g.count; ++i)
            m.params_[g.weight_offset + i] = rng.uniform(-config.init_range, config.init_range);
    return m;
}

std::size_t CnnModel::max_width() const {
    return *std::max_element(config_.filter_widths.begin(), config_.filter_widths.end());
}

std::vector<std::size_t> CnnModel::encode(const Tokens& tokens) const {
    return embeddings_.vocab().ids(tokens);
}

bool CnnModel::all_finite() const {
    return std::all_of(params_.begin(), params_.end(), [](double x) { return std::isfinite(x); }) &&
           embeddings_.all_finite();
}

void CnnModel::build_sentence(std::span<const std::size_t> ids, std::vector<double>& x, std::size_t& rows) const {
    const std::size_t d = dim();
    rows = std::max(ids.size(), max_width());
    x.assign(rows * d, 0.0);
    for (std::size_t t = 0; t < ids.size(); ++t) {
        if (ids[t] == kPadToken) continue;
        if (ids[t] >= embeddings_.rows()) throw Error("CNN: token id outside the embedding table");
        const auto row = embeddings_.row(ids[t]);
        std::copy(row.begin(), row.end(), x.begin() + static_cast<std::ptrdiff_t>(t * d));
    }
}

namespace {

// scores[p][f] = bias[f] + sum_j x[p*D + j] * w[j*count + f], four positions
// at a time so each weight row is loaded once per block.
void convolve(const double* x, std::size_t positions, std::size_t d, const FilterGroup& g, const double* w,
              const double* bias, double* scores) {
    const std::size_t c = g.count;
    const std::size_t span = g.width * d;
    for (std::size_t p = 0; p < positions; ++p) std::copy(bias, bias + c, scores + p * c);
    std::size_t p = 0;
    for (; p + 4 <= positions; p += 4) {
        double* s0 = scores + p * c;
        double* s1 = s0 + c;
        double* s2 = s1 + c;
        double* s3 = s2 + c;
        const double* xp = x + p * d;
        for (std::size_t j = 0; j < span; ++j) {
            const double x0 = xp[j], x1 = xp[j + d], x2 = xp[j + 2 * d], x3 = xp[j + 3 * d];
            const double* wr = w + j * c;
            for (std::size_t f = 0; f < c; ++f) {
                s0[f] += x0 * wr[f];
                s1[f] += x1 * wr[f];
                s2[f] += x2 * wr[f];
                s3[f] += x3 * wr[f];
            }
        }
    }
    for (; p < positions; ++p) {
        double* s = scores + p * c;
        const double* xp = x + p * d;
        for (std::size_t j = 0; j < span; ++j) {
            const double xv = xp[j];
            const double* wr = w + j * c;
            for (std::size_t f = 0; f < c; ++f) s[f] += xv * wr[f];
        }
    }
}

double softplus(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

double sigmoid(double x) {
    if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

}  // namespace

std::vector<double> CnnModel::forward(std::span<const std::size_t> ids, ForwardTrace* trace) const {
    const std::size_t d = dim();
    const std::size_t h_total = hidden();
    std::vector<double> x;
    std::size_t rows = 0;
    build_sentence(ids, x, rows);

    std::vector<double> pooled(h_total, 0.0);
    std::vector<std::size_t> argmax(h_total, 0);
    std::vector<std::vector<double>> all_scores;
    std::vector<double> scores;
    for (const auto& g : groups_) {
        const std::size_t positions = rows - g.width + 1;
        scores.resize(positions * g.count);
        convolve(x.data(), positions, d, g, params_.data() + g.weight_offset, params_.data() + g.bias_offset,
                 scores.data());
        for (std::size_t f = 0; f < g.count; ++f) {
            double best = std::max(0.0, scores[f]);
            std::size_t at = 0;
            for (std::size_t p = 1; p < positions; ++p) {
                const double a = std::max(0.0, scores[p * g.count + f]);
                if (a > best) {
                    best = a;
                    at = p;
                }
            }
            pooled[g.first_filter + f] = best;
            argmax[g.first_filter + f] = at;
        }
        if (trace) all_scores.push_back(scores);
    }

    std::vector<double> logits(num_labels());
    const double* w = params_.data() + output_offset_;
    const double* b = params_.data() + output_bias_offset();
    for (std::size_t l = 0; l < num_labels(); ++l) {
        double z = b[l];
        const double* wl = w + l * h_total;
        for (std::size_t h = 0; h < h_total; ++h) z += wl[h] * pooled[h];
        logits[l] = z;
    }
    if (trace) {
        trace->scores = std::move(all_scores);
        trace->pooled = std::move(pooled);
        trace->argmax = std::move(argmax);
        trace->logits = logits;
    }
    return logits;
}

double cnn_loss(std::span<const double> logits, LabelSet gold, double alpha) {
    double loss = 0.0;
    for (std::size_t l = 0; l < logits.size(); ++l) {
        const bool positive = gold.contains(l);
        const double y = positive ? 1.0 : -1.0;
        loss += (positive ? 1.0 : alpha) * softplus(-y * logits[l]);
    }
    return loss;
}

struct CnnBackprop {
    static void accumulate(const CnnModel& m, const CnnExample& ex, double scale, CnnGradient& g) {
        const std::size_t d = m.dim();
        const std::size_t h_total = m.hidden();
        const std::size_t labels = m.num_labels();
        ForwardTrace trace;
        m.forward(ex.ids, &trace);
        g.loss += scale * cnn_loss(trace.logits, ex.labels, m.config_.alpha);

        std::vector<double> dlogit(labels);
        for (std::size_t l = 0; l < labels; ++l) {
            const bool positive = ex.labels.contains(l);
            const double y = positive ? 1.0 : -1.0;
            dlogit[l] = scale * (positive ? 1.0 : m.config_.alpha) * -y * sigmoid(-y * trace.logits[l]);
        }

        double* gw = g.params.data() + m.output_offset_;
        double* gb = g.params.data() + m.output_bias_offset();
        std::vector<double> dpooled(h_total, 0.0);
        for (std::size_t l = 0; l < labels; ++l) {
            gb[l] += dlogit[l];
            const double* wl = m.params_.data() + m.output_offset_ + l * h_total;
            double* gwl = gw + l * h_total;
            for (std::size_t h = 0; h < h_total; ++h) {
                gwl[h] += dlogit[l] * trace.pooled[h];
                dpooled[h] += dlogit[l] * wl[h];
            }
        }

        std::vector<double> x;
        std::size_t rows = 0;
        m.build_sentence(ex.ids, x, rows);
        std::vector<double> dx;
        if (m.config_.fine_tune_embeddings) dx.assign(x.size(), 0.0);

        // ReLU passes gradient only where the pooled activation is positive.
        std::vector<double> gf;
        std::vector<std::size_t> at;
        for (const auto& grp : m.groups_) {
            const std::size_t c = grp.count;
            gf.assign(c, 0.0);
            at.assign(c, 0);
            bool any = false;
            for (std::size_t f = 0; f < c; ++f) {
                const std::size_t h = grp.first_filter + f;
                if (trace.pooled[h] > 0.0 && dpooled[h] != 0.0) {
                    gf[f] = dpooled[h];
                    at[f] = trace.argmax[h] * d;
                    any = true;
                }
            }
            if (!any) continue;
            double* gwt = g.params.data() + grp.weight_offset;
            double* gbias = g.params.data() + grp.bias_offset;
            for (std::size_t f = 0; f < c; ++f) gbias[f] += gf[f];
            const std::size_t span = grp.width * d;
            for (std::size_t j = 0; j < span; ++j) {
                double* row = gwt + j * c;
                for (std::size_t f = 0; f < c; ++f) row[f] += gf[f] * x[at[f] + j];
            }
            if (!dx.empty()) {
                const double* wt = m.params_.data() + grp.weight_offset;
                for (std::size_t f = 0; f < c; ++f) {
                    if (gf[f] == 0.0) continue;
                    for (std::size_t j = 0; j < span; ++j) dx[at[f] + j] += gf[f] * wt[j * c + f];
                }
            }
        }
        if (!dx.empty()) {
            for (std::size_t t = 0; t < ex.ids.size(); ++t) {
                if (ex.ids[t] == kPadToken) continue;
                auto& row = g.embeddings[ex.ids[t]];
                if (row.empty()) row.assign(d, 0.0);
                for (std::size_t i = 0; i < d; ++i) row[i] += dx[t * d + i];
            }
        }
    }
};

CnnGradient cnn_gradient(const CnnModel& model, std::span<const CnnExample> batch) {
    if (batch.empty()) throw Error("CNN: empty batch");
    CnnGradient g;
    g.params.assign(model.params().size(), 0.0);
    const double scale = 1.0 / static_cast<double>(batch.size());
    for (const auto& ex : batch) CnnBackprop::accumulate(model, ex, scale, g);
    return g;
}

void apply_gradient(CnnModel& model, const CnnGradient& g, double step) {
    auto& p = model.params();
    for (std::size_t i = 0; i < p.size(); ++i) p[i] -= step * g.params[i];
    for (const auto& [id, grad] : g.embeddings) {
        auto row = model.embeddings().row(id);
        for (std::size_t i = 0; i < row.size(); ++i) row[i] -= step * grad[i];
    }
}

CnnModel train_cnn(std::span<const CnnExample> data, const CnnConfig& config, EmbeddingTable embeddings,
                   CnnTrainLog* log) {
    config.validate();
    CnnModel model = CnnModel::initialize(config, std::move(embeddings));
    if (config.epochs == 0) return model;
    if (data.empty()) throw Error("CNN: empty training set");

    Rng rng(config.seed ^ 0x5DEECE66DULL);
    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), 0);
    std::vector<CnnExample> batch;
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        rng.shuffle(order);
        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            const std::size_t end = std::min(order.size(), start + config.batch_size);
            batch.clear();
            for (std::size_t i = start; i < end; ++i) batch.push_back(data[order[i]]);
            const CnnGradient g = cnn_gradient(model, batch);
            if (!std::isfinite(g.loss)) throw Error("CNN: training diverged (non-finite loss)");
            epoch_loss += g.loss * static_cast<double>(batch.size());
            apply_gradient(model, g, config.learning_rate);
        }
        epoch_loss /= static_cast<double>(data.size());
        if (!std::isfinite(epoch_loss) || !model.all_finite())
            throw Error("CNN: training diverged (non-finite parameters)");
        if (log) log->epoch_loss.push_back(epoch_loss);
    }
    return model;
}

LabelSet decide_cnn(std::span<const double> logits) {
    LabelSet out;
    if (logits.empty()) return out;
    std::size_t best = 0;
    for (std::size_t l = 0; l < logits.size(); ++l) {
        if (logits[l] >= 0.0) out.insert(l);
        if (logits[l] > logits[best]) best = l;
    }
    if (out.empty()) out.insert(best);
    return out;
}

LabelSet predict_cnn(const CnnModel& model, std::span<const std::size_t> ids) {
    return decide_cnn(model.forward(ids));
}

void CnnModel::write(std::ostream& out) const {
    out << "cnn " << dim() << ' ' << hidden() << ' ' << num_labels() << ' ' << format_real(config_.alpha) << ' '
        << (config_.fine_tune_embeddings ? 1 : 0) << ' ' << groups_.size() << '\n';
    for (const auto& g : groups_) out << g.width << ' ' << g.count << '\n';
    out << params_.size() << '\n';
    for (std::size_t i = 0; i < params_.size(); ++i) out << format_real(params_[i]) << '\n';
    if (config_.fine_tune_embeddings) embeddings_.write_text(out);
}

CnnModel CnnModel::read(std::istream& in, const EmbeddingTable& base) {
    std::string magic, alpha;
    std::size_t d = 0, h = 0, labels = 0, groups = 0;
    int fine_tune = 0;
    if (!(in >> magic >> d >> h >> labels >> alpha >> fine_tune >> groups) || magic != "cnn")
        throw Error("CNN model: bad header");
    CnnConfig cfg;
    cfg.hidden = h;
    cfg.num_labels = labels;
    cfg.alpha = std::stod(alpha);
    cfg.fine_tune_embeddings = fine_tune != 0;
    cfg.filter_widths.clear();
    std::vector<std::size_t> counts;
    for (std::size_t g = 0; g < groups; ++g) {
        std::size_t w = 0, c = 0;
        if (!(in >> w >> c)) throw Error("CNN model: truncated group list");
        cfg.filter_widths.push_back(w);
        counts.push_back(c);
    }
    if (cfg.filters_per_width() != counts) throw Error("CNN model: filter counts do not match H");
    std::size_t n = 0;
    in >> n;
    std::vector<double> params(n);
    for (auto& p : params) {
        std::string s;
        if (!(in >> s)) throw Error("CNN model: truncated parameters");
        p = std::stod(s);
    }
    EmbeddingTable table = base;
    if (cfg.fine_tune_embeddings) {
        in >> std::ws;
        table = EmbeddingTable::read_text(in);
    }
    if (table.dim() != d) throw Error("CNN model: embedding dimension mismatch");
    CnnModel m(cfg, std::move(table));
    if (m.params_.size() != n) throw Error("CNN model: parameter count mismatch");
    m.params_ = std::move(params);
    return m;
}

}  // namespace ohc
