#include "ohc/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <ostream>

#include "ohc/random.hpp"

namespace ohc {

namespace {

double ratio(std::size_t num, std::size_t den) {
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

std::string label_name(std::size_t l) {
    return l < TopicSchema::N ? std::string(TopicSchema::code(l)) : "L" + std::to_string(l);
}

std::string percent(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f", 100.0 * x);
    return buf;
}

std::string fixed2(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", x);
    return buf;
}

void check_lengths(std::size_t a, std::size_t b) {
    if (a != b) throw Error("gold and predicted label lists differ in length");
}

}  // namespace

Prf LabelCounts::prf() const {
    Prf r;
    r.precision = ratio(tp, tp + fp);
    r.recall = ratio(tp, tp + fn);
    const double s = r.precision + r.recall;
    r.f = s == 0.0 ? 0.0 : 2.0 * r.precision * r.recall / s;
    return r;
}

std::vector<std::vector<std::string>> kfold_split(std::span<const std::string> post_ids, std::size_t k,
                                                  std::uint64_t seed) {
    if (k < 2) throw Error("cross validation needs at least 2 folds");
    if (post_ids.size() < k) throw Error("fewer posts than folds");
    std::vector<std::string> ids(post_ids.begin(), post_ids.end());
    std::sort(ids.begin(), ids.end());
    if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) throw Error("duplicate post id in fold split");
    Rng rng(seed);
    rng.shuffle(ids);
    std::vector<std::vector<std::string>> folds(k);
    for (std::size_t i = 0; i < ids.size(); ++i) folds[i % k].push_back(std::move(ids[i]));
    return folds;
}

std::vector<LabelCounts> label_counts(std::span<const LabelSet> gold, std::span<const LabelSet> pred,
                                      std::size_t num_labels) {
    check_lengths(gold.size(), pred.size());
    std::vector<LabelCounts> out(num_labels);
    for (std::size_t i = 0; i < gold.size(); ++i) {
        for (std::size_t l = 0; l < num_labels; ++l) {
            const bool g = gold[i].contains(l), p = pred[i].contains(l);
            out[l].tp += g && p;
            out[l].fp += !g && p;
            out[l].fn += g && !p;
        }
    }
    return out;
}

Prf micro_prf(std::span<const LabelSet> gold, std::span<const LabelSet> pred, std::size_t num_labels) {
    LabelCounts sum;
    for (const auto& c : label_counts(gold, pred, num_labels)) sum += c;
    return sum.prf();
}

Prf per_label_prf(std::span<const LabelSet> gold, std::span<const LabelSet> pred, std::size_t label) {
    return label_counts(gold, pred, label + 1)[label].prf();
}

std::vector<LabelSet> baseline_all(std::size_t n, std::size_t num_labels) {
    return std::vector<LabelSet>(n, LabelSet::full(num_labels));
}

double cohen_kappa(std::span<const LabelSet> a, std::span<const LabelSet> b, std::size_t label) {
    check_lengths(a.size(), b.size());
    if (a.empty()) throw Error("kappa needs at least one item");
    std::size_t na = 0, nb = 0, agree = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const bool x = a[i].contains(label), y = b[i].contains(label);
        na += x;
        nb += y;
        agree += x == y;
    }
    const std::size_t n = a.size();
    if ((na == n && nb == n) || (na == 0 && nb == 0)) return agree == n ? 1.0 : 0.0;
    const double nn = static_cast<double>(n);
    const double po = static_cast<double>(agree) / nn;
    const double pe = (static_cast<double>(na) * static_cast<double>(nb) +
                       static_cast<double>(n - na) * static_cast<double>(n - nb)) /
                      (nn * nn);
    return (po - pe) / (1.0 - pe);
}

KappaReport kappa_report(std::span<const LabelSet> a, std::span<const LabelSet> b, std::size_t num_labels) {
    KappaReport r;
    for (std::size_t l = 0; l < num_labels; ++l) r.per_label.push_back(cohen_kappa(a, b, l));
    r.average = std::accumulate(r.per_label.begin(), r.per_label.end(), 0.0) / static_cast<double>(num_labels);
    return r;
}

void EvalReport::add(std::span<const LabelSet> gold, std::span<const LabelSet> pred) {
    const auto counts = label_counts(gold, pred, per_label.size());
    for (std::size_t l = 0; l < counts.size(); ++l) per_label[l] += counts[l];
    instances += gold.size();
}

LabelCounts EvalReport::micro_counts() const {
    LabelCounts sum;
    for (const auto& c : per_label) sum += c;
    return sum;
}

void write_report_text(std::span<const EvalReport> reports, std::ostream& out) {
    if (reports.empty()) return;
    const std::size_t labels = reports.front().per_label.size();
    char buf[64];
    out << "F score (%)";
    if (reports.front().folds > 0)
        out << ", " << reports.front().folds << "-fold cross validation, seed " << reports.front().seed;
    out << '\n';
    std::snprintf(buf, sizeof buf, "%-6s", "");
    out << buf;
    for (const auto& r : reports) {
        std::snprintf(buf, sizeof buf, " %10s", r.system.c_str());
        out << buf;
    }
    out << '\n';
    auto row = [&](const std::string& name, auto&& value) {
        std::snprintf(buf, sizeof buf, "%-6s", name.c_str());
        out << buf;
        for (const auto& r : reports) {
            std::snprintf(buf, sizeof buf, " %10s", percent(value(r)).c_str());
            out << buf;
        }
        out << '\n';
    };
    row("Micro", [](const EvalReport& r) { return r.micro().f; });
    for (std::size_t l = 0; l < labels; ++l)
        row(label_name(l), [l](const EvalReport& r) { return r.per_label.at(l).prf().f; });
}

void write_report_csv(std::span<const EvalReport> reports, std::ostream& out) {
    out << "system,label,tp,fp,fn,precision,recall,f\n";
    auto line = [&](const std::string& system, const std::string& label, const LabelCounts& c) {
        const Prf p = c.prf();
        out << system << ',' << label << ',' << c.tp << ',' << c.fp << ',' << c.fn << ',' << format_real(p.precision)
            << ',' << format_real(p.recall) << ',' << format_real(p.f) << '\n';
    };
    for (const auto& r : reports) {
        line(r.system, "Micro", r.micro_counts());
        for (std::size_t l = 0; l < r.per_label.size(); ++l) line(r.system, label_name(l), r.per_label[l]);
    }
}

void write_kappa_text(std::span<const std::string> pair_names, std::span<const KappaReport> reports,
                      std::ostream& out) {
    if (pair_names.size() != reports.size()) throw Error("kappa report: name and report counts differ");
    char buf[64];
    std::snprintf(buf, sizeof buf, "%-6s", "Label");
    out << buf;
    for (const auto& n : pair_names) {
        std::snprintf(buf, sizeof buf, " %14s", n.c_str());
        out << buf;
    }
    out << '\n';
    auto row = [&](const std::string& name, auto&& value) {
        std::snprintf(buf, sizeof buf, "%-6s", name.c_str());
        out << buf;
        for (const auto& r : reports) {
            std::snprintf(buf, sizeof buf, " %14s", fixed2(value(r)).c_str());
            out << buf;
        }
        out << '\n';
    };
    row("Avg K", [](const KappaReport& r) { return r.average; });
    const std::size_t labels = reports.empty() ? 0 : reports.front().per_label.size();
    for (std::size_t l = 0; l < labels; ++l)
        row(label_name(l), [l](const KappaReport& r) { return r.per_label.at(l); });
}

}  // namespace ohc
