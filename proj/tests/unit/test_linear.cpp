#include <doctest.h>

#include <cmath>
#include <sstream>

#include "ohc/linear.hpp"
#include "ohc/random.hpp"

using namespace ohc;

namespace {

constexpr std::size_t N = TopicSchema::N;

FeatureVector dense(std::vector<double> v) {
    FeatureVector f;
    f.mode = FeatureMode::Emb;
    f.dim = v.size();
    double s = 0;
    for (double x : v) s += x * x;
    f.norm = std::sqrt(s);
    f.dense = std::move(v);
    return f;
}

// Label l is present iff coordinate l of x is positive; coordinates stay
// at least 0.2 away from zero, so every label is linearly separable.
std::vector<LabeledFeatures> separable_set(std::uint64_t seed, std::size_t m, std::size_t labels) {
    Rng rng(seed);
    std::vector<LabeledFeatures> out;
    for (std::size_t i = 0; i < m; ++i) {
        std::vector<double> x(labels + 2);
        LabeledFeatures lf;
        for (std::size_t l = 0; l < labels; ++l) {
            const bool on = rng.bernoulli(0.4);
            x[l] = (on ? 1 : -1) * rng.uniform(0.2, 1.0);
            if (on) lf.labels.insert(l);
        }
        for (std::size_t j = labels; j < x.size(); ++j) x[j] = rng.uniform(-1, 1);
        lf.x = dense(std::move(x));
        out.push_back(std::move(lf));
    }
    return out;
}

double training_f(const LinearModel& model, std::span<const LabeledFeatures> data, std::size_t label) {
    std::size_t tp = 0, fp = 0, fn = 0;
    for (const auto& d : data) {
        const bool p = model.predict(d.x).contains(label), g = d.labels.contains(label);
        tp += p && g;
        fp += p && !g;
        fn += !p && g;
    }
    return tp == 0 ? 0.0 : 2.0 * tp / (2.0 * tp + fp + fn);
}

}  // namespace

TEST_CASE("featurize_bow") {
    const auto vocab = build_vocab({{"pp", "pp", "pp", "qq", "qq"}}, 1);
    REQUIRE(vocab.id("pp") == 1);
    REQUIRE(vocab.id("qq") == 2);
    const auto raw = featurize_bow({"pp", "pp", "qq"}, vocab, false);
    CHECK(raw.sparse == std::vector<std::pair<std::uint32_t, double>>{{1, 2.0}, {2, 1.0}});
    const auto oov = featurize_bow({"zzz", "pp"}, vocab, false);
    CHECK(oov.sparse == std::vector<std::pair<std::uint32_t, double>>{{0, 1.0}, {1, 1.0}});
    const auto unit = featurize_bow({"pp", "pp", "qq"}, vocab);
    double s = 0;
    for (auto [id, v] : unit.sparse) s += v * v;
    CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(unit.sparse[0].second == doctest::Approx(2 / std::sqrt(5.0)));
    const auto empty = featurize_bow({}, vocab);
    CHECK(empty.sparse.empty());
    CHECK(empty.norm == 0.0);
    CHECK(empty.dim == vocab.size());
}

TEST_CASE("featurize_emb") {
    Vocabulary v = build_vocab({{"u", "u", "v"}}, 1);
    EmbeddingTable t(v, 100);
    for (std::size_t i = 0; i < 100; ++i) {
        t.row(v.id("u"))[i] = 0.01 * static_cast<double>(i);
        t.row(v.id("v"))[i] = -0.5 + 0.003 * static_cast<double>(i);
    }
    const auto one = featurize_emb({"u"}, t);
    CHECK(one.dense.size() == 100);
    for (std::size_t i = 0; i < 100; ++i) CHECK(one.dense[i] == t.row(v.id("u"))[i]);
    const auto two = featurize_emb({"u", "v"}, t);
    for (std::size_t i = 0; i < 100; ++i)
        CHECK(two.dense[i] == doctest::Approx((t.row(1)[i] + t.row(2)[i]) / 2).epsilon(1e-15));
    const auto none = featurize_emb({}, t);
    CHECK(none.dense == std::vector<double>(100, 0.0));
}

TEST_CASE("separable data is fit exactly for every label") {
    const auto data = separable_set(3, 200, N);
    for (double C : {1.0, 10.0}) {
        LinearConfig cfg;
        cfg.C = C;
        const auto model = train_ovr(data, N, cfg);
        for (std::size_t l = 0; l < N; ++l) CHECK(training_f(model, data, l) == 1.0);
    }
}

TEST_CASE("changing C changes the weights") {
    const auto data = separable_set(4, 120, 3);
    LinearConfig a, b;
    b.C = 10.0;
    CHECK_FALSE(train_ovr(data, 3, a) == train_ovr(data, 3, b));
}

TEST_CASE("constant labels") {
    auto data = separable_set(5, 60, 2);
    const auto trea = TopicSchema::index(Topic::TREA);
    for (auto& d : data) d.labels.insert(trea);  // every instance positive for TREA; no one has DIAG
    std::vector<std::string> warnings;
    const auto model = train_ovr(data, N, LinearConfig{}, &warnings);
    CHECK(warnings.size() >= 2);
    Rng rng(1);
    for (int i = 0; i < 20; ++i) {
        std::vector<double> x(4);
        for (auto& v : x) v = rng.uniform(-3, 3);
        const auto p = model.predict(dense(x));
        CHECK(p.contains(Topic::TREA));
        CHECK_FALSE(p.contains(Topic::DIAG));
    }
}

TEST_CASE("subgradient matches finite differences at a smooth point") {
    const auto data = separable_set(6, 40, 2);
    Rng rng(2);
    std::vector<double> w(4);
    for (auto& x : w) x = rng.uniform(-0.7, 0.7);
    const double b = 0.13, C = 2.0;
    std::vector<double> g(4);
    const double gb = hinge_subgradient(w, b, data, 0, C, g);
    const double h = 1e-7;
    auto rel = [](double a, double n) { return std::abs(a - n) / std::max(1e-10, std::abs(a) + std::abs(n)); };
    for (std::size_t i = 0; i < w.size(); ++i) {
        auto up = w, down = w;
        up[i] += h;
        down[i] -= h;
        const double numeric = (hinge_objective(up, b, data, 0, C) - hinge_objective(down, b, data, 0, C)) / (2 * h);
        CHECK(rel(g[i], numeric) < 1e-4);
    }
    const double nb = (hinge_objective(w, b + h, data, 0, C) - hinge_objective(w, b - h, data, 0, C)) / (2 * h);
    CHECK(rel(gb, nb) < 1e-4);
}

TEST_CASE("dual rises every sweep and closes the gap") {
    const auto data = separable_set(7, 150, 1);
    LinearConfig cfg;
    cfg.epochs = 30;
    BinaryTrace trace;
    const auto clf = train_binary(data, 0, cfg, &trace);
    REQUIRE(trace.epoch_objective.size() == 30);
    REQUIRE(trace.epoch_dual.size() == 30);
    for (std::size_t e = 1; e < 30; ++e) CHECK(trace.epoch_dual[e] >= trace.epoch_dual[e - 1] - 1e-12);
    for (std::size_t e = 0; e < 30; ++e) CHECK(trace.epoch_dual[e] <= trace.epoch_objective[e] + 1e-12);
    CHECK(trace.final_dual >= trace.epoch_dual.back() - 1e-12);
    CHECK(trace.final_objective - trace.final_dual >= -1e-12);
    CHECK(trace.final_objective - trace.final_dual < 1e-3);
    for (double o : trace.epoch_objective) CHECK(trace.final_objective <= o + 1e-9);
    CHECK(trace.final_objective == doctest::Approx(hinge_objective(clf.weights, clf.bias, data, 0, cfg.C)));
}

TEST_CASE("labels train independently") {
    const auto data = separable_set(8, 100, N);
    LinearConfig a;
    LinearConfig b = a;
    b.label_seed_override[4] = 987654321;
    const auto ma = train_ovr(data, N, a), mb = train_ovr(data, N, b);
    for (std::size_t l = 0; l < N; ++l)
        if (l != 4) CHECK(ma.classifier(l) == mb.classifier(l));
    CHECK(a.seed_for(3) != a.seed_for(4));
}

TEST_CASE("prediction rule") {
    std::vector<BinaryClassifier> per(N, BinaryClassifier{{0.0, 0.0}, -1.0});
    LinearModel none(FeatureMode::Emb, 2, per);
    CHECK(none.predict(dense({1, 1})).empty());
    per[TopicSchema::index(Topic::DIAG)] = {{1.0, 0.0}, 0.0};
    per[TopicSchema::index(Topic::TEST)] = {{0.0, 1.0}, 0.5};
    LinearModel some(FeatureMode::Emb, 2, per);
    const auto x = dense({0.4, 0.1});
    CHECK(some.predict(x) == (LabelSet{Topic::DIAG, Topic::TEST}));
    CHECK(predict_linear(some, x) == some.predict(x));
    CHECK_THROWS_AS(some.predict(dense({1, 2, 3})), Error);
    const auto vocab = build_vocab({{"pp", "qq"}}, 1);
    CHECK_THROWS_AS(some.predict(featurize_bow({"pp"}, vocab)), Error);
}

TEST_CASE("model text round trip") {
    const auto data = separable_set(9, 50, N);
    const auto emb = train_ovr(data, N, LinearConfig{});
    std::stringstream ss;
    emb.write(ss);
    CHECK(ss.str().rfind("linear emb 13 11\n", 0) == 0);
    const auto reread = LinearModel::read(ss);
    std::stringstream again;
    reread.write(again);
    CHECK(again.str() == ss.str());
    for (std::size_t l = 0; l < N; ++l) {
        CHECK(reread.classifier(l).bias == doctest::Approx(emb.classifier(l).bias).epsilon(1e-8));
        for (std::size_t i = 0; i < emb.dim(); ++i)
            CHECK(reread.classifier(l).weights[i] == doctest::Approx(emb.classifier(l).weights[i]).epsilon(1e-8));
    }

    const std::vector<Tokens> docs{{"x", "y", "z"}, {"x", "x"}, {"z", "w"}, {"y"}};
    const auto vocab = build_vocab(docs, 1);
    std::vector<LabeledFeatures> bow;
    for (std::size_t i = 0; i < docs.size(); ++i)
        bow.push_back({featurize_bow(docs[i], vocab), LabelSet::of_indices({i % 2})});
    const auto sparse = train_ovr(bow, 2, LinearConfig{});
    std::stringstream s2;
    sparse.write(s2);
    const auto back = LinearModel::read(s2);
    CHECK(back.mode() == FeatureMode::Bow);
    for (const auto& d : bow) {
        const auto a = back.margins(d.x), b = sparse.margins(d.x);
        for (std::size_t l = 0; l < 2; ++l) CHECK(a[l] == doctest::Approx(b[l]).epsilon(1e-8));
    }
}

TEST_CASE("config validation") {
    LinearConfig c;
    c.C = 0;
    CHECK_THROWS_AS(c.validate(), Error);
    c = {};
    c.tolerance = 0;
    CHECK_THROWS_AS(c.validate(), Error);
    CHECK_THROWS_AS(train_ovr({}, N, LinearConfig{}), Error);
}
