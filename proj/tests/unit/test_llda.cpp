#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <sstream>

#include "ohc/llda.hpp"
#include "ohc/random.hpp"
#include "synthetic.hpp"

using namespace ohc;

namespace {

constexpr std::size_t N = TopicSchema::N;

LldaConfig quick_config(std::uint64_t seed = 3) {
    LldaConfig c;
    c.train_iterations = 30;
    c.infer_iterations = 40;
    c.burn_in = 10;
    c.seed = seed;
    return c;
}

std::vector<LabeledDoc> random_docs(std::uint64_t seed, std::size_t n, std::size_t vocab) {
    Rng rng(seed);
    const auto labels = synth::random_label_sets(rng, n);
    std::vector<LabeledDoc> docs;
    for (std::size_t i = 0; i < n; ++i) {
        LabeledDoc d;
        d.labels = labels[i];
        const auto len = 1 + rng.below(15);
        for (std::size_t t = 0; t < len; ++t) d.words.push_back(rng.below(vocab));
        docs.push_back(std::move(d));
    }
    return docs;
}

std::vector<double> theta_of(std::initializer_list<std::pair<Topic, double>> mass, double rest) {
    std::vector<double> t(N, rest);
    for (auto [topic, p] : mass) t[TopicSchema::index(topic)] = p;
    return t;
}

}  // namespace

TEST_CASE("single-label corpus puts every token on that topic") {
    const std::size_t V = 30;
    auto docs = random_docs(5, 80, V);
    for (auto& d : docs) d.labels = LabelSet{Topic::TREA};
    std::vector<double> unigram(V, 0.0);
    std::size_t tokens = 0;
    for (const auto& d : docs)
        for (auto w : d.words) ++unigram[w], ++tokens;

    bool constrained = true;
    const auto model = fit_llda(docs, V, N, quick_config(), [&](const LldaSweepView& view) {
        for (const auto& zd : view.assignments)
            for (auto k : zd) constrained &= k == TopicSchema::index(Topic::TREA);
    });
    CHECK(constrained);
    const auto trea = TopicSchema::index(Topic::TREA);
    CHECK(model.topic_total(trea) == tokens);
    const double beta = model.beta();
    for (std::size_t w = 0; w < V; ++w)
        CHECK(model.phi(trea, w) ==
              doctest::Approx((unigram[w] + beta) / (static_cast<double>(tokens) + V * beta)).epsilon(1e-12));
    for (std::size_t k = 0; k < N; ++k)
        if (k != trea) CHECK(model.topic_total(k) == 0);
}

TEST_CASE("fixed seed reproduces the counts") {
    const auto docs = random_docs(9, 120, 40);
    const auto a = fit_llda(docs, 40, N, quick_config(4));
    const auto b = fit_llda(docs, 40, N, quick_config(4));
    CHECK(a == b);
    CHECK(a.topic_word_counts() == b.topic_word_counts());
}

TEST_CASE("counts are conserved and assignments stay in the label set") {
    const auto docs = random_docs(10, 150, 50);
    std::uint64_t tokens = 0;
    for (const auto& d : docs) tokens += d.words.size();
    std::size_t sweeps = 0;
    bool conserved = true, constrained = true, doc_sums = true;
    fit_llda(docs, 50, N, quick_config(), [&](const LldaSweepView& view) {
        ++sweeps;
        conserved &= std::accumulate(view.topic_totals.begin(), view.topic_totals.end(), std::uint64_t{0}) == tokens;
        for (std::size_t k = 0; k < N; ++k) {
            std::uint64_t row = 0;
            for (std::size_t w = 0; w < 50; ++w) row += view.topic_word_counts[k * 50 + w];
            conserved &= row == view.topic_totals[k];
        }
        for (std::size_t d = 0; d < view.docs.size(); ++d) {
            std::uint64_t sum = 0;
            for (std::size_t k = 0; k < N; ++k) sum += view.doc_topic_counts[d * N + k];
            doc_sums &= sum == view.docs[d].words.size();
            for (auto k : view.assignments[d]) constrained &= view.docs[d].labels.contains(k);
        }
    });
    CHECK(sweeps == 30);
    CHECK(conserved);
    CHECK(constrained);
    CHECK(doc_sums);
}

TEST_CASE("phi rows are distributions") {
    const auto docs = random_docs(12, 100, 25);
    const auto model = fit_llda(docs, 25, N, quick_config());
    for (std::size_t k = 0; k < N; ++k) {
        const auto row = model.phi_row(k);
        CHECK(std::accumulate(row.begin(), row.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("conditional is a proper distribution over the allowed labels") {
    Rng rng(21);
    const std::size_t V = 12;
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<std::uint32_t> ndk(N), nkw(N * V);
        std::vector<std::uint64_t> nk(N, 0);
        for (auto& x : ndk) x = static_cast<std::uint32_t>(rng.below(5));
        for (std::size_t k = 0; k < N; ++k)
            for (std::size_t w = 0; w < V; ++w) nk[k] += nkw[k * V + w] = static_cast<std::uint32_t>(rng.below(6));
        const auto allowed = synth::random_label_sets(rng, 1, N, 4)[0];
        const std::size_t word = rng.below(V);
        std::vector<double> out(N, -1.0);
        const double total = llda_conditional(ndk, nkw, nk, word, V, allowed, 0.1, 0.5, out);
        double sum = 0;
        for (std::size_t k = 0; k < N; ++k) {
            if (allowed.contains(k)) {
                const double expect = (ndk[k] + 0.1) * (nkw[k * V + word] + 0.5) / (static_cast<double>(nk[k]) + V * 0.5);
                CHECK(out[k] == doctest::Approx(expect).epsilon(1e-12));
                CHECK(out[k] > 0);
            } else {
                CHECK(out[k] == 0.0);
            }
            sum += out[k];
        }
        CHECK(total == doctest::Approx(sum).epsilon(1e-12));
    }
}

TEST_CASE("training errors") {
    auto docs = random_docs(1, 10, 20);
    docs[4].labels = LabelSet{};
    CHECK_THROWS_WITH_AS(fit_llda(docs, 20, N, quick_config()), "unlabeled training instance", Error);
    CHECK_THROWS_AS(fit_llda({}, 20, N, quick_config()), Error);
    auto bad = quick_config();
    bad.alpha = 0;
    CHECK_THROWS_AS(bad.validate(), Error);
    bad = quick_config();
    bad.burn_in = bad.infer_iterations;
    CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("inference on planted topics") {
    const auto c = synth::planted_lda(77, 4, 300, 0, 40);
    auto cfg = quick_config();
    cfg.train_iterations = 100;
    const auto model = fit_llda(c.train, c.vocab_size, c.num_topics, cfg);

    // Words from topic 2's own block only.
    std::vector<std::size_t> words;
    for (std::size_t i = 0; i < 20; ++i) words.push_back(2 * 40 + (i * 7) % 40);
    const auto est = infer_theta(model, words, cfg);
    CHECK_FALSE(est.empty_input);
    REQUIRE(est.theta.size() == 4);
    CHECK(std::max_element(est.theta.begin(), est.theta.end()) - est.theta.begin() == 2);
}

TEST_CASE("empty sentence gives a flagged uniform theta") {
    const auto docs = random_docs(3, 40, 20);
    const auto model = fit_llda(docs, 20, N, quick_config());
    const auto est = infer_theta(model, std::vector<std::size_t>{}, quick_config());
    CHECK(est.empty_input);
    REQUIRE(est.theta.size() == N);
    for (double t : est.theta) CHECK(t == doctest::Approx(1.0 / 11).epsilon(1e-12));
}

TEST_CASE("theta sums to one") {
    const auto docs = random_docs(4, 80, 30);
    const auto model = fit_llda(docs, 30, N, quick_config());
    Rng rng(8);
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<std::size_t> words(1 + rng.below(20));
        for (auto& w : words) w = rng.below(30);
        const auto est = infer_theta(model, words, quick_config(static_cast<std::uint64_t>(trial)));
        CHECK(std::accumulate(est.theta.begin(), est.theta.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-9));
        for (double t : est.theta) CHECK(t > 0);
    }
}

TEST_CASE("decide_labels") {
    const std::vector<double> quarter(N, 0.25);
    auto diag = theta_of({{Topic::DIAG, 1.0}}, 0.0);
    CHECK(decide_labels(diag, quarter) == LabelSet{Topic::DIAG});
    CHECK(decide_labels(diag, std::vector<double>(N, 1.0)) == LabelSet{Topic::DIAG});

    auto low = theta_of({{Topic::NUTR, 0.15}}, 0.085);
    CHECK(decide_labels(low, quarter) == LabelSet{Topic::NUTR});

    auto two = theta_of({{Topic::TREA, 0.3}, {Topic::HSYS, 0.3}}, 0.4 / 9);
    CHECK(decide_labels(two, quarter) == (LabelSet{Topic::TREA, Topic::HSYS}));

    CHECK_THROWS_AS(decide_labels(two, std::vector<double>(3, 0.1)), Error);
}

TEST_CASE("threshold tuning picks the best grid point per label") {
    // Label 0 is present exactly when its theta is at least 0.3.
    std::vector<std::vector<double>> thetas;
    std::vector<LabelSet> gold;
    for (int i = 0; i <= 10; ++i) {
        const double t0 = 0.05 * i;
        thetas.push_back({t0, 1.0 - t0});
        LabelSet g;
        if (t0 >= 0.3 - 1e-12) g.insert(0);
        g.insert(1);
        gold.push_back(g);
    }
    const auto t = tune_thresholds(thetas, gold, 2);
    CHECK(t[0] == doctest::Approx(0.30));
    // Label 1 is always present, so every threshold up to 0.5 is perfect; the smallest wins.
    CHECK(t[1] == doctest::Approx(0.05));
}

TEST_CASE("model text round trip") {
    const auto docs = random_docs(6, 60, 15);
    auto model = fit_llda(docs, 15, N, quick_config());
    model.set_thresholds(std::vector<double>(N, 0.2));
    std::stringstream ss;
    model.write(ss);
    CHECK(ss.str().rfind("llda 11 15 ", 0) == 0);
    const auto back = LldaModel::read(ss);
    CHECK(back == model);
    std::stringstream again;
    back.write(again);
    CHECK(again.str() == ss.str());
}
