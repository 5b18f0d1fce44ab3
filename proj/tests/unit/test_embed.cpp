#include <doctest.h>

#include <cmath>
#include <sstream>

#include "ohc/embed.hpp"
#include "ohc/random.hpp"
#include "ohc/schema.hpp"

using namespace ohc;

namespace {

// Each sentence draws its words from one of 100 ten-word clusters; "aaa"
// and "bbb" only ever appear side by side.
std::vector<Tokens> cooccurrence_corpus(std::uint64_t seed) {
    Rng rng(seed);
    std::vector<Tokens> out;
    for (int s = 0; s < 3000; ++s) {
        Tokens t;
        const auto cluster = std::to_string(rng.below(100));
        for (int i = 0; i < 10; ++i) t.push_back("f" + cluster + "_" + std::to_string(rng.below(10)));
        if (rng.bernoulli(0.05)) {
            const auto at = static_cast<std::ptrdiff_t>(rng.below(t.size()));
            t.insert(t.begin() + at, {"aaa", "bbb"});
        }
        out.push_back(std::move(t));
    }
    return out;
}

EmbedConfig small_config() {
    EmbedConfig c;
    c.dim = 20;
    c.epochs = 3;
    c.seed = 5;
    return c;
}

}  // namespace

TEST_CASE("co-occurring tokens end up closer than random pairs") {
    const auto corpus = cooccurrence_corpus(3);
    const auto vocab = build_vocab(corpus, 1);
    auto config = small_config();
    config.dim = 50;
    config.epochs = 10;
    const auto table = train_embeddings(corpus, vocab, config);
    REQUIRE(table.all_finite());

    Rng rng(17);
    std::vector<double> sims;
    while (sims.size() < 100) {
        const auto a = 1 + rng.below(vocab.size() - 1), b = 1 + rng.below(vocab.size() - 1);
        if (a == b) continue;
        sims.push_back(cosine(table.row(a), table.row(b)));
    }
    double mean = 0, var = 0;
    for (double s : sims) mean += s;
    mean /= static_cast<double>(sims.size());
    for (double s : sims) var += (s - mean) * (s - mean);
    const double sd = std::sqrt(var / static_cast<double>(sims.size() - 1));
    CHECK(cosine(table.lookup("aaa"), table.lookup("bbb")) > mean + 3 * sd);
}

TEST_CASE("two-token vocabulary gives a 2 x 100 finite table") {
    const std::vector<Tokens> corpus{{"tok", "tok", "tok"}, {"tok", "tok"}};
    const auto vocab = build_vocab(corpus, 1);
    REQUIRE(vocab.size() == 2);
    EmbedConfig c;
    c.epochs = 1;
    const auto table = train_embeddings(corpus, vocab, c);
    CHECK(table.rows() == 2);
    CHECK(table.dim() == 100);
    CHECK(table.data().size() == 200);
    CHECK(table.all_finite());
}

TEST_CASE("training is deterministic per seed") {
    const auto corpus = cooccurrence_corpus(8);
    const auto vocab = build_vocab(corpus, 1);
    auto c = small_config();
    c.epochs = 1;
    const auto a = train_embeddings(corpus, vocab, c);
    const auto b = train_embeddings(corpus, vocab, c);
    CHECK(a == b);
    c.seed = 6;
    CHECK_FALSE(train_embeddings(corpus, vocab, c) == a);
}

TEST_CASE("empty input is rejected") {
    const std::vector<Tokens> corpus{{"x", "y"}};
    const auto vocab = build_vocab(corpus, 1);
    CHECK_THROWS_WITH_AS(train_embeddings({}, vocab, small_config()), "insufficient data: no in-vocabulary tokens", Error);
    CHECK_THROWS_WITH_AS(train_embeddings({{"nope", "never"}}, vocab, small_config()), "insufficient data: no in-vocabulary tokens", Error);
}

TEST_CASE("config validation") {
    for (auto mutate : {+[](EmbedConfig& c) { c.window = 0; }, +[](EmbedConfig& c) { c.negatives = 0; },
                        +[](EmbedConfig& c) { c.epochs = 0; }, +[](EmbedConfig& c) { c.initial_lr = 0; },
                        +[](EmbedConfig& c) { c.dim = 0; }}) {
        EmbedConfig c;
        mutate(c);
        CHECK_THROWS_AS(c.validate(), Error);
    }
    CHECK_NOTHROW(EmbedConfig{}.validate());
}

TEST_CASE("lookup") {
    const auto corpus = cooccurrence_corpus(4);
    const auto vocab = build_vocab(corpus, 1);
    const auto table = train_embeddings(corpus, vocab, small_config());
    const auto known = table.lookup("aaa");
    const auto stored = table.row(vocab.id("aaa"));
    CHECK(std::vector<double>(known.begin(), known.end()) == std::vector<double>(stored.begin(), stored.end()));
    const auto unk = table.row(Vocabulary::kUnkId);
    const auto z = table.lookup("zzzqq");
    const auto q = table.lookup("qqqzz");
    CHECK(std::vector<double>(z.begin(), z.end()) == std::vector<double>(unk.begin(), unk.end()));
    CHECK(std::vector<double>(z.begin(), z.end()) == std::vector<double>(q.begin(), q.end()));
}

TEST_CASE("unknown row is the mean of the trained rows") {
    const auto corpus = cooccurrence_corpus(4);
    const auto vocab = build_vocab(corpus, 1);
    const auto table = train_embeddings(corpus, vocab, small_config());
    for (std::size_t d = 0; d < table.dim(); ++d) {
        double mean = 0;
        for (std::size_t r = 1; r < table.rows(); ++r) mean += table.row(r)[d];
        mean /= static_cast<double>(table.rows() - 1);
        CHECK(table.row(Vocabulary::kUnkId)[d] == doctest::Approx(mean).epsilon(1e-12));
    }
}

TEST_CASE("skip-gram gradient matches central differences") {
    Rng rng(11);
    const std::size_t D = 8;
    auto vec = [&] {
        std::vector<double> v(D);
        for (auto& x : v) x = rng.uniform(-0.5, 0.5);
        return v;
    };
    std::vector<double> center = vec(), context = vec();
    std::vector<std::vector<double>> negs{vec(), vec(), vec()};
    auto loss = [&] {
        std::vector<std::span<const double>> n(negs.begin(), negs.end());
        return skipgram_pair_gradient(center, context, n).loss;
    };
    std::vector<std::span<const double>> nspans(negs.begin(), negs.end());
    const auto g = skipgram_pair_gradient(center, context, nspans);
    REQUIRE(g.negatives.size() == negs.size());

    const double h = 1e-6;
    double worst = 0;
    auto probe = [&](std::vector<double>& v, const std::vector<double>& analytic) {
        for (std::size_t i = 0; i < D; ++i) {
            const double keep = v[i];
            v[i] = keep + h;
            const double up = loss();
            v[i] = keep - h;
            const double down = loss();
            v[i] = keep;
            const double numeric = (up - down) / (2 * h);
            worst = std::max(worst, std::abs(numeric - analytic[i]) / std::max(1e-8, std::abs(numeric) + std::abs(analytic[i])));
        }
    };
    probe(center, g.center);
    probe(context, g.context);
    for (std::size_t n = 0; n < negs.size(); ++n) probe(negs[n], g.negatives[n]);
    CHECK(worst < 1e-4);
}

TEST_CASE("text format round trip") {
    const auto corpus = cooccurrence_corpus(2);
    const auto vocab = build_vocab(corpus, 1);
    const auto table = train_embeddings(corpus, vocab, small_config());
    std::stringstream ss;
    table.write_text(ss);
    std::string header;
    std::getline(ss, header);
    CHECK(header == std::to_string(table.rows()) + " " + std::to_string(table.dim()));
    ss.seekg(0);
    const auto back = EmbeddingTable::read_text(ss);
    CHECK(back.vocab() == table.vocab());
    // Nine significant digits: the reread table writes identical text.
    std::stringstream again, first;
    back.write_text(again);
    table.write_text(first);
    CHECK(again.str() == first.str());
    for (std::size_t i = 0; i < table.data().size(); ++i)
        CHECK(back.data()[i] == doctest::Approx(table.data()[i]).epsilon(1e-8));
}

TEST_CASE("cosine") {
    const std::vector<double> a{1, 0}, b{0, 2}, c{3, 0};
    CHECK(cosine(a, b) == doctest::Approx(0));
    CHECK(cosine(a, c) == doctest::Approx(1));
}
