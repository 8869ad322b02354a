#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "embkit/errors.hpp"
#include "embkit/glove.hpp"
#include "../support/fixtures.hpp"
#include "../support/oracles.hpp"

using namespace embkit;

TEST_SUITE("glove") {
  TEST_CASE("co-occurrence counts every in-window pair once") {
    const std::vector<Document> docs = {{0, 1, 0}};
    const auto t = accumulate_cooccurrence(docs, 2, 5);
    CHECK(t.get(0, 1) == 2);
    CHECK(t.get(1, 0) == 2);
    CHECK(t.get(0, 0) == 2);
    CHECK(t.get(1, 1) == 0);
    CHECK(t.size() == 3);
  }

  TEST_CASE("single-token documents give an empty table") {
    const std::vector<Document> docs = {{3}, {1}};
    CHECK(accumulate_cooccurrence(docs, 4, 5).empty());
  }

  TEST_CASE("totals equal summed context lengths; symmetric; workers agree") {
    std::mt19937_64 gen(2);
    std::vector<Document> docs(50);
    for (auto& d : docs) {
      d.resize(gen() % 30);
      for (auto& t : d) t = static_cast<WordId>(gen() % 12);
    }
    const auto t = accumulate_cooccurrence(docs, 12, 3);
    double expected = 0;
    for (const auto& d : docs)
      for (const auto& w : iter_windows(d, 3)) expected += static_cast<double>(w.context_len);
    CHECK(t.total() == expected);
    for (const auto& c : t.cells()) CHECK(t.get(c.context, c.word) == c.count);
    CHECK(accumulate_cooccurrence(docs, 12, 3, 4).cells() == t.cells());
  }

  TEST_CASE("co-occurrence file round trip") {
    const std::vector<Document> docs = {{0, 1, 2, 1}};
    const auto t = accumulate_cooccurrence(docs, 3, 2);
    std::ostringstream out;
    write_cooccurrence(out, t);
    CHECK(out.str().starts_with("0 1 1\n"));
    std::istringstream in(out.str());
    CHECK(read_cooccurrence(in, 3).cells() == t.cells());
    std::istringstream bad("0 1 x\n");
    CHECK_THROWS_WITH_AS(read_cooccurrence(bad, 3), doctest::Contains("line 1"), DataError);
  }

  TEST_CASE("weighting function") {
    GloveConfig cfg;
    CHECK(glove_weight(100, cfg) == 1.0);
    CHECK(glove_weight(1000, cfg) == 1.0);
    CHECK(glove_weight(10, cfg) == doctest::Approx(std::pow(0.1, 0.75)));
  }

  TEST_CASE("an exactly fitted table has zero loss and does not move") {
    GloveModel m(2, 2, 1);
    const std::vector<Cooccurrence> cells = {{0, 1, 5.0}, {1, 0, 7.0}};
    CooccurrenceTable t(2, cells);
    // Put all the fit in the biases with orthogonal vectors.
    m.main.values = {1, 0, 0, 0};
    m.context.values = {0, 0, 0, 1};
    m.main_bias.values = {std::log(5.0), std::log(7.0)};
    m.context_bias.values = {0, 0};
    CHECK(glove_loss(m, t, {}) == 0.0);
    const auto before = m.main.values;
    const auto losses = train_glove(t, m, 3, {}, 1);
    for (double l : losses) CHECK(l == 0.0);
    CHECK(m.main.values == before);
  }

  TEST_CASE("single cell, one dimension converges to ln X") {
    GloveModel m(1, 1, 3);
    const std::vector<Cooccurrence> cells = {{0, 0, 50.0}};
    CooccurrenceTable t(1, cells);
    train_glove(t, m, 500, {}, 1);
    const double pred = m.main.values[0] * m.context.values[0] + m.main_bias.values[0] + m.context_bias.values[0];
    CHECK(std::abs(pred - std::log(50.0)) < 1e-3);
  }

  TEST_CASE("cell gradient matches finite differences") {
    std::mt19937_64 gen(4);
    for (int inst = 0; inst < 20; ++inst) {
      GloveModel m(20, 8, inst);
      std::uniform_real_distribution<double> u(-0.5, 0.5);
      for (auto* b : {&m.main, &m.context, &m.main_bias, &m.context_bias})
        for (auto& v : b->values) v = u(gen);
      const Cooccurrence cell{static_cast<WordId>(gen() % 20), static_cast<WordId>(gen() % 20),
                              1.0 + static_cast<double>(gen() % 300)};
      GloveCellGradient g;
      glove_cell_loss(m, cell, {}, &g);
      auto loss = [&] { return oracle::glove_cell_loss(m, cell); };
      const std::size_t d = 8;
      std::vector<double> analytic_main(m.main.values.size(), 0.0), analytic_ctx(m.context.values.size(), 0.0);
      for (std::size_t k = 0; k < d; ++k) {
        analytic_main[cell.word * d + k] = g.main[k];
        analytic_ctx[cell.context * d + k] = g.context[k];
      }
      CHECK(oracle::relative_error(analytic_main, oracle::numeric_gradient(m.main.values, loss)) <= 1e-4);
      CHECK(oracle::relative_error(analytic_ctx, oracle::numeric_gradient(m.context.values, loss)) <= 1e-4);
      const auto nb = oracle::numeric_gradient(m.main_bias.values, loss);
      const auto nc = oracle::numeric_gradient(m.context_bias.values, loss);
      CHECK(g.main_bias == doctest::Approx(nb[cell.word]).epsilon(1e-4));
      CHECK(g.context_bias == doctest::Approx(nc[cell.context]).epsilon(1e-4));
    }
  }

  TEST_CASE("loss falls over epochs and absent cells get no gradient") {
    const auto corpus = fixture::topic_corpus(60, 8);
    const auto vocab = build_vocab(corpus.documents, 100);
    std::vector<Document> docs;
    for (const auto& d : corpus.documents) docs.push_back(vocab.encode(d));
    const auto t = accumulate_cooccurrence(docs, vocab.size(), 2);
    GloveModel m(vocab.size(), 10, 5);
    const auto losses = train_glove(t, m, 20, {}, 9);
    CHECK(losses.back() < losses.front());

    // Word 2 co-occurs with nothing and keeps its initial vector.
    GloveModel lonely(3, 2, 1);
    const std::vector<Cooccurrence> cells = {{0, 1, 4.0}};
    CooccurrenceTable small(3, cells);
    const auto before = lonely.main.values;
    train_glove(small, lonely, 5, {}, 1);
    CHECK(lonely.main.values[4] == before[4]);
    CHECK(lonely.main.values[5] == before[5]);
    CHECK(lonely.main.values[0] != before[0]);
  }

  TEST_CASE("training is deterministic for a seed") {
    const std::vector<Document> docs = {{0, 1, 2, 3, 1, 0, 2}, {3, 3, 1}};
    const auto t = accumulate_cooccurrence(docs, 4, 2);
    GloveModel a(4, 3, 1), b(4, 3, 1);
    train_glove(t, a, 4, {}, 7);
    train_glove(t, b, 4, {}, 7);
    CHECK(a.main.values == b.main.values);
    CHECK(a.context_bias.values == b.context_bias.values);
  }

  TEST_CASE("export sums main and context, or takes main alone") {
    GloveModel m(1, 2, 1);
    m.main.values = {1, 2};
    m.context.values = {3, 4};
    Vocabulary v({{"w", 1}});
    const auto sum = export_glove(m, v);
    CHECK(sum.row(0)[0] == 4.0f);
    CHECK(sum.row(0)[1] == 6.0f);
    const auto main = export_glove(m, v, GloveExport::MainOnly);
    CHECK(main.row(0)[1] == 2.0f);
    m.context.values = {0, 0};
    CHECK(export_glove(m, v) == export_glove(m, v, GloveExport::MainOnly));

    std::ostringstream out;
    write_embedding_text(out, sum);
    std::istringstream in(out.str());
    CHECK(read_embedding_text(in) == sum);
  }

  TEST_CASE("empty table is rejected") {
    GloveModel m(2, 2, 1);
    CHECK_THROWS_AS(train_glove(CooccurrenceTable(2, {}), m, 1, {}, 1), DataError);
  }
}
