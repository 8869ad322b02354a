#include "embkit/glove.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <string>
#include <thread>
#include <unordered_map>

#include "embkit/errors.hpp"
#include "embkit/random.hpp"

namespace embkit {

namespace {

std::uint64_t cell_key(WordId i, WordId j) { return (std::uint64_t{i} << 32) | j; }

using PartialTable = std::unordered_map<std::uint64_t, double>;

void accumulate_range(std::span<const Document> documents, std::size_t radius, PartialTable& out) {
  for (const auto& doc : documents) {
    for (std::size_t p = 0; p < doc.size(); ++p) {
      const std::size_t lo = p >= radius ? p - radius : 0;
      const std::size_t hi = std::min(doc.size(), p + radius + 1);
      for (std::size_t q = lo; q < hi; ++q) {
        if (q != p) out[cell_key(doc[p], doc[q])] += 1.0;
      }
    }
  }
}

}  // namespace

CooccurrenceTable::CooccurrenceTable(std::size_t vocab_size, std::vector<Cooccurrence> cells)
    : vocab_size_(vocab_size), cells_(std::move(cells)) {
  std::sort(cells_.begin(), cells_.end(), [](const Cooccurrence& a, const Cooccurrence& b) {
    return cell_key(a.word, a.context) < cell_key(b.word, b.context);
  });
  for (std::size_t i = 0; i < cells_.size(); ++i) {
    const auto& c = cells_[i];
    if (c.word >= vocab_size_ || c.context >= vocab_size_) throw DataError("co-occurrence id out of range");
    if (!(c.count > 0)) throw DataError("co-occurrence counts must be > 0");
    if (i > 0 && cells_[i - 1].word == c.word && cells_[i - 1].context == c.context)
      throw DataError("duplicate co-occurrence cell");
  }
}

double CooccurrenceTable::get(WordId word, WordId context) const {
  const auto key = cell_key(word, context);
  auto it = std::lower_bound(cells_.begin(), cells_.end(), key,
                             [](const Cooccurrence& c, std::uint64_t k) { return cell_key(c.word, c.context) < k; });
  if (it != cells_.end() && it->word == word && it->context == context) return it->count;
  return 0.0;
}

double CooccurrenceTable::total() const {
  double s = 0;
  for (const auto& c : cells_) s += c.count;
  return s;
}

CooccurrenceTable accumulate_cooccurrence(std::span<const Document> documents,
                                          std::size_t vocab_size, std::size_t radius,
                                          std::size_t workers) {
  if (radius < 1) throw UsageError("window radius must be >= 1");
  workers = std::max<std::size_t>(1, std::min(workers, std::max<std::size_t>(1, documents.size())));
  std::vector<PartialTable> partials(workers);
  {
    std::vector<std::jthread> threads;
    const std::size_t chunk = (documents.size() + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
      const std::size_t begin = std::min(documents.size(), w * chunk);
      const std::size_t end = std::min(documents.size(), begin + chunk);
      threads.emplace_back([&, w, begin, end] {
        accumulate_range(documents.subspan(begin, end - begin), radius, partials[w]);
      });
    }
  }
  for (std::size_t w = 1; w < workers; ++w) {
    for (const auto& [k, v] : partials[w]) partials[0][k] += v;
    PartialTable().swap(partials[w]);
  }
  std::vector<Cooccurrence> cells;
  cells.reserve(partials[0].size());
  for (const auto& [k, v] : partials[0])
    cells.push_back({static_cast<WordId>(k >> 32), static_cast<WordId>(k & 0xffffffffu), v});
  return CooccurrenceTable(vocab_size, std::move(cells));
}

void write_cooccurrence(std::ostream& out, const CooccurrenceTable& table) {
  char buf[64];
  for (const auto& c : table.cells()) {
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, c.count);
    out << c.word << ' ' << c.context << ' ';
    out.write(buf, ptr - buf);
    out << '\n';
  }
}

CooccurrenceTable read_cooccurrence(std::istream& in, std::size_t vocab_size) {
  std::vector<Cooccurrence> cells;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto f = split_tokens(line);
    Cooccurrence c;
    bool ok = f.size() == 3;
    ok = ok && std::from_chars(f[0].data(), f[0].data() + f[0].size(), c.word).ec == std::errc();
    ok = ok && std::from_chars(f[1].data(), f[1].data() + f[1].size(), c.context).ec == std::errc();
    ok = ok && std::from_chars(f[2].data(), f[2].data() + f[2].size(), c.count).ec == std::errc();
    if (!ok) throw DataError("co-occurrence line " + std::to_string(line_no) + ": expected 'i j X_ij'");
    cells.push_back(c);
  }
  return CooccurrenceTable(vocab_size, std::move(cells));
}

double glove_weight(double x, const GloveConfig& config) {
  return x >= config.x_max ? 1.0 : std::pow(x / config.x_max, config.alpha);
}

GloveModel::GloveModel(std::size_t vocab_size, std::size_t dim, std::uint64_t seed)
    : main("main", vocab_size, dim),
      context("context", vocab_size, dim),
      main_bias("main_bias", vocab_size, 1),
      context_bias("context_bias", vocab_size, 1) {
  if (dim < 1) throw UsageError("dimension must be >= 1");
  if (vocab_size < 1) throw DataError("empty vocabulary");
  Rng rng(seed);
  const double bound = 0.5 / static_cast<double>(dim);
  for (auto& v : main.values) v = rng.uniform(-bound, bound);
  for (auto& v : context.values) v = rng.uniform(-bound, bound);
}

double glove_cell_loss(const GloveModel& model, const Cooccurrence& cell, const GloveConfig& config,
                       GloveCellGradient* grad) {
  const std::size_t d = model.dim();
  const double* wi = model.main.values.data() + std::size_t{cell.word} * d;
  const double* cj = model.context.values.data() + std::size_t{cell.context} * d;
  double diff = relaxed_load(model.main_bias.values[cell.word]) +
                relaxed_load(model.context_bias.values[cell.context]) - std::log(cell.count);
  for (std::size_t k = 0; k < d; ++k) diff += relaxed_load(wi[k]) * relaxed_load(cj[k]);
  const double f = glove_weight(cell.count, config);
  if (grad) {
    const double g = 2.0 * f * diff;
    grad->main.resize(d);
    grad->context.resize(d);
    for (std::size_t k = 0; k < d; ++k) {
      grad->main[k] = g * relaxed_load(cj[k]);
      grad->context[k] = g * relaxed_load(wi[k]);
    }
    grad->main_bias = g;
    grad->context_bias = g;
  }
  return f * diff * diff;
}

double glove_cell_step(GloveModel& model, const Cooccurrence& cell, const GloveConfig& config,
                       GloveCellGradient& scratch) {
  const double loss = glove_cell_loss(model, cell, config, &scratch);
  if (!std::isfinite(loss)) throw NumericalError("numerical divergence in GloVe cell (" +
                                                 std::to_string(cell.word) + ", " +
                                                 std::to_string(cell.context) + ")");
  adagrad_update(model.main.row(cell.word), model.main.accum_row(cell.word), scratch.main, config.adagrad);
  adagrad_update(model.context.row(cell.context), model.context.accum_row(cell.context), scratch.context,
                 config.adagrad);
  adagrad_update(model.main_bias.row(cell.word), model.main_bias.accum_row(cell.word),
                 std::span<const double>(&scratch.main_bias, 1), config.adagrad);
  adagrad_update(model.context_bias.row(cell.context), model.context_bias.accum_row(cell.context),
                 std::span<const double>(&scratch.context_bias, 1), config.adagrad);
  return loss;
}

double glove_loss(const GloveModel& model, const CooccurrenceTable& table, const GloveConfig& config) {
  double s = 0;
  for (const auto& c : table.cells()) s += glove_cell_loss(model, c, config);
  return s;
}

std::vector<double> train_glove(const CooccurrenceTable& table, GloveModel& model, std::size_t epochs,
                                const GloveConfig& config, std::uint64_t seed, std::size_t workers,
                                std::size_t first_epoch) {
  if (table.empty()) throw DataError("empty co-occurrence table");
  if (table.vocab_size() != model.vocab_size()) throw UsageError("table and model vocabularies differ");
  workers = std::max<std::size_t>(1, workers);
  std::vector<double> losses;
  const auto& cells = table.cells();
  for (std::size_t e = 0; e < epochs; ++e) {
    const auto order = shuffle_permutation(cells.size(), derive_key(seed, {first_epoch + e, 0x6c6f7665}));
    std::vector<double> partial(workers, 0.0);
    std::vector<std::string> failure(workers);
    const std::size_t chunk = (order.size() + workers - 1) / workers;
    auto run = [&](std::size_t w) {
      GloveCellGradient scratch;
      const std::size_t begin = std::min(order.size(), w * chunk);
      const std::size_t end = std::min(order.size(), begin + chunk);
      try {
        for (std::size_t i = begin; i < end; ++i) partial[w] += glove_cell_step(model, cells[order[i]], config, scratch);
      } catch (const NumericalError& err) {
        failure[w] = err.what();
      }
    };
    if (workers == 1) {
      run(0);
    } else {
      std::vector<std::jthread> threads;
      for (std::size_t w = 0; w < workers; ++w) threads.emplace_back(run, w);
    }
    for (const auto& f : failure) {
      if (!f.empty()) throw NumericalError(f);
    }
    double total = 0;
    for (double p : partial) total += p;
    if (!std::isfinite(total)) throw NumericalError("numerical divergence in GloVe epoch");
    losses.push_back(total);
  }
  return losses;
}

EmbeddingTable export_glove(const GloveModel& model, const Vocabulary& vocab, GloveExport mode) {
  if (vocab.size() != model.vocab_size()) throw UsageError("vocabulary does not match model");
  std::vector<float> values(model.main.values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    double v = model.main.values[i];
    if (mode == GloveExport::Sum) v += model.context.values[i];
    values[i] = static_cast<float>(v);
  }
  return EmbeddingTable(vocab.words(), model.dim(), std::move(values));
}

}  // namespace embkit
