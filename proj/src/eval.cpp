#include "embkit/eval.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <numeric>
#include <thread>

#include "embkit/corpus.hpp"
#include "embkit/logistic.hpp"
#include "embkit/random.hpp"

namespace embkit {

namespace {

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto tab = line.find('\t', start);
    out.push_back(line.substr(start, tab == std::string_view::npos ? std::string_view::npos : tab - start));
    if (tab == std::string_view::npos) break;
    start = tab + 1;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.remove_suffix(1);
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  return s;
}

bool skippable(std::string_view line) { return line.empty() || line.front() == '#'; }

DataError line_error(const char* what, std::size_t line_no, const char* expected) {
  return DataError(std::string(what) + " line " + std::to_string(line_no) + ": expected " + expected);
}

template <class Reader>
auto read_path(const std::filesystem::path& path, Reader reader) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return reader(in);
}

bool parse_double(std::string_view s, double& out) {
  s = trim(s);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

std::vector<Neighbor> nearest_neighbors(const EmbeddingTable& table, std::span<const double> query,
                                        std::size_t k, const std::unordered_set<std::size_t>& exclude) {
  if (query.size() != table.dim()) throw UsageError("query dimension does not match table");
  std::vector<Neighbor> all;
  all.reserve(table.size());
  for (std::size_t i = 0; i < table.size(); ++i) {
    if (exclude.contains(i)) continue;
    all.push_back({i, table.word(i), cosine<double, float>(query, table.row(i))});
  }
  k = std::min(k, all.size());
  auto better = [](const Neighbor& a, const Neighbor& b) {
    return a.similarity != b.similarity ? a.similarity > b.similarity : a.id < b.id;
  };
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k), all.end(), better);
  all.resize(k);
  return all;
}

NormalizedTable::NormalizedTable(const EmbeddingTable& table)
    : dim_(table.dim()), unit_(table.size() * table.dim()), norms_(table.size()) {
  for (std::size_t i = 0; i < table.size(); ++i) {
    const auto r = table.row(i);
    double s = 0;
    for (float v : r) s += double{v} * v;
    norms_[i] = std::sqrt(s);
    if (norms_[i] == 0) continue;
    for (std::size_t j = 0; j < dim_; ++j) unit_[i * dim_ + j] = r[j] / norms_[i];
  }
}

// ---- readers ----------------------------------------------------------------

std::vector<SimilarityPair> read_ws_dataset(std::istream& in) {
  std::vector<SimilarityPair> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto view = trim(line);
    if (skippable(view)) continue;
    auto f = split_tabs(view);
    SimilarityPair p;
    if (f.size() != 3 || trim(f[0]).empty() || trim(f[1]).empty() || !parse_double(f[2], p.score))
      throw line_error("ws", line_no, "'word1<TAB>word2<TAB>score'");
    p.first = trim(f[0]);
    p.second = trim(f[1]);
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<SynonymQuestion> read_tfl_dataset(std::istream& in) {
  std::vector<SynonymQuestion> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto view = trim(line);
    if (skippable(view)) continue;
    auto f = split_tabs(view);
    const char* expected = "'stem<TAB>c1<TAB>c2<TAB>c3<TAB>c4<TAB>answer(0-3)'";
    if (f.size() != 6) throw line_error("tfl", line_no, expected);
    SynonymQuestion q;
    q.stem = trim(f[0]);
    for (int i = 1; i <= 4; ++i) q.choices.emplace_back(trim(f[i]));
    const auto a = trim(f[5]);
    const auto [ptr, ec] = std::from_chars(a.data(), a.data() + a.size(), q.answer);
    if (ec != std::errc() || ptr != a.data() + a.size() || q.answer > 3 || q.stem.empty())
      throw line_error("tfl", line_no, expected);
    for (const auto& c : q.choices) {
      if (c.empty()) throw line_error("tfl", line_no, expected);
    }
    out.push_back(std::move(q));
  }
  return out;
}

std::vector<AnalogyQuestion> read_analogy_dataset(std::istream& in) {
  std::vector<AnalogyQuestion> out;
  std::string line, category;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto view = trim(line);
    if (view.empty()) continue;
    if (view.front() == ':') {
      category = trim(view.substr(1));
      continue;
    }
    auto f = split_tokens(view);
    if (f.size() != 4) throw line_error("analogy", line_no, "'a b c d' or ': category'");
    out.push_back({f[0], f[1], f[2], f[3], category, category.starts_with("gram")});
  }
  return out;
}

std::vector<LabeledText> read_avg_dataset(std::istream& in) {
  std::vector<LabeledText> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto view = trim(line);
    if (view.empty()) continue;
    const auto tab = view.find('\t');
    if (tab == std::string_view::npos || trim(view.substr(0, tab)).empty())
      throw line_error("avg", line_no, "'label<TAB>text'");
    out.push_back({std::string(trim(view.substr(0, tab))), split_tokens(view.substr(tab + 1))});
  }
  return out;
}

std::vector<SimilarityPair> read_ws_dataset(const std::filesystem::path& path) {
  return read_path(path, [](std::istream& in) { return read_ws_dataset(in); });
}
std::vector<SynonymQuestion> read_tfl_dataset(const std::filesystem::path& path) {
  return read_path(path, [](std::istream& in) { return read_tfl_dataset(in); });
}
std::vector<AnalogyQuestion> read_analogy_dataset(const std::filesystem::path& path) {
  return read_path(path, [](std::istream& in) { return read_analogy_dataset(in); });
}
std::vector<LabeledText> read_avg_dataset(const std::filesystem::path& path) {
  return read_path(path, [](std::istream& in) { return read_avg_dataset(in); });
}

// ---- ws ---------------------------------------------------------------------

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw UsageError("pearson: length mismatch");
  if (x.size() < 2) throw DataError("correlation needs at least 2 in-vocabulary pairs");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0 || syy == 0) throw NumericalError("degenerate correlation");
  return sxy / std::sqrt(sxx * syy);
}

namespace {

// Average ranks, ties share the mean rank.
std::vector<double> ranks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double mean_rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t t = i; t <= j; ++t) r[order[t]] = mean_rank;
    i = j + 1;
  }
  return r;
}

}  // namespace

double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw UsageError("spearman: length mismatch");
  const auto rx = ranks(x);
  const auto ry = ranks(y);
  return pearson(rx, ry);
}

TaskResult eval_ws(const EmbeddingTable& table, std::span<const SimilarityPair> pairs, Correlation kind) {
  TaskResult result{"ws"};
  std::vector<double> sims, human;
  for (const auto& p : pairs) {
    const auto u = table.lookup(p.first);
    const auto v = table.lookup(p.second);
    if (u.empty() || v.empty()) {
      ++result.skipped_oov;
      continue;
    }
    sims.push_back(cosine(u, v));
    human.push_back(p.score);
  }
  result.evaluated = sims.size();
  result.value = kind == Correlation::Pearson ? pearson(sims, human) : spearman(sims, human);
  return result;
}

// ---- tfl --------------------------------------------------------------------

TaskResult eval_tfl(const EmbeddingTable& table, std::span<const SynonymQuestion> questions) {
  TaskResult result{"tfl"};
  std::size_t correct = 0;
  for (const auto& q : questions) {
    const auto stem = table.lookup(q.stem);
    std::optional<std::size_t> pick;
    double best = 0;
    if (!stem.empty()) {
      for (std::size_t i = 0; i < q.choices.size(); ++i) {
        const auto c = table.lookup(q.choices[i]);
        if (c.empty()) continue;
        const double s = cosine(stem, c);
        if (!pick || s > best) {
          pick = i;
          best = s;
        }
      }
    }
    if (!pick) {
      ++result.skipped_oov;
      continue;
    }
    ++result.evaluated;
    if (*pick == q.answer) ++correct;
  }
  if (result.evaluated == 0) throw DataError("tfl: all questions skipped as out of vocabulary");
  result.value = 100.0 * static_cast<double>(correct) / static_cast<double>(result.evaluated);
  return result;
}

// ---- analogy ----------------------------------------------------------------

std::optional<std::size_t> predict_analogy(const EmbeddingTable& table, const NormalizedTable& unit,
                                           std::size_t a, std::size_t b, std::size_t c,
                                           const AnalogyOptions& options) {
  const std::size_t d = table.dim();
  std::vector<double> q(d);
  const auto va = table.row(a), vb = table.row(b), vc = table.row(c);
  for (std::size_t j = 0; j < d; ++j) q[j] = double{vb[j]} - double{va[j]} + double{vc[j]};
  const double qn = std::sqrt(dot(q, q));
  if (qn == 0) return std::nullopt;
  std::optional<std::size_t> best;
  double best_sim = 0;
  for (std::size_t i = 0; i < unit.size(); ++i) {
    if (options.exclude_question_words && (i == a || i == b || i == c)) continue;
    if (unit.norm(i) == 0) continue;
    const double s = dot(unit.row(i), q) / qn;
    if (!best || s > best_sim) {
      best = i;
      best_sim = s;
    }
  }
  return best;
}

AnalogyResult eval_analogy(const EmbeddingTable& table, std::span<const AnalogyQuestion> questions,
                           const AnalogyOptions& options) {
  const NormalizedTable unit(table);
  // 0 = skipped, 1 = wrong, 2 = correct
  std::vector<unsigned char> outcome(questions.size(), 0);
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const auto& q = questions[i];
      const auto a = table.find(q.a), b = table.find(q.b), c = table.find(q.c), d = table.find(q.d);
      if (!a || !b || !c || !d) continue;
      const auto p = predict_analogy(table, unit, *a, *b, *c, options);
      outcome[i] = (p && *p == *d) ? 2 : 1;
    }
  };
  const std::size_t workers =
      std::clamp<std::size_t>(std::thread::hardware_concurrency(), 1, std::max<std::size_t>(1, questions.size() / 64));
  if (workers == 1) {
    work(0, questions.size());
  } else {
    std::vector<std::jthread> threads;
    const std::size_t chunk = (questions.size() + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
      const std::size_t begin = std::min(questions.size(), w * chunk);
      threads.emplace_back(work, begin, std::min(questions.size(), begin + chunk));
    }
  }

  AnalogyResult r{{"sem"}, {"syn"}, {"analogy"}};
  std::size_t correct[3] = {0, 0, 0};
  for (std::size_t i = 0; i < questions.size(); ++i) {
    TaskResult& group = questions[i].syntactic ? r.syntactic : r.semantic;
    const int g = questions[i].syntactic ? 1 : 0;
    if (outcome[i] == 0) {
      ++group.skipped_oov;
      ++r.overall.skipped_oov;
      continue;
    }
    ++group.evaluated;
    ++r.overall.evaluated;
    if (outcome[i] == 2) {
      ++correct[g];
      ++correct[2];
    }
  }
  auto pct = [](std::size_t num, std::size_t den) {
    return den == 0 ? 0.0 : 100.0 * static_cast<double>(num) / static_cast<double>(den);
  };
  r.semantic.value = pct(correct[0], r.semantic.evaluated);
  r.syntactic.value = pct(correct[1], r.syntactic.evaluated);
  r.overall.value = pct(correct[2], r.overall.evaluated);
  return r;
}

// ---- avg --------------------------------------------------------------------

std::vector<double> tf_weighted_average(const EmbeddingTable& table, std::span<const std::string> tokens,
                                        bool* had_tokens) {
  std::vector<double> sum(table.dim(), 0.0);
  std::size_t n = 0;
  for (const auto& t : tokens) {
    const auto v = table.lookup(t);
    if (v.empty()) continue;
    for (std::size_t j = 0; j < v.size(); ++j) sum[j] += v[j];
    ++n;
  }
  if (n > 0) {
    for (auto& s : sum) s /= static_cast<double>(n);
  }
  if (had_tokens) *had_tokens = n > 0;
  return sum;
}

TaskResult eval_avg(const EmbeddingTable& table, std::span<const LabeledText> train,
                    std::span<const LabeledText> test, const AvgOptions& options) {
  TaskResult result{"avg"};
  std::map<std::string, std::size_t> labels;
  for (const auto& t : train) labels.emplace(t.label, 0);
  if (labels.size() < 2) throw DataError("avg: training data needs at least 2 classes");
  std::size_t next = 0;
  for (auto& [label, id] : labels) id = next++;

  auto featurize = [&](std::span<const LabeledText> texts) {
    std::vector<std::vector<double>> x;
    x.reserve(texts.size());
    for (const auto& t : texts) {
      bool had = false;
      x.push_back(tf_weighted_average(table, t.tokens, &had));
      if (!had) ++result.diagnostics;
    }
    return x;
  };
  const auto x_train = featurize(train);
  std::vector<std::size_t> y_train;
  for (const auto& t : train) y_train.push_back(labels.at(t.label));
  const auto model = train_logistic(x_train, y_train, labels.size(), options.l2, options.max_iterations);

  const auto x_test = featurize(test);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < test.size(); ++i) {
    const auto it = labels.find(test[i].label);
    if (it != labels.end() && model.predict(x_test[i]) == it->second) ++correct;
  }
  result.evaluated = test.size();
  if (result.evaluated == 0) throw DataError("avg: empty test set");
  result.value = 100.0 * static_cast<double>(correct) / static_cast<double>(result.evaluated);
  return result;
}

EmbeddingTable random_embedding(std::span<const std::string> words, std::size_t dim, std::uint64_t seed) {
  std::vector<float> values;
  values.reserve(words.size() * dim);
  for (const auto& w : words) {
    Rng rng(derive_key(seed, {fnv1a(w)}));
    for (std::size_t j = 0; j < dim; ++j) values.push_back(static_cast<float>(rng.uniform(-1.0, 1.0)));
  }
  return EmbeddingTable(std::vector<std::string>(words.begin(), words.end()), dim, std::move(values));
}

}  // namespace embkit
