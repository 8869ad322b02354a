#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "embkit/embedding.hpp"
#include "embkit/errors.hpp"

namespace embkit {

// u . v / (|u| |v|). Throws NumericalError("undefined similarity") for a zero
// vector.
template <class T, class U>
double cosine(std::span<const T> u, std::span<const U> v) {
  if (u.size() != v.size()) throw UsageError("cosine: dimension mismatch");
  double uv = 0, uu = 0, vv = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double a = u[i], b = v[i];
    uv += a * b;
    uu += a * a;
    vv += b * b;
  }
  if (uu == 0 || vv == 0) throw NumericalError("undefined similarity");
  return uv / (std::sqrt(uu) * std::sqrt(vv));
}

inline double cosine(std::span<const double> u, std::span<const double> v) {
  return cosine<double, double>(u, v);
}

struct TaskResult {
  std::string task;
  double value = 0;
  std::size_t evaluated = 0;
  std::size_t skipped_oov = 0;
  // Task-specific extras, e.g. avg texts with no in-vocabulary token.
  std::size_t diagnostics = 0;
};

struct Neighbor {
  std::size_t id;
  std::string word;
  double similarity;
};

// Top-k rows by cosine to `query`, excluding `exclude` ids; ties broken by
// ascending row id. Rows with zero norm raise "undefined similarity".
std::vector<Neighbor> nearest_neighbors(const EmbeddingTable& table, std::span<const double> query,
                                        std::size_t k, const std::unordered_set<std::size_t>& exclude);

// Unit-normalized copy of a table, reused across many similarity queries.
class NormalizedTable {
 public:
  explicit NormalizedTable(const EmbeddingTable& table);
  std::size_t size() const { return norms_.size(); }
  std::size_t dim() const { return dim_; }
  std::span<const double> row(std::size_t i) const { return {unit_.data() + i * dim_, dim_}; }
  double norm(std::size_t i) const { return norms_[i]; }

 private:
  std::size_t dim_;
  std::vector<double> unit_;
  std::vector<double> norms_;
};

// ---- datasets -------------------------------------------------------------

struct SimilarityPair {
  std::string first, second;
  double score;
};

struct SynonymQuestion {
  std::string stem;
  std::vector<std::string> choices;  // exactly 4
  std::size_t answer;
};

struct AnalogyQuestion {
  std::string a, b, c, d;
  std::string category;
  bool syntactic;
};

struct LabeledText {
  std::string label;
  std::vector<std::string> tokens;
};

// Parsers report format violations with line numbers (DataError).
std::vector<SimilarityPair> read_ws_dataset(std::istream& in);
std::vector<SynonymQuestion> read_tfl_dataset(std::istream& in);
std::vector<AnalogyQuestion> read_analogy_dataset(std::istream& in);
std::vector<LabeledText> read_avg_dataset(std::istream& in);

std::vector<SimilarityPair> read_ws_dataset(const std::filesystem::path& path);
std::vector<SynonymQuestion> read_tfl_dataset(const std::filesystem::path& path);
std::vector<AnalogyQuestion> read_analogy_dataset(const std::filesystem::path& path);
std::vector<LabeledText> read_avg_dataset(const std::filesystem::path& path);

// ---- tasks ----------------------------------------------------------------

enum class Correlation { Pearson, Spearman };

// Correlation between cosine similarity and human score over in-vocabulary
// pairs. Throws NumericalError("degenerate correlation") on zero variance.
TaskResult eval_ws(const EmbeddingTable& table, std::span<const SimilarityPair> pairs,
                   Correlation kind = Correlation::Pearson);

double pearson(std::span<const double> x, std::span<const double> y);
double spearman(std::span<const double> x, std::span<const double> y);

// Accuracy (%) of picking the in-vocabulary choice nearest the stem.
TaskResult eval_tfl(const EmbeddingTable& table, std::span<const SynonymQuestion> questions);

struct AnalogyResult {
  TaskResult semantic;
  TaskResult syntactic;
  TaskResult overall;
};

struct AnalogyOptions {
  bool exclude_question_words = true;
};

// Word predicted for a:b :: c:?, i.e. the argmax of cosine to b - a + c.
// nullopt when the offset vector is zero.
std::optional<std::size_t> predict_analogy(const EmbeddingTable& table, const NormalizedTable& unit,
                                           std::size_t a, std::size_t b, std::size_t c,
                                           const AnalogyOptions& options = {});

AnalogyResult eval_analogy(const EmbeddingTable& table, std::span<const AnalogyQuestion> questions,
                           const AnalogyOptions& options = {});

// Term-frequency weighted mean of in-vocabulary token vectors; zero vector
// (and `had_tokens` false) when nothing is in vocabulary.
std::vector<double> tf_weighted_average(const EmbeddingTable& table, std::span<const std::string> tokens,
                                        bool* had_tokens = nullptr);

struct AvgOptions {
  double l2 = 1.0;
  std::size_t max_iterations = 200;
};

// Text classification accuracy (%) of a logistic regression on averaged
// embeddings. `diagnostics` counts texts with no in-vocabulary token.
TaskResult eval_avg(const EmbeddingTable& table, std::span<const LabeledText> train,
                    std::span<const LabeledText> test, const AvgOptions& options = {});

// i.i.d. U(-1, 1) entries. Each word's vector depends only on (seed, word),
// so baselines agree across vocabularies that share words.
EmbeddingTable random_embedding(std::span<const std::string> words, std::size_t dim, std::uint64_t seed);

}  // namespace embkit
