#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "embkit/corpus.hpp"
#include "embkit/embedding.hpp"
#include "embkit/params.hpp"

namespace embkit {

struct Cooccurrence {
  WordId word = 0;
  WordId context = 0;
  double count = 0;

  bool operator==(const Cooccurrence&) const = default;
};

// Non-zero cells of the word-context matrix, sorted by (word, context).
class CooccurrenceTable {
 public:
  CooccurrenceTable() = default;
  CooccurrenceTable(std::size_t vocab_size, std::vector<Cooccurrence> cells);

  std::size_t vocab_size() const { return vocab_size_; }
  std::size_t size() const { return cells_.size(); }
  bool empty() const { return cells_.empty(); }
  const std::vector<Cooccurrence>& cells() const { return cells_; }

  // 0 for absent cells.
  double get(WordId word, WordId context) const;
  double total() const;

 private:
  std::size_t vocab_size_ = 0;
  std::vector<Cooccurrence> cells_;
};

// Each in-window (target, context) pair adds exactly 1; no distance weighting.
// Workers build partial tables over contiguous document ranges, merged once.
CooccurrenceTable accumulate_cooccurrence(std::span<const Document> documents,
                                          std::size_t vocab_size, std::size_t radius,
                                          std::size_t workers = 1);

// "i j X_ij" lines sorted by (i, j).
void write_cooccurrence(std::ostream& out, const CooccurrenceTable& table);
CooccurrenceTable read_cooccurrence(std::istream& in, std::size_t vocab_size);

struct GloveConfig {
  double x_max = 100.0;
  double alpha = 0.75;
  AdaGradConfig adagrad;
};

// f(X) = min(1, (X / x_max)^alpha)
double glove_weight(double x, const GloveConfig& config);

class GloveModel {
 public:
  GloveModel(std::size_t vocab_size, std::size_t dim, std::uint64_t seed);

  std::size_t vocab_size() const { return main.rows; }
  std::size_t dim() const { return main.cols; }

  ParamBlock main;          // V x d
  ParamBlock context;       // V x d
  ParamBlock main_bias;     // V x 1
  ParamBlock context_bias;  // V x 1
};

struct GloveCellGradient {
  std::vector<double> main, context;
  double main_bias = 0, context_bias = 0;
};

// f(X_ij) * (w_i . c_j + b_i + b~_j - ln X_ij)^2, and optionally its gradient.
double glove_cell_loss(const GloveModel& model, const Cooccurrence& cell, const GloveConfig& config,
                       GloveCellGradient* grad = nullptr);

// One AdaGrad step on one cell; returns the pre-update loss.
double glove_cell_step(GloveModel& model, const Cooccurrence& cell, const GloveConfig& config,
                       GloveCellGradient& scratch);

// Sum of cell losses over the table.
double glove_loss(const GloveModel& model, const CooccurrenceTable& table, const GloveConfig& config);

// Runs `epochs` passes over the cells, shuffled each epoch by
// derive_key(seed, epoch). Returns the summed pre-update loss of each epoch.
// `first_epoch` offsets the shuffle key so the trainer can call one epoch at a
// time. Throws NumericalError on a non-finite loss.
std::vector<double> train_glove(const CooccurrenceTable& table, GloveModel& model, std::size_t epochs,
                                const GloveConfig& config, std::uint64_t seed,
                                std::size_t workers = 1, std::size_t first_epoch = 0);

enum class GloveExport { Sum, MainOnly };

// main + context per word (or main alone).
EmbeddingTable export_glove(const GloveModel& model, const Vocabulary& vocab,
                            GloveExport mode = GloveExport::Sum);

}  // namespace embkit
