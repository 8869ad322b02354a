#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "embkit/corpus.hpp"
#include "embkit/errors.hpp"
#include "embkit/eval.hpp"
#include "embkit/glove.hpp"
#include "embkit/model.hpp"

namespace embkit {

struct EarlyStop {
  enum class Kind { None, ValLoss, Task };
  Kind kind = Kind::None;
  std::string task;

  // "none", "val-loss" or "task:NAME".
  static EarlyStop parse(std::string_view text);
  std::string to_string() const;
};

struct TrainConfig {
  ModelKind model = ModelKind::Cbow;
  std::size_t dim = 50;
  std::size_t radius = 5;
  std::size_t negatives = 5;
  double subsample = 1e-4;
  double lr = 0.1;
  std::size_t max_iterations = 5;
  std::uint64_t seed = 1;
  std::size_t workers = 1;
  EarlyStop early_stop;
  std::size_t patience = 2;
  double train_fraction = 0.95;
  // LBL/NNLM/C&W hidden width; 0 means `dim`.
  std::size_t hidden_dim = 0;
  GloveExport glove_export = GloveExport::Sum;
};

// A named metric over an embedding table, e.g. ws on a given dataset.
struct EvalTask {
  std::string name;
  std::function<TaskResult(const EmbeddingTable&)> evaluate;
};

// Task names: ws, ws-spearman, tfl, sem, syn, analogy, avg. avg needs
// `train_data`.
EvalTask load_task(const std::string& name, const std::filesystem::path& data,
                   const std::optional<std::filesystem::path>& train_data = std::nullopt);

struct Split {
  std::vector<Document> train;
  std::vector<Document> validation;
};

// Document-level split: a seeded permutation, the first round(fraction * n)
// documents (clamped so both parts are non-empty) go to training.
Split split_train_validation(std::span<const Document> documents, double fraction, std::uint64_t seed);

// Best-so-far tracking with patience. Ties do not count as improvement, so
// the earliest of equal values is kept.
class EarlyStopper {
 public:
  EarlyStopper(bool higher_is_better, std::size_t patience);

  // Feeds the next value; true once `patience` values in a row failed to
  // improve on the best.
  bool observe(double value);
  std::size_t best_index() const { return best_index_; }
  double best_value() const { return best_; }
  std::size_t observed() const { return count_; }

 private:
  bool higher_;
  std::size_t patience_;
  std::size_t count_ = 0;
  std::size_t best_index_ = 0;
  std::size_t since_best_ = 0;
  double best_ = 0;
};

struct IterationRecord {
  std::size_t iteration = 0;  // 1-based
  std::optional<double> validation_loss;
  std::vector<TaskResult> tasks;
  std::filesystem::path checkpoint;

  const TaskResult* task(std::string_view name) const;
};

struct TrainResult {
  std::vector<IterationRecord> records;
  std::size_t selected = 0;  // index into records
  std::filesystem::path selected_checkpoint;
};

// Raised when training diverges; `records` holds the completed iterations.
class TrainingDiverged : public NumericalError {
 public:
  TrainingDiverged(const std::string& what, std::vector<IterationRecord> records)
      : NumericalError(what), records_(std::move(records)) {}
  const std::vector<IterationRecord>& records() const { return records_; }

 private:
  std::vector<IterationRecord> records_;
};

// Runs up to max_iterations passes, writing out_dir/iter_<i>.vec, appending
// one line per iteration to out_dir/run.log, and copying the selected
// iteration's checkpoint to out_dir/best.vec. Progress goes to `log` if set.
TrainResult run_training(const TrainConfig& config, const Vocabulary& vocab,
                         std::span<const Document> documents, std::span<const EvalTask> tasks,
                         const std::filesystem::path& out_dir, std::ostream* log = nullptr);

// One line: iteration, validation loss (or NA), task metrics; tab-separated.
std::string format_log_line(const IterationRecord& record);

struct WinTable {
  std::vector<std::string> signals;  // "val-loss" and/or task names
  std::vector<std::string> tasks;
  std::vector<std::size_t> selected;  // selected record index per signal
  std::vector<std::vector<bool>> win;  // [signal][task]

  std::size_t wins(std::size_t signal) const;
  std::string to_tsv() const;
};

// For each stopping signal, the selected iteration is the signal's global
// peak (lowest validation loss, highest task metric; earliest on ties). The
// signal wins a target task iff the metric there reaches 95% of the task's
// peak gain over its random baseline `baselines[t]`.
WinTable compare_stopping_strategies(std::span<const IterationRecord> records,
                                     const std::vector<std::string>& tasks,
                                     const std::vector<double>& baselines);

}  // namespace embkit
