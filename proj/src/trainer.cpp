#include "embkit/trainer.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <mutex>
#include <ostream>
#include <thread>

#include "embkit/negative_sampler.hpp"
#include "embkit/random.hpp"

namespace embkit {

namespace fs = std::filesystem;

EarlyStop EarlyStop::parse(std::string_view text) {
  if (text == "none") return {};
  if (text == "val-loss" || text == "val_loss") return {Kind::ValLoss, {}};
  if (text.starts_with("task:") && text.size() > 5) return {Kind::Task, std::string(text.substr(5))};
  throw UsageError("early stop must be none, val-loss or task:NAME (got '" + std::string(text) + "')");
}

std::string EarlyStop::to_string() const {
  switch (kind) {
    case Kind::None:
      return "none";
    case Kind::ValLoss:
      return "val-loss";
    case Kind::Task:
      return "task:" + task;
  }
  return "none";
}

EvalTask load_task(const std::string& name, const fs::path& data, const std::optional<fs::path>& train_data) {
  if (name == "ws" || name == "ws-spearman") {
    auto pairs = read_ws_dataset(data);
    const auto kind = name == "ws" ? Correlation::Pearson : Correlation::Spearman;
    return {name, [pairs = std::move(pairs), kind, name](const EmbeddingTable& t) {
              auto r = eval_ws(t, pairs, kind);
              r.task = name;
              return r;
            }};
  }
  if (name == "tfl") {
    auto qs = read_tfl_dataset(data);
    return {name, [qs = std::move(qs)](const EmbeddingTable& t) { return eval_tfl(t, qs); }};
  }
  if (name == "sem" || name == "syn" || name == "analogy") {
    auto qs = read_analogy_dataset(data);
    if (name != "analogy") {
      const bool syn = name == "syn";
      std::erase_if(qs, [syn](const AnalogyQuestion& q) { return q.syntactic != syn; });
      if (qs.empty()) throw DataError(data.string() + ": no " + name + " questions");
    }
    return {name, [qs = std::move(qs), name](const EmbeddingTable& t) {
              auto r = eval_analogy(t, qs);
              TaskResult out = name == "sem" ? r.semantic : name == "syn" ? r.syntactic : r.overall;
              out.task = name;
              return out;
            }};
  }
  if (name == "avg") {
    if (!train_data) throw UsageError("avg needs training data");
    auto test = read_avg_dataset(data);
    auto train = read_avg_dataset(*train_data);
    return {name, [train = std::move(train), test = std::move(test)](const EmbeddingTable& t) {
              return eval_avg(t, train, test);
            }};
  }
  throw UsageError("unknown task '" + name + "' (expected ws, ws-spearman, tfl, sem, syn, analogy or avg)");
}

Split split_train_validation(std::span<const Document> documents, double fraction, std::uint64_t seed) {
  if (documents.size() < 2) throw DataError("need at least 2 documents to split off a validation set");
  if (!(fraction > 0 && fraction < 1)) throw UsageError("train fraction must be in (0, 1)");
  const auto n = documents.size();
  auto n_train = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
  n_train = std::clamp<std::size_t>(n_train, 1, n - 1);
  const auto perm = shuffle_permutation(n, derive_key(seed, {0x73706c6974}));
  Split s;
  s.train.reserve(n_train);
  s.validation.reserve(n - n_train);
  for (std::size_t i = 0; i < n; ++i) {
    (i < n_train ? s.train : s.validation).push_back(documents[perm[i]]);
  }
  return s;
}

EarlyStopper::EarlyStopper(bool higher_is_better, std::size_t patience)
    : higher_(higher_is_better), patience_(patience) {
  if (patience < 1) throw UsageError("patience must be >= 1");
}

bool EarlyStopper::observe(double value) {
  const bool improved = count_ == 0 || (higher_ ? value > best_ : value < best_);
  if (improved) {
    best_ = value;
    best_index_ = count_;
    since_best_ = 0;
  } else {
    ++since_best_;
  }
  ++count_;
  return since_best_ >= patience_;
}

const TaskResult* IterationRecord::task(std::string_view name) const {
  for (const auto& t : tasks) {
    if (t.task == name) return &t;
  }
  return nullptr;
}

namespace {

std::string shortest(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Runs fn(worker, begin, end) over contiguous document ranges; rethrows the
// first NumericalError after all workers stop.
template <class Fn>
void parallel_over_documents(std::size_t n_docs, std::size_t workers, Fn fn) {
  workers = std::max<std::size_t>(1, std::min(workers, std::max<std::size_t>(1, n_docs)));
  std::atomic<bool> stop{false};
  std::mutex mu;
  std::optional<std::string> failure;
  auto run = [&](std::size_t w, std::size_t begin, std::size_t end) {
    try {
      fn(w, begin, end, stop);
    } catch (const NumericalError& e) {
      stop = true;
      std::lock_guard lock(mu);
      if (!failure) failure = e.what();
    }
  };
  const std::size_t chunk = (n_docs + workers - 1) / workers;
  if (workers == 1) {
    run(0, 0, n_docs);
  } else {
    std::vector<std::jthread> threads;
    for (std::size_t w = 0; w < workers; ++w) {
      const std::size_t begin = std::min(n_docs, w * chunk);
      threads.emplace_back(run, w, begin, std::min(n_docs, begin + chunk));
    }
  }
  if (failure) throw NumericalError(*failure);
}

class Trainer {
 public:
  Trainer(const TrainConfig& config, const Vocabulary& vocab, std::span<const EvalTask> tasks,
          const fs::path& out_dir, std::ostream* log)
      : cfg_(config), vocab_(vocab), tasks_(tasks), out_dir_(out_dir), log_(log) {}

  TrainResult run(std::span<const Document> documents) {
    validate();
    fs::create_directories(out_dir_);
    run_log_.open(out_dir_ / "run.log", std::ios::trunc);
    if (!run_log_) throw DataError("cannot write " + (out_dir_ / "run.log").string());

    auto split = split_train_validation(documents, cfg_.train_fraction, cfg_.seed);
    note("split: " + std::to_string(split.train.size()) + " training / " +
         std::to_string(split.validation.size()) + " validation documents");
    if (cfg_.model == ModelKind::Glove) return run_glove(split);
    return run_neural(split);
  }

 private:
  void validate() const {
    if (cfg_.dim < 1) throw UsageError("dimension must be >= 1");
    if (cfg_.radius < 1) throw UsageError("window radius must be >= 1");
    if (cfg_.negatives < 1) throw UsageError("negatives must be >= 1");
    if (!(cfg_.subsample > 0)) throw UsageError("subsample threshold must be > 0");
    if (!(cfg_.lr > 0)) throw UsageError("learning rate must be > 0");
    if (cfg_.max_iterations < 1) throw UsageError("iterations must be >= 1");
    if (cfg_.workers < 1) throw UsageError("threads must be >= 1");
    if (cfg_.early_stop.kind != EarlyStop::Kind::None && cfg_.patience < 1)
      throw UsageError("patience must be >= 1");
    if (cfg_.early_stop.kind == EarlyStop::Kind::Task) {
      const bool found = std::any_of(tasks_.begin(), tasks_.end(),
                                     [&](const EvalTask& t) { return t.name == cfg_.early_stop.task; });
      if (!found) throw UsageError("early stop task '" + cfg_.early_stop.task + "' is not among the evaluated tasks");
    }
    if (cfg_.model == ModelKind::Glove && cfg_.early_stop.kind == EarlyStop::Kind::ValLoss)
      throw UsageError("GloVe has no validation loss; use none or task:NAME early stopping");
    if (vocab_.size() < 2) throw DataError("vocabulary needs at least 2 words");
  }

  void note(const std::string& msg) {
    if (log_) *log_ << msg << std::endl;
  }

  // Checkpoints, evaluates and records one finished iteration. Returns true
  // when the early-stop rule says to stop.
  bool finish_iteration(std::size_t iteration, std::optional<double> val_loss, const EmbeddingTable& table) {
    IterationRecord rec;
    rec.iteration = iteration;
    rec.validation_loss = val_loss;
    rec.checkpoint = out_dir_ / ("iter_" + std::to_string(iteration) + ".vec");
    write_embedding_text(rec.checkpoint, table);
    for (const auto& t : tasks_) {
      auto r = t.evaluate(table);
      r.task = t.name;
      rec.tasks.push_back(r);
    }
    run_log_ << format_log_line(rec) << '\n';
    run_log_.flush();
    std::string msg = "iteration " + std::to_string(iteration) + ": val-loss " +
                      (val_loss ? shortest(*val_loss) : std::string("NA"));
    for (const auto& t : rec.tasks) msg += ", " + t.task + " " + shortest(t.value);
    note(msg);
    records_.push_back(std::move(rec));
    return observe(records_.back());
  }

  bool observe(const IterationRecord& rec) {
    switch (cfg_.early_stop.kind) {
      case EarlyStop::Kind::None:
        return false;
      case EarlyStop::Kind::ValLoss:
        if (!rec.validation_loss) throw UsageError("validation loss is unavailable for val-loss early stopping");
        if (!stopper_) stopper_.emplace(false, cfg_.patience);
        return stopper_->observe(*rec.validation_loss);
      case EarlyStop::Kind::Task:
        if (!stopper_) stopper_.emplace(true, cfg_.patience);
        return stopper_->observe(rec.task(cfg_.early_stop.task)->value);
    }
    return false;
  }

  TrainResult result() {
    TrainResult r;
    r.records = records_;
    r.selected = stopper_ ? stopper_->best_index() : r.records.size() - 1;
    r.selected_checkpoint = out_dir_ / "best.vec";
    fs::copy_file(r.records[r.selected].checkpoint, r.selected_checkpoint, fs::copy_options::overwrite_existing);
    note("selected iteration " + std::to_string(r.records[r.selected].iteration));
    return r;
  }

  [[noreturn]] void diverged(const std::string& what) {
    std::string msg = what + "; ";
    if (records_.empty()) {
      msg += "no checkpoint was written";
    } else {
      msg += "last good checkpoint: " + records_.back().checkpoint.string();
    }
    throw TrainingDiverged(msg, records_);
  }

  // Parameters can be finite in double yet overflow the float export.
  template <class F>
  EmbeddingTable exported(std::size_t iteration, F&& make) {
    try {
      return make();
    } catch (const NumericalError& e) {
      diverged("iteration " + std::to_string(iteration) + ": numerical divergence: " + e.what());
    }
  }

  TrainResult run_neural(const Split& split) {
    ModelSpec spec;
    spec.kind = cfg_.model;
    spec.dim = cfg_.dim;
    spec.radius = cfg_.radius;
    spec.hidden_dim = cfg_.hidden_dim;
    NeuralModel model(spec, vocab_.size(), cfg_.seed);
    const NegativeSampler sampler(vocab_.counts(), cfg_.negatives);
    const Subsampler subsampler(vocab_, cfg_.subsample);
    const AdaGradConfig opt{cfg_.lr, AdaGradConfig{}.eps};
    const bool cw = cfg_.model == ModelKind::CW;

    std::vector<Window> val_windows;
    for (const auto& doc : split.validation) {
      for (auto& w : iter_windows(doc, cfg_.radius)) val_windows.push_back(std::move(w));
    }
    const std::uint64_t val_seed = derive_key(cfg_.seed, {0x76616c});

    for (std::size_t it = 1; it <= cfg_.max_iterations; ++it) {
      const auto start = Clock::now();
      try {
        parallel_over_documents(split.train.size(), cfg_.workers,
                                [&](std::size_t w, std::size_t begin, std::size_t end, std::atomic<bool>& stop) {
                                  Rng rng(derive_key(cfg_.seed, {it, w, 0x747261696e}));
                                  Workspace ws;
                                  Window window;
                                  for (std::size_t d = begin; d < end && !stop.load(std::memory_order_relaxed); ++d) {
                                    const auto doc = subsampler.apply(split.train[d], derive_key(cfg_.seed, {it, d}));
                                    for (std::size_t p = 0; p < doc.size(); ++p) {
                                      fill_window(doc, p, cfg_.radius, window);
                                      if (cw) {
                                        train_cw_sample(model, opt, window, rng, ws);
                                      } else {
                                        train_predict_sample(model, opt, sampler, window, rng, ws);
                                      }
                                    }
                                  }
                                });
        if (!model.all_finite()) throw NumericalError("numerical divergence: non-finite parameters");
      } catch (const NumericalError& e) {
        diverged("iteration " + std::to_string(it) + ": " + e.what());
      }
      std::optional<double> val;
      if (!val_windows.empty()) {
        val = validation_loss(model, sampler, val_windows, val_seed);
        if (!std::isfinite(*val)) diverged("iteration " + std::to_string(it) + ": non-finite validation loss");
      }
      note("iteration " + std::to_string(it) + " trained in " + shortest(std::round(seconds_since(start) * 10) / 10) + "s");
      if (finish_iteration(it, val, exported(it, [&] { return export_embeddings(model, vocab_); }))) break;
    }
    return result();
  }

  TrainResult run_glove(const Split& split) {
    const auto train = accumulate_cooccurrence(split.train, vocab_.size(), cfg_.radius, cfg_.workers);
    note("co-occurrence cells: " + std::to_string(train.size()));
    GloveModel model(vocab_.size(), cfg_.dim, cfg_.seed);
    GloveConfig gcfg;
    gcfg.adagrad.lr = cfg_.lr;
    for (std::size_t it = 1; it <= cfg_.max_iterations; ++it) {
      const auto start = Clock::now();
      try {
        train_glove(train, model, 1, gcfg, cfg_.seed, cfg_.workers, it - 1);
      } catch (const NumericalError& e) {
        diverged("iteration " + std::to_string(it) + ": " + e.what());
      }
      note("iteration " + std::to_string(it) + " trained in " + shortest(std::round(seconds_since(start) * 10) / 10) + "s");
      if (finish_iteration(it, std::nullopt,
                           exported(it, [&] { return export_glove(model, vocab_, cfg_.glove_export); })))
        break;
    }
    return result();
  }

  const TrainConfig& cfg_;
  const Vocabulary& vocab_;
  std::span<const EvalTask> tasks_;
  fs::path out_dir_;
  std::ostream* log_;
  std::ofstream run_log_;
  std::vector<IterationRecord> records_;
  std::optional<EarlyStopper> stopper_;
};

}  // namespace

TrainResult run_training(const TrainConfig& config, const Vocabulary& vocab, std::span<const Document> documents,
                         std::span<const EvalTask> tasks, const fs::path& out_dir, std::ostream* log) {
  Trainer trainer(config, vocab, tasks, out_dir, log);
  return trainer.run(documents);
}

std::string format_log_line(const IterationRecord& record) {
  std::string line = std::to_string(record.iteration);
  line += '\t';
  line += record.validation_loss ? shortest(*record.validation_loss) : "NA";
  for (const auto& t : record.tasks) line += '\t' + shortest(t.value);
  return line;
}

std::size_t WinTable::wins(std::size_t signal) const {
  const auto& row = win.at(signal);
  return static_cast<std::size_t>(std::count(row.begin(), row.end(), true));
}

std::string WinTable::to_tsv() const {
  std::string out = "signal\titeration";
  for (const auto& t : tasks) out += '\t' + t;
  out += "\twins\n";
  for (std::size_t s = 0; s < signals.size(); ++s) {
    out += signals[s] + '\t' + std::to_string(selected[s] + 1);
    for (bool w : win[s]) out += w ? "\twin" : "\t-";
    out += '\t' + std::to_string(wins(s)) + '\n';
  }
  return out;
}

WinTable compare_stopping_strategies(std::span<const IterationRecord> records, const std::vector<std::string>& tasks,
                                     const std::vector<double>& baselines) {
  if (records.empty()) throw DataError("no iteration records");
  if (baselines.size() != tasks.size()) throw UsageError("one baseline per task is required");
  auto metric = [&](std::size_t r, const std::string& task) {
    const TaskResult* t = records[r].task(task);
    if (!t) throw DataError("iteration " + std::to_string(records[r].iteration) + " has no '" + task + "' result");
    return t->value;
  };
  WinTable table;
  table.tasks = tasks;

  const bool have_loss = std::all_of(records.begin(), records.end(),
                                     [](const IterationRecord& r) { return r.validation_loss.has_value(); });
  if (have_loss) {
    std::size_t best = 0;
    for (std::size_t r = 1; r < records.size(); ++r) {
      if (*records[r].validation_loss < *records[best].validation_loss) best = r;
    }
    table.signals.push_back("val-loss");
    table.selected.push_back(best);
  }
  std::vector<std::size_t> peak(tasks.size(), 0);
  for (std::size_t t = 0; t < tasks.size(); ++t) {
    for (std::size_t r = 1; r < records.size(); ++r) {
      if (metric(r, tasks[t]) > metric(peak[t], tasks[t])) peak[t] = r;
    }
    table.signals.push_back(tasks[t]);
    table.selected.push_back(peak[t]);
  }
  for (std::size_t s = 0; s < table.signals.size(); ++s) {
    std::vector<bool> row;
    for (std::size_t t = 0; t < tasks.size(); ++t) {
      const double m_sel = metric(table.selected[s], tasks[t]);
      const double m_peak = metric(peak[t], tasks[t]);
      row.push_back(m_sel >= m_peak || m_sel - baselines[t] >= 0.95 * (m_peak - baselines[t]));
    }
    table.win.push_back(std::move(row));
  }
  return table;
}

}  // namespace embkit
