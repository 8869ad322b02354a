#include "embkit/cli.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <unordered_set>

#include "embkit/corpus.hpp"
#include "embkit/embedding.hpp"
#include "embkit/errors.hpp"
#include "embkit/eval.hpp"
#include "embkit/pgr.hpp"
#include "embkit/random.hpp"
#include "embkit/trainer.hpp"

namespace embkit {

namespace {

namespace fs = std::filesystem;

std::pair<std::string, std::string> split_assignment(const std::string& text, const char* flag) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0 || eq + 1 == text.size())
    throw UsageError(std::string(flag) + " expects NAME=PATH (got '" + text + "')");
  return {text.substr(0, eq), text.substr(eq + 1)};
}

std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

int metric_decimals(const std::string& task) { return task.starts_with("ws") ? 4 : 2; }

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  return out;
}

// Replaces "--config PATH" with the file's key=value lines as flags. Flags
// given explicitly on the command line take precedence over the file.
std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  std::vector<std::string> out;
  std::vector<std::string> from_file;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] != "--config" && !args[i].starts_with("--config=")) {
      out.push_back(args[i]);
      continue;
    }
    std::string path;
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw UsageError("--config needs a file");
      path = args[++i];
    } else {
      path = args[i].substr(9);
    }
    std::ifstream in(path);
    if (!in) throw DataError("cannot open config " + path);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      const auto first = line.find_first_not_of(" \t\r");
      if (first == std::string::npos || line[first] == '#') continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw DataError("config line " + std::to_string(line_no) + ": expected key=value");
      auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        const auto e = s.find_last_not_of(" \t\r");
        return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
      };
      from_file.push_back("--" + trim(line.substr(0, eq)));
      from_file.push_back(trim(line.substr(eq + 1)));
    }
  }
  auto given = [&](const std::string& flag) {
    for (const auto& a : out) {
      if (a == flag || a.starts_with(flag + "=")) return true;
    }
    return false;
  };
  for (std::size_t i = 0; i + 1 < from_file.size(); i += 2) {
    if (given(from_file[i])) continue;
    out.push_back(from_file[i]);
    out.push_back(from_file[i + 1]);
  }
  return out;
}

// ---- build-vocab ------------------------------------------------------------

struct BuildVocabArgs {
  std::string corpus, out;
  std::size_t cap = 200000;
  std::uint64_t min_count = 1;
};

void cmd_build_vocab(const BuildVocabArgs& a, std::ostream& out) {
  VocabularyBuilder builder;
  for_each_corpus_line(a.corpus, [&](std::string_view line) {
    for (const auto& t : split_tokens(line)) builder.add(t);
  });
  if (builder.tokens_seen() == 0) throw DataError("empty corpus");
  const auto vocab = builder.finish(a.cap, a.min_count);
  write_vocab(fs::path(a.out), vocab);
  out << "words " << vocab.size() << "\ttokens " << builder.tokens_seen() << '\n';
}

// ---- sample -----------------------------------------------------------------

struct SampleArgs {
  std::vector<std::string> corpora;
  std::vector<std::uint64_t> tokens;
  std::uint64_t seed = 1;
  std::string out;
};

void cmd_sample(const SampleArgs& a, std::ostream& out) {
  if (a.tokens.size() != 1 && a.tokens.size() != a.corpora.size())
    throw UsageError("give one --tokens per --corpus, or a single --tokens for all");
  std::vector<std::string> mixed;
  std::uint64_t total = 0;
  for (std::size_t c = 0; c < a.corpora.size(); ++c) {
    std::vector<std::string> lines;
    std::vector<std::size_t> lengths;
    for_each_corpus_line(a.corpora[c], [&](std::string_view line) {
      lines.emplace_back(line);
      lengths.push_back(split_tokens(line).size());
    });
    const auto target = a.tokens.size() == 1 ? a.tokens[0] : a.tokens[c];
    try {
      for (std::size_t i : sample_subset_indices(lengths, target, derive_key(a.seed, {c}))) {
        total += lengths[i];
        mixed.push_back(std::move(lines[i]));
      }
    } catch (const DataError& e) {
      throw DataError(a.corpora[c] + ": " + e.what());
    }
  }
  mixed = shuffle_documents(std::move(mixed), a.seed);
  auto file = open_out(a.out);
  for (const auto& line : mixed) file << line << '\n';
  if (!file.flush()) throw DataError("cannot write " + a.out);
  out << "documents " << mixed.size() << "\ttokens " << total << '\n';
}

// ---- train ------------------------------------------------------------------

struct TrainArgs {
  std::string model = "cbow";
  std::string corpus, vocab, out;
  std::size_t cap = 200000;
  std::string early_stop = "none";
  std::string glove_export = "sum";
  std::vector<std::string> eval;
  std::string train_data;
  TrainConfig config;
};

void cmd_train(TrainArgs a, std::ostream& out, std::ostream& err) {
  TrainConfig& cfg = a.config;
  cfg.model = parse_model_kind(a.model);
  cfg.early_stop = EarlyStop::parse(a.early_stop);
  if (a.glove_export == "sum") {
    cfg.glove_export = GloveExport::Sum;
  } else if (a.glove_export == "main") {
    cfg.glove_export = GloveExport::MainOnly;
  } else {
    throw UsageError("--glove-export must be sum or main");
  }
  std::vector<EvalTask> tasks;
  for (const auto& spec : a.eval) {
    auto [name, path] = split_assignment(spec, "--eval");
    std::optional<fs::path> train;
    if (!a.train_data.empty()) train = a.train_data;
    tasks.push_back(load_task(name, path, train));
  }
  const Vocabulary vocab = a.vocab.empty() ? build_vocab_from_file(a.corpus, a.cap) : read_vocab(fs::path(a.vocab));
  const auto docs = encode_corpus_file(a.corpus, vocab);
  err << "vocabulary " << vocab.size() << " words, " << docs.size() << " documents\n";
  const auto result = run_training(cfg, vocab, docs, tasks, a.out, &err);
  const auto& sel = result.records[result.selected];
  out << "selected " << sel.iteration << '\t' << sel.checkpoint.string() << '\n';
}

// ---- eval -------------------------------------------------------------------

struct EvalArgs {
  std::string embedding, task, data, train_data;
  bool keep_question_words = false;
};

void cmd_eval(const EvalArgs& a, std::ostream& out) {
  const auto table = read_embedding_text(fs::path(a.embedding));
  TaskResult r;
  if (a.keep_question_words && (a.task == "sem" || a.task == "syn" || a.task == "analogy")) {
    auto qs = read_analogy_dataset(fs::path(a.data));
    const auto res = eval_analogy(table, qs, AnalogyOptions{false});
    r = a.task == "sem" ? res.semantic : a.task == "syn" ? res.syntactic : res.overall;
    r.task = a.task;
  } else {
    std::optional<fs::path> train;
    if (!a.train_data.empty()) train = a.train_data;
    r = load_task(a.task, a.data, train).evaluate(table);
  }
  if (r.evaluated == 0) throw DataError(a.task + ": no question could be evaluated");
  out << r.task << ' ' << fixed(r.value, metric_decimals(r.task)) << ' ' << r.evaluated << ' ' << r.skipped_oov
      << '\n';
}

// ---- compare ----------------------------------------------------------------

struct CompareArgs {
  std::vector<std::string> tasks, embeddings;
  std::string train_data, random_out;
  std::size_t random_dim = 50;
  std::uint64_t seed = 1;
};

void cmd_compare(const CompareArgs& a, std::ostream& out, std::ostream& err) {
  std::vector<EvalTask> tasks;
  std::vector<std::string> task_names;
  for (const auto& spec : a.tasks) {
    auto [name, path] = split_assignment(spec, "--task");
    std::optional<fs::path> train;
    if (!a.train_data.empty()) train = a.train_data;
    tasks.push_back(load_task(name, path, train));
    task_names.push_back(name);
  }
  std::vector<std::string> names;
  std::vector<EmbeddingTable> tables;
  for (const auto& spec : a.embeddings) {
    auto [name, path] = split_assignment(spec, "--embedding");
    names.push_back(name);
    tables.push_back(read_embedding_text(fs::path(path)));
  }
  if (a.random_dim < 1) throw UsageError("--random-dim must be >= 1");

  // The baseline covers every word any compared embedding knows.
  std::vector<std::string> words;
  std::unordered_set<std::string> seen;
  for (const auto& t : tables) {
    for (const auto& w : t.words()) {
      if (seen.insert(w).second) words.push_back(w);
    }
  }
  const auto random = random_embedding(words, a.random_dim, a.seed);
  if (!a.random_out.empty()) write_embedding_text(fs::path(a.random_out), random);

  std::vector<double> baselines;
  for (const auto& t : tasks) {
    baselines.push_back(t.evaluate(random).value);
    err << "baseline " << t.name << ' ' << baselines.back() << '\n';
  }
  std::vector<std::vector<double>> results;
  for (std::size_t e = 0; e < tables.size(); ++e) {
    std::vector<double> row;
    for (const auto& t : tasks) row.push_back(t.evaluate(tables[e]).value);
    results.push_back(std::move(row));
  }
  out << build_pgr_report(names, task_names, results, baselines).to_tsv();
}

// ---- neighbors --------------------------------------------------------------

struct NeighborsArgs {
  std::string embedding, word;
  std::size_t k = 10;
};

void cmd_neighbors(const NeighborsArgs& a, std::ostream& out) {
  const auto table = read_embedding_text(fs::path(a.embedding));
  const auto id = table.find(a.word);
  if (!id) throw DataError("'" + a.word + "' is not in the embedding vocabulary");
  if (a.k < 1 || a.k >= table.size())
    throw UsageError("--k must be between 1 and " + std::to_string(table.size() - 1));
  const auto row = table.row(*id);
  const std::vector<double> query(row.begin(), row.end());
  const auto list = nearest_neighbors(table, query, a.k, {*id});
  for (std::size_t i = 0; i < list.size(); ++i)
    out << i + 1 << ' ' << list[i].word << ' ' << fixed(list[i].similarity, 4) << '\n';
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Word embedding training and evaluation toolkit", "embkit"};
  app.require_subcommand(1);

  BuildVocabArgs bv;
  auto* build_vocab = app.add_subcommand("build-vocab", "Count words and write a vocabulary file");
  build_vocab->add_option("--corpus", bv.corpus, "Corpus, one document per line")->required();
  build_vocab->add_option("--cap", bv.cap, "Keep the N most frequent words")->capture_default_str();
  build_vocab->add_option("--min-count", bv.min_count, "Drop words rarer than this")->capture_default_str();
  build_vocab->add_option("--out", bv.out, "Vocabulary file to write")->required();

  SampleArgs sa;
  auto* sample = app.add_subcommand("sample", "Draw and mix document-level corpus samples");
  sample->add_option("--corpus", sa.corpora, "Input corpus (repeatable)")->required();
  sample->add_option("--tokens", sa.tokens, "Token target, per corpus or shared")->required();
  sample->add_option("--seed", sa.seed)->capture_default_str();
  sample->add_option("--out", sa.out, "Output corpus")->required();

  TrainArgs ta;
  auto* train = app.add_subcommand("train", "Train an embedding model");
  std::string config_path;
  train->add_option("--config", config_path, "key=value file with any of these flags");
  train->add_option("--model", ta.model, "skipgram, cbow, order, lbl, nnlm, cw or glove")->capture_default_str();
  train->add_option("--corpus", ta.corpus, "Corpus, one document per line")->required();
  train->add_option("--vocab", ta.vocab, "Vocabulary file (built from the corpus if absent)");
  train->add_option("--cap", ta.cap, "Vocabulary cap when building from the corpus")->capture_default_str();
  train->add_option("--dim", ta.config.dim)->capture_default_str();
  train->add_option("--window", ta.config.radius, "Context radius")->capture_default_str();
  train->add_option("--negatives", ta.config.negatives)->capture_default_str();
  train->add_option("--subsample", ta.config.subsample)->capture_default_str();
  train->add_option("--lr", ta.config.lr)->capture_default_str();
  train->add_option("--iters", ta.config.max_iterations)->capture_default_str();
  train->add_option("--seed", ta.config.seed)->capture_default_str();
  train->add_option("--threads", ta.config.workers, "1 = deterministic")->capture_default_str();
  train->add_option("--early-stop", ta.early_stop, "none, val-loss or task:NAME")->capture_default_str();
  train->add_option("--patience", ta.config.patience)->capture_default_str();
  train->add_option("--hidden-dim", ta.config.hidden_dim, "LBL/NNLM/C&W hidden width (0 = dim)")
      ->capture_default_str();
  train->add_option("--glove-export", ta.glove_export, "sum or main")->capture_default_str();
  train->add_option("--eval", ta.eval, "TASK=DATA evaluated after each iteration (repeatable)");
  train->add_option("--train-data", ta.train_data, "Training texts for the avg task");
  train->add_option("--out", ta.out, "Output directory")->required();

  EvalArgs ea;
  auto* eval = app.add_subcommand("eval", "Score an embedding on one task");
  eval->add_option("--embedding", ea.embedding)->required();
  eval->add_option("--task", ea.task, "ws, ws-spearman, tfl, sem, syn, analogy or avg")->required();
  eval->add_option("--data", ea.data)->required();
  eval->add_option("--train-data", ea.train_data, "Training texts for avg");
  eval->add_flag("--keep-question-words", ea.keep_question_words, "Let analogy answers be a, b or c");

  CompareArgs ca;
  auto* compare = app.add_subcommand("compare", "PGR report against a random embedding");
  compare->add_option("--task", ca.tasks, "NAME=DATA (repeatable)")->required();
  compare->add_option("--embedding", ca.embeddings, "NAME=PATH (repeatable)")->required();
  compare->add_option("--train-data", ca.train_data, "Training texts for avg");
  compare->add_option("--random-dim", ca.random_dim)->capture_default_str();
  compare->add_option("--seed", ca.seed)->capture_default_str();
  compare->add_option("--random-out", ca.random_out, "Also write the random embedding here");

  NeighborsArgs na;
  auto* neighbors = app.add_subcommand("neighbors", "Nearest neighbors of a word");
  neighbors->add_option("--embedding", na.embedding)->required();
  neighbors->add_option("--word", na.word)->required();
  neighbors->add_option("--k", na.k)->capture_default_str();

  try {
    const auto expanded = expand_config(args);
    std::vector<std::string> reversed(expanded.rbegin(), expanded.rend());
    app.parse(reversed);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return dynamic_cast<const DataError*>(&e) ? kExitData : kExitUsage;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*build_vocab) cmd_build_vocab(bv, out);
    if (*sample) cmd_sample(sa, out);
    if (*train) cmd_train(ta, out, err);
    if (*eval) cmd_eval(ea, out);
    if (*compare) cmd_compare(ca, out, err);
    if (*neighbors) cmd_neighbors(na, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const NumericalError& e) {
    err << "error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitOk;
}

}  // namespace embkit
