// Corpus-scale acceptance checks. Needs a large plain-text corpus (one
// document per line) and evaluation files in --eval-dir:
//   ws.txt   word<TAB>word<TAB>score (353 pairs)
//   tfl.txt  stem<TAB>c0<TAB>c1<TAB>c2<TAB>c3<TAB>answer (optional)
// Exits 77 (skipped) when the corpus or ws.txt is missing.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "embkit/corpus.hpp"
#include "embkit/eval.hpp"
#include "embkit/pgr.hpp"
#include "embkit/trainer.hpp"

using namespace embkit;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(const std::string& id, const std::string& name, bool ok, const std::string& detail) {
  std::printf("%s criterion %s: %s (%s)\n", ok ? "PASS" : "FAIL", id.c_str(), name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

void skip(const std::string& id, const std::string& name, const std::string& why) {
  std::printf("SKIP criterion %s: %s (%s)\n", id.c_str(), name.c_str(), why.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

struct Run {
  TrainResult result;
  double seconds = 0;
};

Run train(TrainConfig cfg, const Vocabulary& vocab, const std::vector<Document>& docs,
          const std::vector<EvalTask>& tasks, const fs::path& dir) {
  fs::create_directories(dir);
  const auto start = std::chrono::steady_clock::now();
  auto r = run_training(cfg, vocab, docs, tasks, dir, &std::cerr);
  return {std::move(r), std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count()};
}

double metric(const IterationRecord& r, const std::string& task) { return r.task(task)->value; }

}  // namespace

int main(int argc, char** argv) {
  std::string corpus, eval_dir, work = (fs::temp_directory_path() / "embkit-desk").string();
  std::size_t threads = 4;
  bool models = true;
  CLI::App app{"Corpus-scale acceptance checks"};
  app.add_option("--corpus", corpus);
  app.add_option("--eval-dir", eval_dir);
  app.add_option("--work-dir", work)->capture_default_str();
  app.add_option("--threads", threads, "Workers for the multi-threaded runs")->capture_default_str();
  app.add_flag("!--no-models", models, "Skip the six-model comparison");
  CLI11_PARSE(app, argc, argv);

  const fs::path ws_path = fs::path(eval_dir) / "ws.txt";
  const fs::path tfl_path = fs::path(eval_dir) / "tfl.txt";
  if (corpus.empty() || !fs::exists(corpus) || !fs::exists(ws_path)) {
    std::printf("SKIP desk-scale criteria 6, 7 (multi-thread tolerance) and 8: corpus or %s not available\n",
                ws_path.string().c_str());
    return 77;
  }

  std::vector<EvalTask> tasks = {load_task("ws", ws_path)};
  const bool have_tfl = fs::exists(tfl_path);
  if (have_tfl) tasks.push_back(load_task("tfl", tfl_path));

  const auto vocab = build_vocab_from_file(corpus, 30000);
  const auto docs = encode_corpus_file(corpus, vocab);
  std::fprintf(stderr, "corpus: %zu documents, %llu tokens, %zu words\n", docs.size(),
               static_cast<unsigned long long>(vocab.total_tokens()), vocab.size());

  TrainConfig cfg;
  cfg.model = ModelKind::Cbow;
  cfg.dim = 50;
  cfg.radius = 5;
  cfg.negatives = 5;
  cfg.subsample = 1e-4;
  cfg.lr = 0.1;
  cfg.max_iterations = 5;
  cfg.workers = 1;
  const auto det = train(cfg, vocab, docs, tasks, fs::path(work) / "cbow-1");
  const auto& first = det.result.records.front();
  const auto& last = det.result.records.back();
  const double ws1 = metric(first, "ws"), ws5 = metric(last, "ws");
  report("6a", "ws Pearson >= 0.45 after 5 iterations of 50-dim CBOW", ws5 >= 0.45, "ws " + fmt("%.4f", ws5));
  if (have_tfl) {
    const double tfl = metric(last, "tfl");
    report("6b", "tfl accuracy >= 55%", tfl >= 55.0, "tfl " + fmt("%.2f", tfl) + "%");
  } else {
    skip("6b", "tfl accuracy >= 55%", "no " + tfl_path.string());
  }
  report("6c", "iteration-5 ws >= iteration-1 ws", ws5 >= ws1, fmt("%.4f", ws1) + " -> " + fmt("%.4f", ws5));
  report("6d", "single-threaded runtime <= 30 minutes", det.seconds <= 1800, fmt("%.0fs", det.seconds));

  cfg.workers = threads;
  const auto fast = train(cfg, vocab, docs, tasks, fs::path(work) / "cbow-n");
  const double ws_fast = metric(fast.result.records.back(), "ws");
  report("7b", "multi-threaded ws within 0.02 of the deterministic run", std::abs(ws_fast - ws5) <= 0.02,
         std::to_string(threads) + " workers: " + fmt("%.4f", ws_fast) + " vs " + fmt("%.4f", ws5) + ", " +
             fmt("%.0fs", fast.seconds));
  if (threads == 4) report("6e", "4-worker runtime <= 8 minutes", fast.seconds <= 480, fmt("%.0fs", fast.seconds));

  if (models) {
    const auto random = random_embedding(vocab.words(), 50, 1);
    const double base = tasks[0].evaluate(random).value;
    std::vector<std::pair<std::string, double>> scores;
    for (auto kind : {ModelKind::SkipGram, ModelKind::Cbow, ModelKind::Order, ModelKind::Lbl, ModelKind::Nnlm,
                      ModelKind::CW}) {
      double ws = ws_fast;
      if (kind != ModelKind::Cbow) {
        cfg.model = kind;
        const auto r = train(cfg, vocab, docs, tasks, fs::path(work) / std::string(to_string(kind)));
        ws = metric(r.result.records.back(), "ws");
      }
      scores.emplace_back(std::string(to_string(kind)), ws);
    }
    double best = scores[0].second;
    std::string detail;
    for (const auto& [name, v] : scores) {
      best = std::max(best, v);
      detail += name + " " + fmt("%.4f", v) + ", ";
    }
    const double sg = pgr(scores[0].second, best, base);
    detail += "random " + fmt("%.4f", base) + ", skipgram PGR " + fmt("%.2f", sg);
    report("8", "skip-gram ws within 5 PGR points of the best neural model", sg >= 95.0, detail);
  }
  return failures == 0 ? 0 : 1;
}
