#include "embkit/pgr.hpp"

#include <algorithm>
#include <cstdio>

#include "embkit/errors.hpp"

namespace embkit {

double pgr(double p_a, double p_b, double p_rand) {
  if (p_b == p_rand) throw NumericalError("degenerate baseline");
  return (p_a - p_rand) / (p_b - p_rand) * 100.0;
}

std::size_t PgrReport::wins_for_task(std::size_t task) const {
  std::size_t n = 0;
  for (const auto& row : cells) n += row.at(task).win ? 1 : 0;
  return n;
}

std::size_t PgrReport::wins_for_embedding(std::size_t embedding) const {
  const auto& row = cells.at(embedding);
  return static_cast<std::size_t>(std::count_if(row.begin(), row.end(), [](const PgrCell& c) { return c.win; }));
}

std::string PgrReport::to_tsv() const {
  std::string out = "embedding";
  for (const auto& t : tasks) out += '\t' + t;
  out += '\n';
  char buf[96];
  for (std::size_t e = 0; e < embeddings.size(); ++e) {
    out += embeddings[e];
    for (const auto& c : cells[e]) {
      std::snprintf(buf, sizeof buf, "\t%.2f%% (%.4g)", c.pgr, c.p_a);
      out += buf;
    }
    out += '\n';
  }
  out += "wins";
  for (std::size_t t = 0; t < tasks.size(); ++t) out += '\t' + std::to_string(wins_for_task(t));
  out += '\n';
  return out;
}

PgrReport build_pgr_report(std::vector<std::string> embeddings, std::vector<std::string> tasks,
                           const std::vector<std::vector<double>>& results,
                           const std::vector<double>& baselines) {
  if (embeddings.empty() || tasks.empty()) throw UsageError("PGR report needs at least one embedding and one task");
  if (results.size() != embeddings.size() || baselines.size() != tasks.size())
    throw UsageError("PGR report: result matrix does not match embeddings x tasks");
  for (const auto& row : results) {
    if (row.size() != tasks.size()) throw UsageError("PGR report: result matrix does not match embeddings x tasks");
  }
  PgrReport report{std::move(embeddings), std::move(tasks), {}};
  report.cells.assign(results.size(), std::vector<PgrCell>(report.tasks.size()));
  for (std::size_t t = 0; t < report.tasks.size(); ++t) {
    double best = results[0][t];
    for (const auto& row : results) best = std::max(best, row[t]);
    if (best <= baselines[t]) {
      if (best == baselines[t]) throw NumericalError("degenerate baseline");
      throw DataError("task " + report.tasks[t] + ": best result is below the random baseline");
    }
    for (std::size_t e = 0; e < results.size(); ++e) {
      PgrCell& c = report.cells[e][t];
      c.p_a = results[e][t];
      c.p_b = best;
      c.p_rand = baselines[t];
      c.pgr = pgr(c.p_a, c.p_b, c.p_rand);
      c.win = c.pgr >= kWinThreshold;
    }
  }
  return report;
}

}  // namespace embkit
