#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace embkit {

// (p_a - p_rand) / (p_b - p_rand) * 100. Throws NumericalError("degenerate
// baseline") when p_b == p_rand.
double pgr(double p_a, double p_b, double p_rand);

inline constexpr double kWinThreshold = 95.0;

struct PgrCell {
  double p_a = 0;
  double p_b = 0;
  double p_rand = 0;
  double pgr = 0;
  bool win = false;
};

struct PgrReport {
  std::vector<std::string> embeddings;
  std::vector<std::string> tasks;
  std::vector<std::vector<PgrCell>> cells;  // [embedding][task]

  std::size_t wins_for_task(std::size_t task) const;
  std::size_t wins_for_embedding(std::size_t embedding) const;

  // Tab-separated: header row, one row per embedding with cells
  // "PGR% (p_a)", then a "wins" row with per-task win counts.
  std::string to_tsv() const;
};

// `results[e][t]` is embedding e's metric on task t; `baselines[t]` the
// random embedding's. p_b is the per-task maximum over embeddings. Throws
// DataError when a task's best result does not exceed its baseline.
PgrReport build_pgr_report(std::vector<std::string> embeddings, std::vector<std::string> tasks,
                           const std::vector<std::vector<double>>& results,
                           const std::vector<double>& baselines);

}  // namespace embkit
