#pragma once

// Independent reference implementations used as test oracles. They read raw
// parameter values and recompute everything from the definitions, sharing no
// code with the library beyond its data structures.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "embkit/corpus.hpp"
#include "embkit/embedding.hpp"
#include "embkit/glove.hpp"
#include "embkit/model.hpp"

namespace oracle {

using embkit::Block;
using embkit::ModelKind;
using embkit::NeuralModel;
using embkit::Window;
using embkit::WordId;

inline double log_sigmoid(double x) { return x >= 0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x)); }

inline std::vector<double> input_vector(const NeuralModel& m, WordId id) {
  const auto& in = m.block(Block::Input);
  const std::size_t row = id == embkit::kPad ? m.vocab_size() : id;
  return {in.values.begin() + static_cast<std::ptrdiff_t>(row * in.cols),
          in.values.begin() + static_cast<std::ptrdiff_t>((row + 1) * in.cols)};
}

inline std::vector<double> matvec(const embkit::ParamBlock& H, const std::vector<double>& x) {
  std::vector<double> y(H.rows, 0.0);
  for (std::size_t i = 0; i < H.rows; ++i)
    for (std::size_t j = 0; j < H.cols; ++j) y[i] += H.values[i * H.cols + j] * x[j];
  return y;
}

// Context representations straight from the definitions.
inline std::vector<std::vector<double>> representations(const NeuralModel& m, const Window& w) {
  const auto kind = m.spec().kind;
  std::vector<std::vector<double>> out;
  if (kind == ModelKind::SkipGram) {
    for (WordId id : w.context)
      if (id != embkit::kPad) out.push_back(input_vector(m, id));
    return out;
  }
  if (kind == ModelKind::Cbow) {
    std::vector<double> mean(m.spec().dim, 0.0);
    int n = 0;
    for (WordId id : w.context) {
      if (id == embkit::kPad) continue;
      auto v = input_vector(m, id);
      for (std::size_t j = 0; j < mean.size(); ++j) mean[j] += v[j];
      ++n;
    }
    if (n == 0) return out;
    for (auto& v : mean) v /= n;
    out.push_back(mean);
    return out;
  }
  std::vector<double> x;
  for (WordId id : w.context) {
    auto v = input_vector(m, id);
    x.insert(x.end(), v.begin(), v.end());
  }
  if (kind == ModelKind::Order) {
    out.push_back(x);
    return out;
  }
  auto h = matvec(m.block(Block::Hidden), x);
  if (kind == ModelKind::Nnlm) {
    for (std::size_t i = 0; i < h.size(); ++i) {
      h[i] += m.block(Block::HiddenBias).values[i];
      if (m.spec().activation == embkit::Activation::Tanh) h[i] = std::tanh(h[i]);
    }
  }
  out.push_back(h);
  return out;
}

inline double energy(const NeuralModel& m, const std::vector<double>& h, WordId w) {
  const auto& out = m.block(Block::Output);
  double s = 0;
  for (std::size_t j = 0; j < h.size(); ++j) s += out.values[w * out.cols + j] * h[j];
  return s;
}

// -log sigma(E_target) - sum log sigma(-E_neg), summed over representations.
inline double predict_loss(const NeuralModel& m, const Window& w, const std::vector<WordId>& negatives,
                           std::size_t k) {
  const auto reps = representations(m, w);
  double loss = 0;
  for (std::size_t r = 0; r < reps.size(); ++r) {
    loss -= log_sigmoid(energy(m, reps[r], w.target));
    for (std::size_t i = 0; i < k; ++i) loss -= log_sigmoid(-energy(m, reps[r], negatives[r * k + i]));
  }
  return loss;
}

inline double cw_score(const NeuralModel& m, const Window& w, WordId target) {
  const std::size_t radius = m.spec().radius;
  std::vector<double> z;
  for (std::size_t s = 0; s < w.context.size(); ++s) {
    if (s == radius) {
      auto t = input_vector(m, target);
      z.insert(z.end(), t.begin(), t.end());
    }
    auto v = input_vector(m, w.context[s]);
    z.insert(z.end(), v.begin(), v.end());
  }
  const auto a = matvec(m.block(Block::Hidden), z);
  double s = m.block(Block::ScoreBias).values[0];
  for (std::size_t i = 0; i < a.size(); ++i)
    s += m.block(Block::ScoreWeight).values[i] * std::tanh(a[i] + m.block(Block::HiddenBias).values[i]);
  return s;
}

inline double cw_loss(const NeuralModel& m, const Window& w, WordId corrupt) {
  return std::max(0.0, 1.0 - oracle::cw_score(m, w, w.target) + oracle::cw_score(m, w, corrupt));
}

// Norm-wise relative error ||a - b|| / max(||a||, ||b||, 1e-6). The floor
// absorbs central-difference rounding noise (about 1e-11 here) on blocks whose
// true gradient is zero, such as a bias that cancels out of the loss.
inline double relative_error(const std::vector<double>& a, const std::vector<double>& b) {
  double diff = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (a[i] - b[i]) * (a[i] - b[i]);
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  const double scale = std::max({std::sqrt(na), std::sqrt(nb), 1e-6});
  return std::sqrt(diff) / scale;
}

// Central differences of `loss` with respect to every entry of `values`.
inline std::vector<double> numeric_gradient(std::vector<double>& values, const std::function<double()>& loss,
                                            double step = 1e-5) {
  std::vector<double> g(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double saved = values[i];
    values[i] = saved + step;
    const double up = loss();
    values[i] = saved - step;
    const double down = loss();
    values[i] = saved;
    g[i] = (up - down) / (2 * step);
  }
  return g;
}

inline std::vector<double> dense(const embkit::RowGradients& g, const embkit::ParamBlock& block) {
  std::vector<double> out(block.values.size(), 0.0);
  for (std::size_t r = 0; r < block.rows; ++r)
    for (std::size_t c = 0; c < block.cols; ++c) out[r * block.cols + c] = g.at(r, c);
  return out;
}

inline double glove_cell_loss(const embkit::GloveModel& m, const embkit::Cooccurrence& cell, double x_max = 100,
                              double alpha = 0.75) {
  const std::size_t d = m.dim();
  double pred = m.main_bias.values[cell.word] + m.context_bias.values[cell.context];
  for (std::size_t k = 0; k < d; ++k) pred += m.main.values[cell.word * d + k] * m.context.values[cell.context * d + k];
  const double f = cell.count < x_max ? std::pow(cell.count / x_max, alpha) : 1.0;
  const double r = pred - std::log(cell.count);
  return f * r * r;
}

// ---- evaluation oracles -----------------------------------------------------

inline double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  double ab = 0, aa = 0, bb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  return ab / std::sqrt(aa * bb);
}

inline std::vector<double> row(const embkit::EmbeddingTable& t, std::size_t i) {
  const auto r = t.row(i);
  return {r.begin(), r.end()};
}

// Exhaustive argmax of cosine(v_b - v_a + v_c, v_i) over i not in {a, b, c};
// earliest id wins ties.
inline std::size_t analogy(const embkit::EmbeddingTable& t, std::size_t a, std::size_t b, std::size_t c,
                           bool exclude = true) {
  std::vector<double> q(t.dim());
  for (std::size_t j = 0; j < t.dim(); ++j) q[j] = double{t.row(b)[j]} - t.row(a)[j] + t.row(c)[j];
  std::size_t best = t.size();
  double best_sim = -2;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (exclude && (i == a || i == b || i == c)) continue;
    const double s = cosine(q, row(t, i));
    if (s > best_sim) {
      best_sim = s;
      best = i;
    }
  }
  return best;
}

// Every id ranked by (similarity desc, id asc); a full sort.
inline std::vector<std::pair<std::size_t, double>> ranking(const embkit::EmbeddingTable& t, const std::vector<double>& q,
                                                          std::size_t exclude) {
  std::vector<std::pair<std::size_t, double>> all;
  for (std::size_t i = 0; i < t.size(); ++i)
    if (i != exclude) all.emplace_back(i, cosine(q, row(t, i)));
  std::sort(all.begin(), all.end(), [](const auto& x, const auto& y) {
    return x.second != y.second ? x.second > y.second : x.first < y.first;
  });
  return all;
}

// Textbook single-pass Pearson formula.
inline double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    syy += y[i] * y[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / std::sqrt((n * sxx - sx * sx) * (n * syy - sy * sy));
}

// Word frequencies by a plain counting pass; ties ordered by first sight.
inline std::vector<std::pair<std::string, std::uint64_t>> top_words(const std::vector<std::string>& tokens,
                                                                  std::size_t cap) {
  std::map<std::string, std::pair<std::uint64_t, std::size_t>> seen;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    auto [it, fresh] = seen.try_emplace(tokens[i], 0, i);
    ++it->second.first;
  }
  std::vector<std::tuple<std::uint64_t, std::size_t, std::string>> rows;
  for (auto& [w, v] : seen) rows.emplace_back(v.first, v.second, w);
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
    return std::get<0>(a) != std::get<0>(b) ? std::get<0>(a) > std::get<0>(b) : std::get<1>(a) < std::get<1>(b);
  });
  std::vector<std::pair<std::string, std::uint64_t>> out;
  for (std::size_t i = 0; i < rows.size() && i < cap; ++i) out.emplace_back(std::get<2>(rows[i]), std::get<0>(rows[i]));
  return out;
}

inline double pgr(double a, double b, double r) { return 100.0 * (a - r) / (b - r); }

// Win table by brute force: each signal's stop iteration is found by scanning
// every iteration; a win compares gains over the baseline.
struct StopCase {
  std::vector<double> loss;                 // per iteration
  std::vector<std::vector<double>> metric;  // [task][iteration]
  std::vector<double> baseline;             // per task
};

inline std::vector<std::vector<bool>> win_table(const StopCase& c) {
  const std::size_t n = c.loss.size();
  std::vector<std::size_t> stops;
  std::size_t best = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (c.loss[i] < c.loss[best]) best = i;
  stops.push_back(best);
  for (const auto& m : c.metric) {
    std::size_t p = 0;
    for (std::size_t i = 0; i < n; ++i)
      if (m[i] > m[p]) p = i;
    stops.push_back(p);
  }
  std::vector<std::vector<bool>> wins;
  for (std::size_t s : stops) {
    std::vector<bool> row;
    for (std::size_t t = 0; t < c.metric.size(); ++t) {
      const double peak = *std::max_element(c.metric[t].begin(), c.metric[t].end());
      const double got = c.metric[t][s];
      row.push_back(got == peak || (got - c.baseline[t]) >= 0.95 * (peak - c.baseline[t]));
    }
    wins.push_back(row);
  }
  return wins;
}

}  // namespace oracle
