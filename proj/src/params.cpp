#include "embkit/params.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace embkit {

namespace {

inline void adagrad_entry(double& param, double& acc, double g, const AdaGradConfig& config) {
  if (g == 0.0) return;
  const double a = relaxed_load(acc) + g * g;
  relaxed_store(acc, a);
  relaxed_store(param, relaxed_load(param) - config.lr * g / (std::sqrt(a) + config.eps));
}

}  // namespace

void adagrad_update(std::span<double> params, std::span<double> accum,
                    std::span<const double> grad, const AdaGradConfig& config) {
  if (params.size() != grad.size() || accum.size() != grad.size())
    throw std::invalid_argument("adagrad_update: shape mismatch");
  for (std::size_t i = 0; i < grad.size(); ++i) adagrad_entry(params[i], accum[i], grad[i], config);
}

void ParamBlock::load_row(std::size_t r, std::span<double> out) const {
  const double* src = values.data() + r * cols;
  for (std::size_t j = 0; j < cols; ++j) out[j] = relaxed_load(src[j]);
}

std::span<double> RowGradients::add_row(std::size_t row) {
  for (std::size_t i = rows_.size(); i-- > 0;) {
    if (rows_[i] == row) return values(i);
  }
  rows_.push_back(row);
  values_.resize(values_.size() + cols_, 0.0);
  return values(rows_.size() - 1);
}

double RowGradients::at(std::size_t row, std::size_t col) const {
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    if (rows_[i] == row) return values_[i * cols_ + col];
  }
  return 0.0;
}

bool RowGradients::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

void RowGradients::apply(ParamBlock& block, const AdaGradConfig& config) const {
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    double* p = block.values.data() + rows_[i] * cols_;
    double* a = block.accum.data() + rows_[i] * cols_;
    const double* g = values_.data() + i * cols_;
    for (std::size_t j = 0; j < cols_; ++j) adagrad_entry(p[j], a[j], g[j], config);
  }
}

}  // namespace embkit
