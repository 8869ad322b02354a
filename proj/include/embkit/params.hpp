#pragma once

#include <atomic>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace embkit {

// Parameters are shared between hogwild workers in fast mode. Every scalar
// read and write on a shared block goes through these so that individual
// updates are never torn; on x86-64 they compile to plain moves.
inline double relaxed_load(const double& x) {
  return std::atomic_ref<double>(const_cast<double&>(x)).load(std::memory_order_relaxed);
}

inline void relaxed_store(double& x, double v) {
  std::atomic_ref<double>(x).store(v, std::memory_order_relaxed);
}

struct AdaGradConfig {
  double lr = 0.1;
  double eps = 1e-8;
};

// Per entry: accum += g^2; param -= lr * g / (sqrt(accum) + eps).
// Zero gradients leave both param and accum untouched.
void adagrad_update(std::span<double> params, std::span<double> accum,
                    std::span<const double> grad, const AdaGradConfig& config);

// Row-major matrix with a same-shaped AdaGrad accumulator.
struct ParamBlock {
  std::string name;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;
  std::vector<double> accum;

  ParamBlock() = default;
  ParamBlock(std::string block_name, std::size_t r, std::size_t c)
      : name(std::move(block_name)), rows(r), cols(c), values(r * c, 0.0), accum(r * c, 0.0) {}

  bool allocated() const { return rows * cols > 0; }
  std::span<double> row(std::size_t r) { return {values.data() + r * cols, cols}; }
  std::span<const double> row(std::size_t r) const { return {values.data() + r * cols, cols}; }
  std::span<double> accum_row(std::size_t r) { return {accum.data() + r * cols, cols}; }

  // Relaxed copy of one row into `out` (size cols).
  void load_row(std::size_t r, std::span<double> out) const;
};

// Gradient for one parameter block restricted to the rows a sample touched.
// Adding the same row twice accumulates.
class RowGradients {
 public:
  RowGradients() = default;
  explicit RowGradients(std::size_t cols) : cols_(cols) {}

  void reset(std::size_t cols) {
    cols_ = cols;
    clear();
  }
  void clear() {
    rows_.clear();
    values_.clear();
  }

  std::size_t cols() const { return cols_; }
  std::size_t size() const { return rows_.size(); }
  bool empty() const { return rows_.empty(); }
  std::size_t row_id(std::size_t i) const { return rows_[i]; }
  std::span<double> values(std::size_t i) { return {values_.data() + i * cols_, cols_}; }
  std::span<const double> values(std::size_t i) const { return {values_.data() + i * cols_, cols_}; }

  // Accumulator for `row`, zero-initialized on first use.
  std::span<double> add_row(std::size_t row);

  // Dense lookup; zero when the row was never touched.
  double at(std::size_t row, std::size_t col) const;

  bool all_finite() const;

  // Applies AdaGrad to every touched row of `block` with relaxed access.
  void apply(ParamBlock& block, const AdaGradConfig& config) const;

 private:
  std::size_t cols_ = 0;
  std::vector<std::size_t> rows_;
  std::vector<double> values_;
};

}  // namespace embkit
