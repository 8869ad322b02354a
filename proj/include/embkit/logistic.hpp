#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace embkit {

// Multinomial logistic regression. Weights are classes x (features + 1); the
// last column is the unregularized bias.
struct LogisticModel {
  std::size_t classes = 0;
  std::size_t features = 0;
  std::vector<double> weights;

  std::size_t predict(std::span<const double> x) const;
};

// Minimizes sum_i cross_entropy_i + l2/2 * |W|^2 with full-batch L-BFGS for
// at most `max_iterations` iterations, starting from zero. Deterministic.
LogisticModel train_logistic(std::span<const std::vector<double>> x, std::span<const std::size_t> y,
                             std::size_t classes, double l2, std::size_t max_iterations);

}  // namespace embkit
