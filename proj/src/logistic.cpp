#include "embkit/logistic.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include "embkit/errors.hpp"

namespace embkit {

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

class Objective {
 public:
  Objective(std::span<const std::vector<double>> x, std::span<const std::size_t> y, std::size_t classes,
            double l2)
      : x_(x), y_(y), classes_(classes), features_(x.empty() ? 0 : x[0].size()), l2_(l2) {}

  std::size_t size() const { return classes_ * (features_ + 1); }

  double operator()(const std::vector<double>& w, std::vector<double>& grad) const {
    const std::size_t stride = features_ + 1;
    grad.assign(w.size(), 0.0);
    double loss = 0;
    std::vector<double> logits(classes_);
    for (std::size_t i = 0; i < x_.size(); ++i) {
      const auto& xi = x_[i];
      double max_logit = -std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < classes_; ++c) {
        const double* wc = w.data() + c * stride;
        double z = wc[features_];
        for (std::size_t f = 0; f < features_; ++f) z += wc[f] * xi[f];
        logits[c] = z;
        max_logit = std::max(max_logit, z);
      }
      double norm = 0;
      for (double z : logits) norm += std::exp(z - max_logit);
      const double log_norm = max_logit + std::log(norm);
      loss += log_norm - logits[y_[i]];
      for (std::size_t c = 0; c < classes_; ++c) {
        const double g = std::exp(logits[c] - log_norm) - (c == y_[i] ? 1.0 : 0.0);
        double* gc = grad.data() + c * stride;
        for (std::size_t f = 0; f < features_; ++f) gc[f] += g * xi[f];
        gc[features_] += g;
      }
    }
    for (std::size_t c = 0; c < classes_; ++c) {
      for (std::size_t f = 0; f < features_; ++f) {
        const double wcf = w[c * stride + f];
        loss += 0.5 * l2_ * wcf * wcf;
        grad[c * stride + f] += l2_ * wcf;
      }
    }
    return loss;
  }

 private:
  std::span<const std::vector<double>> x_;
  std::span<const std::size_t> y_;
  std::size_t classes_;
  std::size_t features_;
  double l2_;
};

}  // namespace

std::size_t LogisticModel::predict(std::span<const double> x) const {
  const std::size_t stride = features + 1;
  std::size_t best = 0;
  double best_z = -std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < classes; ++c) {
    const double* wc = weights.data() + c * stride;
    double z = wc[features];
    for (std::size_t f = 0; f < features; ++f) z += wc[f] * x[f];
    if (z > best_z) {
      best_z = z;
      best = c;
    }
  }
  return best;
}

LogisticModel train_logistic(std::span<const std::vector<double>> x, std::span<const std::size_t> y,
                             std::size_t classes, double l2, std::size_t max_iterations) {
  if (x.size() != y.size() || x.empty()) throw DataError("logistic regression needs labeled examples");
  if (classes < 2) throw DataError("logistic regression needs at least 2 classes");
  Objective objective(x, y, classes, l2);
  LogisticModel model{classes, x[0].size(), std::vector<double>(objective.size(), 0.0)};

  // L-BFGS, memory 10, backtracking Armijo line search.
  constexpr std::size_t kMemory = 10;
  std::deque<std::vector<double>> s_hist, y_hist;
  std::deque<double> rho_hist;
  std::vector<double>& w = model.weights;
  std::vector<double> grad, new_grad, dir(w.size()), new_w(w.size());
  double f = objective(w, grad);
  for (std::size_t iter = 0; iter < max_iterations; ++iter) {
    if (std::sqrt(dot(grad, grad)) < 1e-6) break;
    // Two-loop recursion.
    dir = grad;
    std::vector<double> alpha(s_hist.size());
    for (std::size_t i = s_hist.size(); i-- > 0;) {
      alpha[i] = rho_hist[i] * dot(s_hist[i], dir);
      for (std::size_t j = 0; j < dir.size(); ++j) dir[j] -= alpha[i] * y_hist[i][j];
    }
    if (!s_hist.empty()) {
      const double gamma = dot(s_hist.back(), y_hist.back()) / dot(y_hist.back(), y_hist.back());
      for (auto& v : dir) v *= gamma;
    } else {
      const double scale = 1.0 / std::max(1.0, std::sqrt(dot(grad, grad)));
      for (auto& v : dir) v *= scale;
    }
    for (std::size_t i = 0; i < s_hist.size(); ++i) {
      const double beta = rho_hist[i] * dot(y_hist[i], dir);
      for (std::size_t j = 0; j < dir.size(); ++j) dir[j] += (alpha[i] - beta) * s_hist[i][j];
    }
    for (auto& v : dir) v = -v;
    double slope = dot(grad, dir);
    if (slope >= 0) {
      // Not a descent direction; restart from steepest descent.
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      for (std::size_t j = 0; j < dir.size(); ++j) dir[j] = -grad[j];
      slope = dot(grad, dir);
    }
    double step = 1.0;
    double new_f = 0;
    bool accepted = false;
    for (int tries = 0; tries < 40; ++tries) {
      for (std::size_t j = 0; j < w.size(); ++j) new_w[j] = w[j] + step * dir[j];
      new_f = objective(new_w, new_grad);
      if (new_f <= f + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
    std::vector<double> s(w.size()), yv(w.size());
    for (std::size_t j = 0; j < w.size(); ++j) {
      s[j] = new_w[j] - w[j];
      yv[j] = new_grad[j] - grad[j];
    }
    const double sy = dot(s, yv);
    w.swap(new_w);
    grad.swap(new_grad);
    const double improvement = f - new_f;
    f = new_f;
    if (sy > 1e-12) {
      s_hist.push_back(std::move(s));
      y_hist.push_back(std::move(yv));
      rho_hist.push_back(1.0 / sy);
      if (s_hist.size() > kMemory) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
    }
    if (improvement <= 1e-10 * std::max(1.0, std::abs(f))) break;
  }
  return model;
}

}  // namespace embkit
