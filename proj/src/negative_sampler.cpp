#include "embkit/negative_sampler.hpp"

#include <cmath>

#include "embkit/errors.hpp"

namespace embkit {

NegativeSampler::NegativeSampler(std::span<const std::uint64_t> counts, std::size_t k,
                                 double power)
    : k_(k) {
  if (k < 1) throw UsageError("negative samples must be >= 1");
  if (counts.size() < 2) throw DataError("negative sampling needs a vocabulary of at least 2 words");
  const std::size_t n = counts.size();
  probability_.resize(n);
  double total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    probability_[i] = std::pow(static_cast<double>(counts[i]), power);
    total += probability_[i];
  }
  for (auto& p : probability_) p /= total;

  alias_prob_.assign(n, 0.0);
  alias_.assign(n, 0);
  std::vector<double> scaled(n);
  std::vector<WordId> small, large;
  for (std::size_t i = 0; i < n; ++i) {
    scaled[i] = probability_[i] * static_cast<double>(n);
    (scaled[i] < 1.0 ? small : large).push_back(static_cast<WordId>(i));
  }
  while (!small.empty() && !large.empty()) {
    const WordId s = small.back();
    small.pop_back();
    const WordId l = large.back();
    alias_prob_[s] = scaled[s];
    alias_[s] = l;
    scaled[l] = (scaled[l] + scaled[s]) - 1.0;
    if (scaled[l] < 1.0) {
      large.pop_back();
      small.push_back(l);
    }
  }
  for (WordId i : large) alias_prob_[i] = 1.0;
  for (WordId i : small) alias_prob_[i] = 1.0;
}

WordId NegativeSampler::draw(Rng& rng) const {
  const auto i = static_cast<WordId>(rng.below(alias_.size()));
  return rng.uniform() < alias_prob_[i] ? i : alias_[i];
}

void NegativeSampler::draw_negatives(Rng& rng, WordId exclude, std::span<WordId> out) const {
  for (auto& w : out) {
    do {
      w = draw(rng);
    } while (w == exclude);
  }
}

std::vector<WordId> NegativeSampler::draw_negatives(Rng& rng, WordId exclude) const {
  std::vector<WordId> out(k_);
  draw_negatives(rng, exclude, out);
  return out;
}

}  // namespace embkit
