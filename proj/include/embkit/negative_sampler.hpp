#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "embkit/corpus.hpp"
#include "embkit/random.hpp"

namespace embkit {

// Draws noise words from the unigram distribution raised to `power`
// (count^0.75 by default) using Vose's alias method.
class NegativeSampler {
 public:
  NegativeSampler(std::span<const std::uint64_t> counts, std::size_t k, double power = 0.75);

  std::size_t k() const { return k_; }
  std::size_t vocab_size() const { return probability_.size(); }
  double probability(WordId id) const { return probability_.at(id); }

  WordId draw(Rng& rng) const;

  // Fills `out` with i.i.d. draws, redrawing any that equal `exclude`.
  void draw_negatives(Rng& rng, WordId exclude, std::span<WordId> out) const;
  std::vector<WordId> draw_negatives(Rng& rng, WordId exclude) const;

 private:
  std::size_t k_;
  std::vector<double> probability_;
  std::vector<double> alias_prob_;
  std::vector<WordId> alias_;
};

}  // namespace embkit
