#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "embkit/corpus.hpp"
#include "embkit/embedding.hpp"
#include "embkit/negative_sampler.hpp"
#include "embkit/params.hpp"
#include "embkit/random.hpp"

namespace embkit {

enum class ModelKind { SkipGram, Cbow, Order, Lbl, Nnlm, CW, Glove };

std::string_view to_string(ModelKind kind);
ModelKind parse_model_kind(std::string_view name);

// NNLM hidden activation. Identity exists so tests can reduce NNLM to LBL.
enum class Activation { Tanh, Identity };

struct ModelSpec {
  ModelKind kind = ModelKind::Cbow;
  std::size_t dim = 50;
  std::size_t radius = 5;
  // Width of the LBL/NNLM hidden layer and of the C&W scorer; 0 means `dim`.
  std::size_t hidden_dim = 0;
  Activation activation = Activation::Tanh;

  std::size_t slots() const { return 2 * radius; }
  std::size_t hidden_width() const { return hidden_dim == 0 ? dim : hidden_dim; }
  // Width of the context representation h, hence of each e'(w) row.
  std::size_t output_width() const;
};

enum class Block : std::size_t { Input, Output, Hidden, HiddenBias, ScoreWeight, ScoreBias };
inline constexpr std::size_t kBlockCount = 6;

// Parameters of one of the six neural models.
//
//   Input       (V+1) x d          e(w); row V is the PAD embedding
//   Output      V x h              e'(w)            predict models
//   Hidden      h x 2w*d           H                LBL, NNLM
//               h x (2w+1)*d       first layer      C&W (target block = A)
//   HiddenBias  1 x h              bias d           NNLM; C&W first-layer bias
//   ScoreWeight 1 x h                               C&W
//   ScoreBias   1 x 1                               C&W
//
// Unused blocks stay unallocated.
class NeuralModel {
 public:
  NeuralModel(const ModelSpec& spec, std::size_t vocab_size, std::uint64_t seed);

  const ModelSpec& spec() const { return spec_; }
  std::size_t vocab_size() const { return vocab_size_; }
  std::size_t input_row(WordId id) const { return id == kPad ? vocab_size_ : id; }

  bool has(Block b) const { return blocks_[index(b)].allocated(); }
  ParamBlock& block(Block b) { return blocks_[index(b)]; }
  const ParamBlock& block(Block b) const { return blocks_[index(b)]; }
  std::array<ParamBlock, kBlockCount>& blocks() { return blocks_; }
  const std::array<ParamBlock, kBlockCount>& blocks() const { return blocks_; }

  bool all_finite() const;

 private:
  static std::size_t index(Block b) { return static_cast<std::size_t>(b); }

  ModelSpec spec_;
  std::size_t vocab_size_;
  std::array<ParamBlock, kBlockCount> blocks_;
};

// Sparse per-block gradient of one training sample.
struct Gradients {
  std::array<RowGradients, kBlockCount> blocks;

  void reset(const NeuralModel& model);
  RowGradients& operator[](Block b) { return blocks[static_cast<std::size_t>(b)]; }
  const RowGradients& operator[](Block b) const { return blocks[static_cast<std::size_t>(b)]; }
  bool all_finite() const;
  void apply(NeuralModel& model, const AdaGradConfig& config) const;
};

// Context representation h. Skip-gram yields one vector per non-PAD context
// word; the others yield exactly one. nullopt signals "no training sample"
// (an all-PAD window under CBOW or Skip-gram).
std::optional<std::vector<std::vector<double>>> represent_context(const NeuralModel& model,
                                                                  const Window& window);

// e'(word) . h
double predict_energy(const NeuralModel& model, std::span<const double> h, WordId word);

// C&W score of `target` placed at the center of `window`.
double cw_score(const NeuralModel& model, const Window& window, WordId target);

struct SampleLoss {
  double loss = 0;
  // Number of (representation, target) predictions the loss sums over: the
  // non-PAD context count for Skip-gram, 1 otherwise.
  std::size_t predictions = 0;
};

// Reusable buffers so the training loop does not allocate per sample.
struct Workspace {
  Gradients grads;
  std::vector<WordId> negatives;
  std::vector<double> x, h, a, g_h, g_a, g_x, row;
  std::vector<double> z_neg, u_pos, u_neg, bc;
};

// Negative-sampling loss of one window with explicit negatives: `k` per
// prediction, laid out prediction by prediction. Adds the gradient into
// `grads` when non-null. nullopt for a skipped window.
std::optional<SampleLoss> predict_loss(const NeuralModel& model, const Window& window,
                                       std::span<const WordId> negatives, std::size_t k,
                                       Gradients* grads, Workspace& ws);
std::optional<SampleLoss> predict_loss(const NeuralModel& model, const Window& window,
                                       std::span<const WordId> negatives, std::size_t k,
                                       Gradients* grads = nullptr);

// max(0, 1 - s(w, c) + s(w', c)); adds the gradient when the loss is > 0.
double cw_loss(const NeuralModel& model, const Window& window, WordId corrupt, Gradients* grads,
               Workspace& ws);
double cw_loss(const NeuralModel& model, const Window& window, WordId corrupt,
               Gradients* grads = nullptr);

// Uniform over the vocabulary excluding `target`.
WordId draw_corruption(Rng& rng, std::size_t vocab_size, WordId target);

// One SGD step: draws negatives, computes the loss and its gradient at the
// current parameters, applies AdaGrad. Returns the pre-update loss. Throws
// NumericalError naming the window position on a non-finite loss/gradient.
std::optional<SampleLoss> train_predict_sample(NeuralModel& model, const AdaGradConfig& opt,
                                               const NegativeSampler& sampler,
                                               const Window& window, Rng& rng, Workspace& ws);

double train_cw_sample(NeuralModel& model, const AdaGradConfig& opt, const Window& window,
                       Rng& rng, Workspace& ws);

// Mean objective per prediction over `windows`, negatives (or corruptions)
// drawn from Rng(seed) so repeated calls are comparable. No updates.
double validation_loss(const NeuralModel& model, const NegativeSampler& sampler,
                       std::span<const Window> windows, std::uint64_t seed);

// The exported embedding is e(w) without the PAD row.
EmbeddingTable export_embeddings(const NeuralModel& model, const Vocabulary& vocab);

}  // namespace embkit
