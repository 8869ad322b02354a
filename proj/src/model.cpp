#include "embkit/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "embkit/errors.hpp"

namespace embkit {

namespace {

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

void fill_uniform(ParamBlock& block, Rng& rng, double bound) {
  for (auto& v : block.values) v = rng.uniform(-bound, bound);
}

double glorot_bound(std::size_t fan_in, std::size_t fan_out) {
  return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
}

bool is_predict(ModelKind k) {
  return k == ModelKind::SkipGram || k == ModelKind::Cbow || k == ModelKind::Order ||
         k == ModelKind::Lbl || k == ModelKind::Nnlm;
}

void check_window(const ModelSpec& spec, const Window& window) {
  if (window.context.size() != spec.slots())
    throw UsageError("window has " + std::to_string(window.context.size()) +
                     " slots, model expects " + std::to_string(spec.slots()));
}

// Loss of predicting `target` (positive) and `negatives` from representation
// h. Accumulates d loss / d h into g_h and the e' gradients into grads.
double score_prediction(const NeuralModel& model, std::span<const double> h, WordId target,
                        std::span<const WordId> negatives, Gradients* grads, std::span<double> g_h,
                        std::vector<double>& row) {
  const ParamBlock& out = model.block(Block::Output);
  row.resize(out.cols);
  double loss = 0;
  for (std::size_t i = 0; i <= negatives.size(); ++i) {
    const bool positive = i == 0;
    const WordId w = positive ? target : negatives[i - 1];
    out.load_row(w, row);
    const double energy = dot(row, h);
    loss += positive ? softplus(-energy) : softplus(energy);
    if (grads) {
      const double g = sigmoid(energy) - (positive ? 1.0 : 0.0);
      axpy(g, h, (*grads)[Block::Output].add_row(w));
      axpy(g, row, g_h);
    }
  }
  return loss;
}

// x = concatenation of every slot's input embedding (PAD included).
void gather_concat(const NeuralModel& model, const Window& window, std::vector<double>& x) {
  const ParamBlock& in = model.block(Block::Input);
  const std::size_t d = in.cols;
  x.resize(window.context.size() * d);
  for (std::size_t s = 0; s < window.context.size(); ++s)
    in.load_row(model.input_row(window.context[s]), std::span<double>(x).subspan(s * d, d));
}

// a = bias + H x for LBL/NNLM, then h = act(a).
void hidden_forward(const NeuralModel& model, std::span<const double> x, Workspace& ws) {
  const ModelSpec& spec = model.spec();
  const ParamBlock& H = model.block(Block::Hidden);
  ws.a.assign(H.rows, 0.0);
  ws.row.resize(H.cols);
  const bool has_bias = model.has(Block::HiddenBias);
  for (std::size_t i = 0; i < H.rows; ++i) {
    H.load_row(i, ws.row);
    ws.a[i] = dot(ws.row, x) + (has_bias ? relaxed_load(model.block(Block::HiddenBias).values[i]) : 0.0);
  }
  ws.h = ws.a;
  if (spec.kind == ModelKind::Nnlm && spec.activation == Activation::Tanh) {
    for (auto& v : ws.h) v = std::tanh(v);
  }
}

}  // namespace

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::SkipGram: return "skipgram";
    case ModelKind::Cbow: return "cbow";
    case ModelKind::Order: return "order";
    case ModelKind::Lbl: return "lbl";
    case ModelKind::Nnlm: return "nnlm";
    case ModelKind::CW: return "cw";
    case ModelKind::Glove: return "glove";
  }
  return "?";
}

ModelKind parse_model_kind(std::string_view name) {
  for (auto k : {ModelKind::SkipGram, ModelKind::Cbow, ModelKind::Order, ModelKind::Lbl,
                 ModelKind::Nnlm, ModelKind::CW, ModelKind::Glove}) {
    if (to_string(k) == name) return k;
  }
  if (name == "skip-gram" || name == "sg") return ModelKind::SkipGram;
  if (name == "c&w") return ModelKind::CW;
  throw UsageError("unknown model '" + std::string(name) + "'");
}

std::size_t ModelSpec::output_width() const {
  switch (kind) {
    case ModelKind::Order: return slots() * dim;
    case ModelKind::Lbl:
    case ModelKind::Nnlm: return hidden_width();
    default: return dim;
  }
}

NeuralModel::NeuralModel(const ModelSpec& spec, std::size_t vocab_size, std::uint64_t seed)
    : spec_(spec), vocab_size_(vocab_size) {
  if (spec.kind == ModelKind::Glove) throw UsageError("GloVe is not a neural model");
  if (spec.dim < 1) throw UsageError("dimension must be >= 1");
  if (spec.radius < 1) throw UsageError("window radius must be >= 1");
  if (vocab_size < 2) throw DataError("vocabulary must have at least 2 words");
  const std::size_t d = spec.dim;
  const std::size_t hw = spec.hidden_width();
  Rng rng(seed);

  block(Block::Input) = ParamBlock("input", vocab_size + 1, d);
  fill_uniform(block(Block::Input), rng, 0.5 / static_cast<double>(d));

  if (is_predict(spec.kind)) block(Block::Output) = ParamBlock("output", vocab_size, spec.output_width());

  // The hidden and scorer weights get a random start: with e'(w) zero, an
  // all-zero H (or C&W scorer) has identically zero gradient and never moves.
  if (spec.kind == ModelKind::Lbl || spec.kind == ModelKind::Nnlm) {
    auto& H = block(Block::Hidden) = ParamBlock("hidden", hw, spec.slots() * d);
    fill_uniform(H, rng, glorot_bound(H.cols, H.rows));
    if (spec.kind == ModelKind::Nnlm) block(Block::HiddenBias) = ParamBlock("hidden_bias", 1, hw);
  }
  if (spec.kind == ModelKind::CW) {
    auto& W = block(Block::Hidden) = ParamBlock("first_layer", hw, (spec.slots() + 1) * d);
    fill_uniform(W, rng, glorot_bound(W.cols, W.rows));
    block(Block::HiddenBias) = ParamBlock("first_bias", 1, hw);
    auto& v = block(Block::ScoreWeight) = ParamBlock("score_weight", 1, hw);
    fill_uniform(v, rng, glorot_bound(hw, 1));
    block(Block::ScoreBias) = ParamBlock("score_bias", 1, 1);
  }
}

bool NeuralModel::all_finite() const {
  for (const auto& b : blocks_) {
    for (double v : b.values) {
      if (!std::isfinite(v)) return false;
    }
  }
  return true;
}

void Gradients::reset(const NeuralModel& model) {
  for (std::size_t i = 0; i < kBlockCount; ++i) blocks[i].reset(model.blocks()[i].cols);
}

bool Gradients::all_finite() const {
  return std::all_of(blocks.begin(), blocks.end(), [](const RowGradients& g) { return g.all_finite(); });
}

void Gradients::apply(NeuralModel& model, const AdaGradConfig& config) const {
  for (std::size_t i = 0; i < kBlockCount; ++i) {
    if (!blocks[i].empty()) blocks[i].apply(model.blocks()[i], config);
  }
}

std::optional<std::vector<std::vector<double>>> represent_context(const NeuralModel& model,
                                                                  const Window& window) {
  const ModelSpec& spec = model.spec();
  check_window(spec, window);
  if (spec.kind == ModelKind::CW) throw UsageError("C&W has no predictive context representation");
  const ParamBlock& in = model.block(Block::Input);
  std::vector<std::vector<double>> out;
  switch (spec.kind) {
    case ModelKind::SkipGram:
      for (WordId id : window.context) {
        if (id == kPad) continue;
        out.emplace_back(spec.dim);
        in.load_row(id, out.back());
      }
      if (out.empty()) return std::nullopt;
      return out;
    case ModelKind::Cbow: {
      if (window.context_len == 0) return std::nullopt;
      std::vector<double> h(spec.dim, 0.0), row(spec.dim);
      for (WordId id : window.context) {
        if (id == kPad) continue;
        in.load_row(id, row);
        axpy(1.0, row, h);
      }
      for (auto& v : h) v /= static_cast<double>(window.context_len);
      out.push_back(std::move(h));
      return out;
    }
    default: {
      Workspace ws;
      gather_concat(model, window, ws.x);
      if (spec.kind == ModelKind::Order) {
        out.push_back(ws.x);
      } else {
        hidden_forward(model, ws.x, ws);
        out.push_back(ws.h);
      }
      return out;
    }
  }
}

double predict_energy(const NeuralModel& model, std::span<const double> h, WordId word) {
  const ParamBlock& out = model.block(Block::Output);
  if (h.size() != out.cols) throw UsageError("representation width does not match e'(w)");
  std::vector<double> row(out.cols);
  out.load_row(word, row);
  return dot(row, h);
}

std::optional<SampleLoss> predict_loss(const NeuralModel& model, const Window& window,
                                       std::span<const WordId> negatives, std::size_t k,
                                       Gradients* grads, Workspace& ws) {
  const ModelSpec& spec = model.spec();
  check_window(spec, window);
  if (!is_predict(spec.kind)) throw UsageError("predict_loss needs a predict model");
  const ParamBlock& in = model.block(Block::Input);
  const std::size_t d = spec.dim;
  SampleLoss result;

  if (spec.kind == ModelKind::SkipGram) {
    if (window.context_len == 0) return std::nullopt;
    if (negatives.size() != k * window.context_len)
      throw UsageError("skip-gram needs k negatives per context word");
    ws.h.resize(d);
    ws.g_h.resize(d);
    for (WordId id : window.context) {
      if (id == kPad) continue;
      in.load_row(id, ws.h);
      std::fill(ws.g_h.begin(), ws.g_h.end(), 0.0);
      result.loss += score_prediction(model, ws.h, window.target,
                                      negatives.subspan(result.predictions * k, k), grads, ws.g_h,
                                      ws.row);
      if (grads) axpy(1.0, ws.g_h, (*grads)[Block::Input].add_row(id));
      ++result.predictions;
    }
    return result;
  }

  if (spec.kind == ModelKind::Cbow && window.context_len == 0) return std::nullopt;
  if (negatives.size() != k) throw UsageError("expected k negatives");
  result.predictions = 1;

  if (spec.kind == ModelKind::Cbow) {
    const double inv_n = 1.0 / static_cast<double>(window.context_len);
    ws.h.assign(d, 0.0);
    ws.row.resize(d);
    for (WordId id : window.context) {
      if (id == kPad) continue;
      in.load_row(id, ws.row);
      axpy(inv_n, ws.row, ws.h);
    }
    ws.g_h.assign(d, 0.0);
    result.loss = score_prediction(model, ws.h, window.target, negatives, grads, ws.g_h, ws.row);
    if (grads) {
      for (WordId id : window.context) {
        if (id != kPad) axpy(inv_n, ws.g_h, (*grads)[Block::Input].add_row(id));
      }
    }
    return result;
  }

  gather_concat(model, window, ws.x);
  if (spec.kind == ModelKind::Order) {
    ws.g_h.assign(ws.x.size(), 0.0);
    result.loss = score_prediction(model, ws.x, window.target, negatives, grads, ws.g_h, ws.row);
    if (grads) {
      for (std::size_t s = 0; s < window.context.size(); ++s)
        axpy(1.0, std::span<const double>(ws.g_h).subspan(s * d, d),
             (*grads)[Block::Input].add_row(model.input_row(window.context[s])));
    }
    return result;
  }

  // LBL / NNLM
  hidden_forward(model, ws.x, ws);
  ws.g_h.assign(ws.h.size(), 0.0);
  result.loss = score_prediction(model, ws.h, window.target, negatives, grads, ws.g_h, ws.row);
  if (!grads) return result;

  ws.g_a = ws.g_h;
  if (spec.kind == ModelKind::Nnlm && spec.activation == Activation::Tanh) {
    for (std::size_t i = 0; i < ws.g_a.size(); ++i) ws.g_a[i] *= 1.0 - ws.h[i] * ws.h[i];
  }
  if (model.has(Block::HiddenBias)) axpy(1.0, ws.g_a, (*grads)[Block::HiddenBias].add_row(0));
  const ParamBlock& H = model.block(Block::Hidden);
  ws.g_x.assign(H.cols, 0.0);
  ws.row.resize(H.cols);
  for (std::size_t i = 0; i < H.rows; ++i) {
    axpy(ws.g_a[i], ws.x, (*grads)[Block::Hidden].add_row(i));
    H.load_row(i, ws.row);
    axpy(ws.g_a[i], ws.row, ws.g_x);
  }
  for (std::size_t s = 0; s < window.context.size(); ++s)
    axpy(1.0, std::span<const double>(ws.g_x).subspan(s * d, d),
         (*grads)[Block::Input].add_row(model.input_row(window.context[s])));
  return result;
}

std::optional<SampleLoss> predict_loss(const NeuralModel& model, const Window& window,
                                       std::span<const WordId> negatives, std::size_t k,
                                       Gradients* grads) {
  Workspace ws;
  return predict_loss(model, window, negatives, k, grads, ws);
}

namespace {

// C&W forward for a true target and a corruption sharing the same context.
// Fills ws.u_pos / ws.u_neg with the hidden activations and returns
// (s(w, c), s(w', c)).
std::pair<double, double> cw_forward(const NeuralModel& model, const Window& window, WordId target,
                                     WordId corrupt, Workspace& ws) {
  const ModelSpec& spec = model.spec();
  const std::size_t d = spec.dim;
  const std::size_t w = spec.radius;
  const ParamBlock& in = model.block(Block::Input);
  const ParamBlock& W = model.block(Block::Hidden);
  const ParamBlock& b1 = model.block(Block::HiddenBias);
  const ParamBlock& v = model.block(Block::ScoreWeight);

  // ws.x holds the context slots in sequence order with the target block
  // left empty; z_neg holds e(w'), ws.h holds e(w).
  ws.x.assign(W.cols, 0.0);
  for (std::size_t s = 0; s < window.context.size(); ++s) {
    const std::size_t block = s < w ? s : s + 1;
    in.load_row(model.input_row(window.context[s]), std::span<double>(ws.x).subspan(block * d, d));
  }
  ws.h.resize(d);
  ws.z_neg.resize(d);
  in.load_row(model.input_row(target), ws.h);
  in.load_row(model.input_row(corrupt), ws.z_neg);

  ws.row.resize(W.cols);
  ws.u_pos.resize(W.rows);
  ws.u_neg.resize(W.rows);
  double s_pos = relaxed_load(model.block(Block::ScoreBias).values[0]);
  double s_neg = s_pos;
  for (std::size_t i = 0; i < W.rows; ++i) {
    W.load_row(i, ws.row);
    const double bc = relaxed_load(b1.values[i]) + dot(ws.row, ws.x);
    const auto A = std::span<const double>(ws.row).subspan(w * d, d);
    ws.u_pos[i] = std::tanh(bc + dot(A, ws.h));
    ws.u_neg[i] = std::tanh(bc + dot(A, ws.z_neg));
    const double vi = relaxed_load(v.values[i]);
    s_pos += vi * ws.u_pos[i];
    s_neg += vi * ws.u_neg[i];
  }
  return {s_pos, s_neg};
}

}  // namespace

double cw_score(const NeuralModel& model, const Window& window, WordId target) {
  if (model.spec().kind != ModelKind::CW) throw UsageError("cw_score needs a C&W model");
  check_window(model.spec(), window);
  Workspace ws;
  return cw_forward(model, window, target, target, ws).first;
}

double cw_loss(const NeuralModel& model, const Window& window, WordId corrupt, Gradients* grads,
               Workspace& ws) {
  const ModelSpec& spec = model.spec();
  if (spec.kind != ModelKind::CW) throw UsageError("cw_loss needs a C&W model");
  check_window(spec, window);
  const auto [s_pos, s_neg] = cw_forward(model, window, window.target, corrupt, ws);
  const double loss = std::max(0.0, 1.0 - s_pos + s_neg);
  if (!grads || !(loss > 0.0)) return loss;

  const std::size_t d = spec.dim;
  const std::size_t w = spec.radius;
  const ParamBlock& W = model.block(Block::Hidden);
  const ParamBlock& v = model.block(Block::ScoreWeight);
  const std::size_t hw = W.rows;

  // d loss / d s_pos = -1, d loss / d s_neg = +1; the score bias cancels.
  auto g_v = (*grads)[Block::ScoreWeight].add_row(0);
  (*grads)[Block::ScoreBias].add_row(0);
  ws.g_a.resize(2 * hw);
  for (std::size_t i = 0; i < hw; ++i) {
    g_v[i] += ws.u_neg[i] - ws.u_pos[i];
    const double vi = relaxed_load(v.values[i]);
    ws.g_a[i] = -vi * (1.0 - ws.u_pos[i] * ws.u_pos[i]);
    ws.g_a[hw + i] = vi * (1.0 - ws.u_neg[i] * ws.u_neg[i]);
  }
  auto g_b1 = (*grads)[Block::HiddenBias].add_row(0);
  for (std::size_t i = 0; i < hw; ++i) g_b1[i] += ws.g_a[i] + ws.g_a[hw + i];

  ws.g_x.assign(W.cols, 0.0);  // context-block input gradients
  std::vector<double>& g_target = ws.bc;
  g_target.assign(2 * d, 0.0);  // [e(w) | e(w')]
  ws.row.resize(W.cols);
  for (std::size_t i = 0; i < hw; ++i) {
    const double gp = ws.g_a[i];
    const double gn = ws.g_a[hw + i];
    const double gc = gp + gn;
    auto gW = (*grads)[Block::Hidden].add_row(i);
    axpy(gc, ws.x, gW);  // target block of ws.x is zero
    axpy(gp, ws.h, gW.subspan(w * d, d));
    axpy(gn, ws.z_neg, gW.subspan(w * d, d));
    W.load_row(i, ws.row);
    axpy(gc, ws.row, ws.g_x);
    const auto A = std::span<const double>(ws.row).subspan(w * d, d);
    axpy(gp, A, std::span<double>(g_target).subspan(0, d));
    axpy(gn, A, std::span<double>(g_target).subspan(d, d));
  }
  auto& g_in = (*grads)[Block::Input];
  for (std::size_t s = 0; s < window.context.size(); ++s) {
    const std::size_t block = s < w ? s : s + 1;
    axpy(1.0, std::span<const double>(ws.g_x).subspan(block * d, d),
         g_in.add_row(model.input_row(window.context[s])));
  }
  axpy(1.0, std::span<const double>(g_target).subspan(0, d), g_in.add_row(model.input_row(window.target)));
  axpy(1.0, std::span<const double>(g_target).subspan(d, d), g_in.add_row(model.input_row(corrupt)));
  return loss;
}

double cw_loss(const NeuralModel& model, const Window& window, WordId corrupt, Gradients* grads) {
  Workspace ws;
  return cw_loss(model, window, corrupt, grads, ws);
}

WordId draw_corruption(Rng& rng, std::size_t vocab_size, WordId target) {
  const auto r = static_cast<WordId>(rng.below(vocab_size - 1));
  return r >= target ? r + 1 : r;
}

namespace {

[[noreturn]] void divergence(const Window& window) {
  throw NumericalError("numerical divergence at window position " + std::to_string(window.position));
}

}  // namespace

std::optional<SampleLoss> train_predict_sample(NeuralModel& model, const AdaGradConfig& opt,
                                               const NegativeSampler& sampler,
                                               const Window& window, Rng& rng, Workspace& ws) {
  const ModelSpec& spec = model.spec();
  const std::size_t k = sampler.k();
  std::size_t predictions = 1;
  if (spec.kind == ModelKind::SkipGram || spec.kind == ModelKind::Cbow) {
    if (window.context_len == 0) return std::nullopt;
    if (spec.kind == ModelKind::SkipGram) predictions = window.context_len;
  }
  ws.negatives.resize(k * predictions);
  sampler.draw_negatives(rng, window.target, ws.negatives);
  ws.grads.reset(model);
  auto result = predict_loss(model, window, ws.negatives, k, &ws.grads, ws);
  if (!result) return result;
  if (!std::isfinite(result->loss) || !ws.grads.all_finite()) divergence(window);
  ws.grads.apply(model, opt);
  return result;
}

double train_cw_sample(NeuralModel& model, const AdaGradConfig& opt, const Window& window,
                       Rng& rng, Workspace& ws) {
  const WordId corrupt = draw_corruption(rng, model.vocab_size(), window.target);
  ws.grads.reset(model);
  const double loss = cw_loss(model, window, corrupt, &ws.grads, ws);
  if (!std::isfinite(loss) || !ws.grads.all_finite()) divergence(window);
  if (loss > 0.0) ws.grads.apply(model, opt);
  return loss;
}

double validation_loss(const NeuralModel& model, const NegativeSampler& sampler,
                       std::span<const Window> windows, std::uint64_t seed) {
  Rng rng(seed);
  Workspace ws;
  double total = 0;
  std::size_t predictions = 0;
  const bool cw = model.spec().kind == ModelKind::CW;
  for (const auto& window : windows) {
    if (cw) {
      total += cw_loss(model, window, draw_corruption(rng, model.vocab_size(), window.target),
                       nullptr, ws);
      ++predictions;
      continue;
    }
    std::size_t n = model.spec().kind == ModelKind::SkipGram ? window.context_len : 1;
    if (model.spec().kind == ModelKind::Cbow && window.context_len == 0) n = 0;
    if (n == 0) continue;
    ws.negatives.resize(sampler.k() * n);
    sampler.draw_negatives(rng, window.target, ws.negatives);
    if (auto r = predict_loss(model, window, ws.negatives, sampler.k(), nullptr, ws)) {
      total += r->loss;
      predictions += r->predictions;
    }
  }
  if (predictions == 0) throw DataError("empty validation set");
  return total / static_cast<double>(predictions);
}

EmbeddingTable export_embeddings(const NeuralModel& model, const Vocabulary& vocab) {
  if (vocab.size() != model.vocab_size()) throw UsageError("vocabulary does not match model");
  const ParamBlock& in = model.block(Block::Input);
  std::vector<float> values(model.vocab_size() * in.cols);
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = static_cast<float>(in.values[i]);
  return EmbeddingTable(vocab.words(), in.cols, std::move(values));
}

}  // namespace embkit
