#include "embkit/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include "embkit/errors.hpp"
#include "embkit/random.hpp"

namespace embkit {

namespace {

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}

template <class Fn>
void for_each_token(std::string_view line, Fn&& fn) {
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && is_space(line[i])) ++i;
    std::size_t j = i;
    while (j < line.size() && !is_space(line[j])) ++j;
    if (j > i) fn(line.substr(i, j - i));
    i = j;
  }
}

}  // namespace

Vocabulary::Vocabulary(std::vector<std::pair<std::string, std::uint64_t>> entries) {
  words_.reserve(entries.size());
  counts_.reserve(entries.size());
  index_.reserve(entries.size());
  for (auto& [word, count] : entries) {
    if (count < 1) throw DataError("vocabulary count must be >= 1 for '" + word + "'");
    if (!counts_.empty() && count > counts_.back())
      throw DataError("vocabulary not in descending count order at '" + word + "'");
    const auto id = static_cast<WordId>(words_.size());
    if (!index_.emplace(word, id).second) throw DataError("duplicate vocabulary word '" + word + "'");
    total_ += count;
    counts_.push_back(count);
    words_.push_back(std::move(word));
  }
}

std::optional<WordId> Vocabulary::find(const std::string& word) const {
  auto it = index_.find(word);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

Document Vocabulary::encode(std::span<const std::string> tokens) const {
  Document out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) {
    if (auto id = find(t)) out.push_back(*id);
  }
  return out;
}

std::vector<std::string> Vocabulary::decode(std::span<const WordId> ids) const {
  std::vector<std::string> out;
  out.reserve(ids.size());
  for (WordId id : ids) out.push_back(word(id));
  return out;
}

void VocabularyBuilder::add(std::string_view token) {
  auto [it, inserted] = entries_.try_emplace(std::string(token));
  if (inserted) it->second.first_seen = tokens_seen_;
  ++it->second.count;
  ++tokens_seen_;
}

void VocabularyBuilder::add_document(std::span<const std::string> tokens) {
  for (const auto& t : tokens) add(t);
}

Vocabulary VocabularyBuilder::finish(std::size_t cap, std::uint64_t min_count) const {
  if (cap < 1) throw UsageError("vocabulary cap must be >= 1");
  if (tokens_seen_ == 0) throw DataError("empty corpus");
  struct Ranked {
    const std::string* word;
    std::uint64_t count;
    std::uint64_t first_seen;
  };
  std::vector<Ranked> ranked;
  ranked.reserve(entries_.size());
  for (const auto& [word, e] : entries_) {
    if (e.count >= min_count) ranked.push_back({&word, e.count, e.first_seen});
  }
  auto order = [](const Ranked& a, const Ranked& b) {
    if (a.count != b.count) return a.count > b.count;
    return a.first_seen < b.first_seen;
  };
  if (ranked.size() > cap) {
    std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(cap),
                      ranked.end(), order);
    ranked.resize(cap);
  } else {
    std::sort(ranked.begin(), ranked.end(), order);
  }
  std::vector<std::pair<std::string, std::uint64_t>> entries;
  entries.reserve(ranked.size());
  for (const auto& r : ranked) entries.emplace_back(*r.word, r.count);
  return Vocabulary(std::move(entries));
}

Vocabulary build_vocab(std::span<const std::vector<std::string>> documents, std::size_t cap,
                       std::uint64_t min_count) {
  VocabularyBuilder builder;
  for (const auto& doc : documents) builder.add_document(doc);
  return builder.finish(cap, min_count);
}

std::vector<std::string> split_tokens(std::string_view line) {
  std::vector<std::string> out;
  for_each_token(line, [&](std::string_view t) { out.emplace_back(t); });
  return out;
}

void for_each_corpus_line(const std::filesystem::path& path,
                          const std::function<void(std::string_view)>& fn) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open corpus: " + path.string());
  std::string line;
  while (std::getline(in, line)) fn(line);
  if (in.bad()) throw DataError("read error: " + path.string());
}

Vocabulary build_vocab_from_file(const std::filesystem::path& corpus, std::size_t cap,
                                 std::uint64_t min_count) {
  VocabularyBuilder builder;
  for_each_corpus_line(corpus, [&](std::string_view line) {
    for_each_token(line, [&](std::string_view t) { builder.add(t); });
  });
  return builder.finish(cap, min_count);
}

std::vector<Document> encode_corpus_file(const std::filesystem::path& corpus,
                                         const Vocabulary& vocab) {
  std::vector<Document> docs;
  std::string scratch;
  for_each_corpus_line(corpus, [&](std::string_view line) {
    Document doc;
    for_each_token(line, [&](std::string_view t) {
      scratch.assign(t);
      if (auto id = vocab.find(scratch)) doc.push_back(*id);
    });
    docs.push_back(std::move(doc));
  });
  return docs;
}

void write_vocab(std::ostream& out, const Vocabulary& vocab) {
  for (std::size_t i = 0; i < vocab.size(); ++i)
    out << vocab.words()[i] << ' ' << vocab.counts()[i] << '\n';
}

void write_vocab(const std::filesystem::path& path, const Vocabulary& vocab) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write vocabulary: " + path.string());
  write_vocab(out, vocab);
  if (!out) throw DataError("write error: " + path.string());
}

Vocabulary read_vocab(std::istream& in) {
  std::vector<std::pair<std::string, std::uint64_t>> entries;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto fields = split_tokens(line);
    std::uint64_t count = 0;
    const auto& c = fields.size() == 2 ? fields[1] : std::string();
    auto [ptr, ec] = std::from_chars(c.data(), c.data() + c.size(), count);
    if (fields.size() != 2 || ec != std::errc() || ptr != c.data() + c.size())
      throw DataError("vocabulary line " + std::to_string(line_no) + ": expected 'word count'");
    entries.emplace_back(std::move(fields[0]), count);
  }
  if (entries.empty()) throw DataError("empty vocabulary");
  return Vocabulary(std::move(entries));
}

Vocabulary read_vocab(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open vocabulary: " + path.string());
  return read_vocab(in);
}

std::vector<std::size_t> shuffle_permutation(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  Rng rng(seed);
  for (std::size_t i = n; i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.below(i));
    std::swap(perm[i - 1], perm[j]);
  }
  return perm;
}

std::vector<std::size_t> sample_subset_indices(std::span<const std::size_t> doc_lengths,
                                               std::uint64_t target_tokens, std::uint64_t seed) {
  std::uint64_t total = 0;
  for (auto len : doc_lengths) total += len;
  if (target_tokens > total)
    throw DataError("sample target " + std::to_string(target_tokens) + " exceeds corpus size " +
                    std::to_string(total));
  std::vector<std::size_t> out;
  std::uint64_t taken = 0;
  for (std::size_t i : shuffle_permutation(doc_lengths.size(), seed)) {
    if (taken >= target_tokens) break;
    out.push_back(i);
    taken += doc_lengths[i];
  }
  return out;
}

double subsample_keep_probability(double frequency, double threshold) {
  if (!(threshold > 0)) throw UsageError("subsampling threshold must be > 0");
  if (frequency <= 0) return 1.0;
  return std::min(1.0, (std::sqrt(frequency / threshold) + 1.0) * threshold / frequency);
}

Subsampler::Subsampler(const Vocabulary& vocab, double threshold) {
  if (!(threshold > 0)) throw UsageError("subsampling threshold must be > 0");
  keep_.resize(vocab.size());
  const double total = static_cast<double>(vocab.total_tokens());
  for (std::size_t i = 0; i < vocab.size(); ++i)
    keep_[i] = subsample_keep_probability(static_cast<double>(vocab.counts()[i]) / total, threshold);
}

Document Subsampler::apply(std::span<const WordId> tokens, std::uint64_t stream_key) const {
  Document out;
  out.reserve(tokens.size());
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const double p = keep_[tokens[i]];
    if (p >= 1.0 || hashed_uniform(stream_key ^ mix64(i)) < p) out.push_back(tokens[i]);
  }
  return out;
}

Document subsample(std::span<const WordId> tokens, const Vocabulary& vocab, double threshold,
                   std::uint64_t stream_key) {
  return Subsampler(vocab, threshold).apply(tokens, stream_key);
}

void fill_window(std::span<const WordId> doc, std::size_t position, std::size_t radius,
                 Window& out) {
  out.target = doc[position];
  out.position = position;
  out.context.resize(2 * radius);
  out.context_len = 0;
  std::size_t slot = 0;
  for (std::size_t off = radius; off >= 1; --off, ++slot) {
    const bool inside = position >= off;
    out.context[slot] = inside ? doc[position - off] : kPad;
    out.context_len += inside;
  }
  for (std::size_t off = 1; off <= radius; ++off, ++slot) {
    const bool inside = position + off < doc.size();
    out.context[slot] = inside ? doc[position + off] : kPad;
    out.context_len += inside;
  }
}

Window make_window(std::span<const WordId> doc, std::size_t position, std::size_t radius) {
  Window w;
  fill_window(doc, position, radius, w);
  return w;
}

std::vector<Window> iter_windows(std::span<const WordId> doc, std::size_t radius) {
  if (radius < 1) throw UsageError("window radius must be >= 1");
  std::vector<Window> out;
  out.reserve(doc.size());
  for (std::size_t i = 0; i < doc.size(); ++i) out.push_back(make_window(doc, i, radius));
  return out;
}

}  // namespace embkit
