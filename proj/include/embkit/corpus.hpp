#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace embkit {

using WordId = std::uint32_t;

// Marks an out-of-document window slot.
inline constexpr WordId kPad = std::numeric_limits<WordId>::max();

// Encoded document: vocabulary ids with OOV tokens removed. May be empty.
using Document = std::vector<WordId>;

class Vocabulary {
 public:
  Vocabulary() = default;

  // Entries must already be in final id order (count non-increasing) with
  // unique words and counts >= 1.
  explicit Vocabulary(std::vector<std::pair<std::string, std::uint64_t>> entries);

  std::size_t size() const { return words_.size(); }
  bool empty() const { return words_.empty(); }
  const std::string& word(WordId id) const { return words_.at(id); }
  std::uint64_t count(WordId id) const { return counts_.at(id); }
  std::uint64_t total_tokens() const { return total_; }
  const std::vector<std::string>& words() const { return words_; }
  const std::vector<std::uint64_t>& counts() const { return counts_; }

  std::optional<WordId> find(const std::string& word) const;

  Document encode(std::span<const std::string> tokens) const;
  std::vector<std::string> decode(std::span<const WordId> ids) const;

 private:
  std::vector<std::string> words_;
  std::vector<std::uint64_t> counts_;
  std::uint64_t total_ = 0;
  std::unordered_map<std::string, WordId> index_;
};

// Streaming frequency counter; remembers first occurrence for tie-breaking.
class VocabularyBuilder {
 public:
  void add(std::string_view token);
  void add_document(std::span<const std::string> tokens);
  std::uint64_t tokens_seen() const { return tokens_seen_; }

  // Keeps words with count >= min_count, then the `cap` most frequent.
  Vocabulary finish(std::size_t cap, std::uint64_t min_count = 1) const;

 private:
  struct Entry {
    std::uint64_t count = 0;
    std::uint64_t first_seen = 0;
  };
  std::unordered_map<std::string, Entry> entries_;
  std::uint64_t tokens_seen_ = 0;
};

// Throws DataError("empty corpus") when there are no tokens at all.
Vocabulary build_vocab(std::span<const std::vector<std::string>> documents, std::size_t cap,
                       std::uint64_t min_count = 1);

// Splits on runs of ASCII whitespace.
std::vector<std::string> split_tokens(std::string_view line);

// Calls `fn` once per line (one document per line).
void for_each_corpus_line(const std::filesystem::path& path,
                          const std::function<void(std::string_view)>& fn);

Vocabulary build_vocab_from_file(const std::filesystem::path& corpus, std::size_t cap,
                                 std::uint64_t min_count = 1);

std::vector<Document> encode_corpus_file(const std::filesystem::path& corpus,
                                         const Vocabulary& vocab);

void write_vocab(std::ostream& out, const Vocabulary& vocab);
void write_vocab(const std::filesystem::path& path, const Vocabulary& vocab);
Vocabulary read_vocab(std::istream& in);
Vocabulary read_vocab(const std::filesystem::path& path);

// Deterministic permutation of [0, n) (Fisher-Yates on Rng(seed)).
std::vector<std::size_t> shuffle_permutation(std::size_t n, std::uint64_t seed);

template <class Doc>
std::vector<Doc> shuffle_documents(std::vector<Doc> documents, std::uint64_t seed) {
  const auto perm = shuffle_permutation(documents.size(), seed);
  std::vector<Doc> out;
  out.reserve(documents.size());
  for (std::size_t i : perm) out.push_back(std::move(documents[i]));
  return out;
}

// Indices of a uniform document-level sample: the shortest prefix of the
// seed's permutation whose token count reaches `target_tokens`. Samples with
// the same seed are nested. Throws DataError if the target exceeds the total.
std::vector<std::size_t> sample_subset_indices(std::span<const std::size_t> doc_lengths,
                                               std::uint64_t target_tokens, std::uint64_t seed);

template <class Doc>
std::vector<Doc> sample_subset(const std::vector<Doc>& documents, std::uint64_t target_tokens,
                               std::uint64_t seed) {
  std::vector<std::size_t> lengths;
  lengths.reserve(documents.size());
  for (const auto& d : documents) lengths.push_back(d.size());
  std::vector<Doc> out;
  for (std::size_t i : sample_subset_indices(lengths, target_tokens, seed))
    out.push_back(documents[i]);
  return out;
}

// Keep probability min(1, (sqrt(f/t) + 1) * t / f) for relative frequency f.
double subsample_keep_probability(double frequency, double threshold);

class Subsampler {
 public:
  Subsampler(const Vocabulary& vocab, double threshold);

  double keep_probability(WordId id) const { return keep_.at(id); }

  // Position i of the stream is kept iff hashed_uniform(key, i) < p_keep, so
  // the outcome depends only on (stream_key, position), never on call order.
  Document apply(std::span<const WordId> tokens, std::uint64_t stream_key) const;

 private:
  std::vector<double> keep_;
};

Document subsample(std::span<const WordId> tokens, const Vocabulary& vocab, double threshold,
                   std::uint64_t stream_key);

// Centered window: 2*radius context slots, left to right, excluding the
// target. Out-of-document slots hold kPad.
struct Window {
  WordId target = 0;
  std::vector<WordId> context;
  std::size_t context_len = 0;
  std::size_t position = 0;

  std::size_t radius() const { return context.size() / 2; }
};

// Reuses `out`'s storage; the hot training loop calls this per position.
void fill_window(std::span<const WordId> doc, std::size_t position, std::size_t radius,
                 Window& out);

Window make_window(std::span<const WordId> doc, std::size_t position, std::size_t radius);

// One window per token; empty for an empty document.
std::vector<Window> iter_windows(std::span<const WordId> doc, std::size_t radius);

}  // namespace embkit
