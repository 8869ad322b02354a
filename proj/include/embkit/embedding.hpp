#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace embkit {

// Vocabulary-aligned V x d matrix of word vectors, as consumed by the
// evaluators. Values are stored as float, which is also the precision of the
// text format, so a table written and read back is bit-identical.
class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  EmbeddingTable(std::vector<std::string> words, std::size_t dim, std::vector<float> values);

  std::size_t size() const { return words_.size(); }
  std::size_t dim() const { return dim_; }
  const std::string& word(std::size_t i) const { return words_.at(i); }
  const std::vector<std::string>& words() const { return words_; }
  std::span<const float> row(std::size_t i) const { return {values_.data() + i * dim_, dim_}; }
  std::span<const float> values() const { return values_; }

  std::optional<std::size_t> find(const std::string& word) const;

  // Vector for `word`, or empty span when out of vocabulary.
  std::span<const float> lookup(const std::string& word) const;

  bool operator==(const EmbeddingTable& other) const {
    return dim_ == other.dim_ && words_ == other.words_ && values_ == other.values_;
  }

 private:
  std::vector<std::string> words_;
  std::size_t dim_ = 0;
  std::vector<float> values_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Text format: "V d" header, then V lines "word f1 ... fd". Floats are
// printed in shortest round-trip form.
void write_embedding_text(std::ostream& out, const EmbeddingTable& table);
void write_embedding_text(const std::filesystem::path& path, const EmbeddingTable& table);
EmbeddingTable read_embedding_text(std::istream& in);
EmbeddingTable read_embedding_text(const std::filesystem::path& path);

}  // namespace embkit
