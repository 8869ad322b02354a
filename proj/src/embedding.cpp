#include "embkit/embedding.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include "embkit/corpus.hpp"
#include "embkit/errors.hpp"

namespace embkit {

EmbeddingTable::EmbeddingTable(std::vector<std::string> words, std::size_t dim,
                               std::vector<float> values)
    : words_(std::move(words)), dim_(dim), values_(std::move(values)) {
  if (dim_ == 0) throw DataError("embedding dimension must be >= 1");
  if (values_.size() != words_.size() * dim_) throw DataError("embedding shape mismatch");
  for (float v : values_) {
    if (!std::isfinite(v)) throw NumericalError("embedding contains a non-finite value");
  }
  index_.reserve(words_.size());
  for (std::size_t i = 0; i < words_.size(); ++i) {
    if (!index_.emplace(words_[i], i).second)
      throw DataError("duplicate embedding word '" + words_[i] + "'");
  }
}

std::optional<std::size_t> EmbeddingTable::find(const std::string& word) const {
  auto it = index_.find(word);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::span<const float> EmbeddingTable::lookup(const std::string& word) const {
  if (auto i = find(word)) return row(*i);
  return {};
}

void write_embedding_text(std::ostream& out, const EmbeddingTable& table) {
  out << table.size() << ' ' << table.dim() << '\n';
  char buf[64];
  for (std::size_t i = 0; i < table.size(); ++i) {
    out << table.word(i);
    for (float v : table.row(i)) {
      auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
      out << ' ';
      out.write(buf, ptr - buf);
    }
    out << '\n';
  }
}

void write_embedding_text(const std::filesystem::path& path, const EmbeddingTable& table) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write embedding: " + path.string());
  write_embedding_text(out, table);
  if (!out) throw DataError("write error: " + path.string());
}

EmbeddingTable read_embedding_text(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("embedding line 1: missing 'V d' header");
  auto header = split_tokens(line);
  std::size_t rows = 0, dim = 0;
  if (header.size() != 2 ||
      std::from_chars(header[0].data(), header[0].data() + header[0].size(), rows).ec != std::errc() ||
      std::from_chars(header[1].data(), header[1].data() + header[1].size(), dim).ec != std::errc() ||
      dim == 0)
    throw DataError("embedding line 1: expected 'V d' header");
  std::vector<std::string> words;
  std::vector<float> values;
  words.reserve(rows);
  values.reserve(rows * dim);
  for (std::size_t r = 0; r < rows; ++r) {
    const std::string where = "embedding line " + std::to_string(r + 2);
    if (!std::getline(in, line)) throw DataError(where + ": expected " + std::to_string(rows) + " rows");
    auto fields = split_tokens(line);
    if (fields.size() != dim + 1)
      throw DataError(where + ": expected word and " + std::to_string(dim) + " values");
    words.push_back(std::move(fields[0]));
    for (std::size_t j = 1; j <= dim; ++j) {
      float v = 0;
      const auto& f = fields[j];
      auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
      if (ec != std::errc() || ptr != f.data() + f.size())
        throw DataError(where + ": bad number '" + f + "'");
      values.push_back(v);
    }
  }
  return EmbeddingTable(std::move(words), dim, std::move(values));
}

EmbeddingTable read_embedding_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open embedding: " + path.string());
  return read_embedding_text(in);
}

}  // namespace embkit
