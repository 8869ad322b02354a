#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "embkit/corpus.hpp"
#include "embkit/embedding.hpp"
#include "embkit/model.hpp"

namespace fixture {

class TempDir {
 public:
  TempDir() {
    std::string tmpl = (std::filesystem::temp_directory_path() / "embkit-test-XXXXXX").string();
    if (!mkdtemp(tmpl.data())) throw std::runtime_error("mkdtemp failed");
    path_ = tmpl;
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Every parameter drawn from U(-scale, scale), so no gradient path is dead.
inline void randomize(embkit::NeuralModel& model, std::uint64_t seed, double scale = 0.5) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(-scale, scale);
  for (auto& b : model.blocks())
    for (auto& v : b.values) v = u(gen);
}

inline embkit::Window random_window(std::mt19937_64& gen, std::size_t vocab, std::size_t radius,
                                    double pad_probability = 0.2) {
  std::uniform_int_distribution<embkit::WordId> word(0, static_cast<embkit::WordId>(vocab - 1));
  std::bernoulli_distribution pad(pad_probability);
  embkit::Window w;
  w.target = word(gen);
  w.context.resize(2 * radius);
  for (auto& c : w.context) {
    c = pad(gen) ? embkit::kPad : word(gen);
    if (c != embkit::kPad) ++w.context_len;
  }
  return w;
}

inline embkit::EmbeddingTable random_table(std::size_t vocab, std::size_t dim, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<float> n;
  std::vector<std::string> words;
  std::vector<float> values;
  for (std::size_t i = 0; i < vocab; ++i) {
    words.push_back("w" + std::to_string(i));
    for (std::size_t j = 0; j < dim; ++j) values.push_back(n(gen));
  }
  return embkit::EmbeddingTable(words, dim, values);
}

// Documents drawn from a few disjoint topics plus shared function words, so
// same-topic words share contexts. One document per line.
struct TopicCorpus {
  std::vector<std::vector<std::string>> topics;
  std::vector<std::vector<std::string>> documents;
};

inline TopicCorpus topic_corpus(std::size_t n_docs, std::uint64_t seed, std::size_t topics = 4,
                                std::size_t words_per_topic = 8) {
  std::mt19937_64 gen(seed);
  TopicCorpus c;
  for (std::size_t t = 0; t < topics; ++t) {
    c.topics.emplace_back();
    for (std::size_t w = 0; w < words_per_topic; ++w)
      c.topics.back().push_back("t" + std::to_string(t) + "w" + std::to_string(w));
  }
  const std::vector<std::string> common = {"the", "of", "and", "a", "to", "in"};
  std::uniform_int_distribution<std::size_t> len(8, 40), topic(0, topics - 1), tw(0, words_per_topic - 1),
      cw(0, common.size() - 1);
  std::bernoulli_distribution content(0.7);
  for (std::size_t d = 0; d < n_docs; ++d) {
    const std::size_t t = topic(gen);
    std::vector<std::string> doc;
    const std::size_t n = len(gen);
    for (std::size_t i = 0; i < n; ++i) doc.push_back(content(gen) ? c.topics[t][tw(gen)] : common[cw(gen)]);
    c.documents.push_back(std::move(doc));
  }
  return c;
}

inline void write_corpus(const std::filesystem::path& p, const std::vector<std::vector<std::string>>& docs) {
  std::ofstream out(p);
  for (const auto& d : docs) {
    for (std::size_t i = 0; i < d.size(); ++i) out << (i ? " " : "") << d[i];
    out << '\n';
  }
}

}  // namespace fixture
