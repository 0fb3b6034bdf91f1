#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

#include "skillrel/builder.hpp"
#include "skillrel/extraction.hpp"

namespace skillrel {

// Dense token -> vector store. Rows of `vectors` line up with insertion
// order; `index` maps a token to its row. Tokens with embedded spaces are
// legal in memory; the text format swaps spaces for underscores on save.
struct EmbeddingTable {
  Eigen::MatrixXd vectors;  // rows x dim
  std::unordered_map<std::string, Eigen::Index> index;
  std::vector<std::string> tokens;  // row -> token

  Eigen::Index dim() const { return vectors.cols(); }
  Eigen::Index size() const { return vectors.rows(); }
  bool contains(const std::string& token) const { return index.count(token) > 0; }
  const std::string& token_at(Eigen::Index row) const { return tokens[static_cast<std::size_t>(row)]; }

  // Row lookup; nullopt when the token is absent.
  std::optional<Eigen::Index> row_of(const std::string& token) const;
  Eigen::VectorXd vector_of(const std::string& token) const;  // throws oov-error when absent

  // Appends a row. Re-adding an existing token throws config-error.
  Eigen::Index add(const std::string& token, const Eigen::VectorXd& vec);
};

// Corpus frequency of each token. Inverse frequencies weight phrase
// composition; unseen tokens default to count 1 on lookup.
struct FrequencyTable {
  std::unordered_map<std::string, std::size_t> counts;

  std::size_t freq(const std::string& token) const;  // 1 when absent
  void bump(const std::string& token, std::size_t by = 1) { counts[token] += by; }
};

// cos(u, v) = u.v / (|u||v|). Mismatched dims -> config-error, a zero-norm
// side -> numeric-error so callers pick their own fallback.
double cosine(const Eigen::VectorXd& u, const Eigen::VectorXd& v);

// Lowercases and splits into words. Alphanumerics plus '+', '#' and
// interior '.' stay inside a token, so "C++", "c#" and ".NET" survive as
// "c++", "c#", ".net"; every other byte separates.
std::vector<std::string> tokenize_for_embedding(const std::string& text);

struct ComposeResult {
  std::optional<Eigen::VectorXd> vec;      // absent when no word is in vocabulary
  std::vector<std::string> missing_words;  // words without a vector, phrase order
};

// Inverse-frequency weighted mean over the phrase's in-vocabulary words:
// v = sum(w_i * vec_i) / sum(w_i), w_i = 1/freq(word_i). Out-of-vocabulary
// words are skipped; when all are, `vec` is empty and the caller sees the
// missing words.
ComposeResult compose_phrase(const std::string& phrase, const EmbeddingTable& table,
                             const FrequencyTable& freqs);

// Anything that can turn a skill phrase into a vector, or admit it cannot.
class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual std::optional<Eigen::VectorXd> embed(const std::string& phrase) const = 0;
  virtual Eigen::Index dim() const = 0;
};

// Whole-phrase lookup: exact token first, then the lowercase fold.
class PhraseTableEmbedder : public Embedder {
 public:
  explicit PhraseTableEmbedder(const EmbeddingTable& table);
  std::optional<Eigen::VectorXd> embed(const std::string& phrase) const override;
  Eigen::Index dim() const override { return table_.dim(); }

 private:
  const EmbeddingTable& table_;
  std::unordered_map<std::string, Eigen::Index> folded_;  // lowercase -> row, first wins
};

// Word-level composition via compose_phrase. With a subword model attached
// (see sgns.hpp) unknown words still resolve through n-gram buckets, so
// nothing is out of vocabulary.
class ComposedWordEmbedder : public Embedder {
 public:
  ComposedWordEmbedder(const EmbeddingTable& table, const FrequencyTable& freqs);
  std::optional<Eigen::VectorXd> embed(const std::string& phrase) const override;
  Eigen::Index dim() const override { return table_.dim(); }

 private:
  const EmbeddingTable& table_;
  const FrequencyTable& freqs_;
};

// Distinct benchmark phrases the embedder cannot represent.
std::size_t oov_count(const Benchmark& bench, const Embedder& embedder);
std::size_t oov_count(const Benchmark& bench, const EmbeddingTable& table,
                      const FrequencyTable& freqs);

struct TrainingPair {
  std::string anchor;
  std::string positive;

  bool operator==(const TrainingPair& o) const {
    return anchor == o.anchor && positive == o.positive;
  }
};

// Consecutive spans of one list become positives: N spans -> max(0, N-1)
// pairs (s0,s1), (s1,s2), ...
std::vector<TrainingPair> gen_adjacent_pairs(const SkillList& list);
std::vector<TrainingPair> gen_adjacent_pairs(const std::vector<SkillList>& lists);

// Text vector format: header "<count> <dim>", then one "token v1 .. vdim"
// line per row with spaces in tokens written as underscores. Values are
// printed with enough digits that a save/load round trip stays within 1e-6.
void save_table(const EmbeddingTable& table, const std::string& path);
EmbeddingTable load_table(const std::string& path);  // parse-error carries line numbers

// Frequency sidecar: "token\tcount" lines, descending count then lexicographic.
void save_frequencies(const FrequencyTable& freqs, const std::string& path);
FrequencyTable load_frequencies(const std::string& path);

// Training pairs as JSONL {"anchor": ..., "positive": ...}.
void save_pairs(const std::vector<TrainingPair>& pairs, const std::string& path);
std::vector<TrainingPair> load_pairs(const std::string& path);

}  // namespace skillrel
