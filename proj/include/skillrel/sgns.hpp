#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

#include "skillrel/embedding.hpp"

namespace skillrel {

struct SubwordConfig {
  int min_n = 3;
  int max_n = 6;
  std::uint32_t buckets = 2'000'000;
};

struct SGNSConfig {
  int dim = 300;
  int window = 5;
  int negatives = 5;
  std::size_t min_count = 5;
  int epochs = 5;
  double learning_rate = 0.025;
  std::optional<SubwordConfig> subword;
  std::uint64_t seed = 42;
  int threads = 1;  // >1 allows racy parallel updates and forfeits bit determinism

  void validate() const;  // throws config-error
};

// Character n-grams of the boundary-padded word "<word>", each FNV-1a
// 32-bit hashed into [0, buckets). Every occurrence contributes an id, so
// collisions and repeats are kept.
std::vector<std::uint32_t> subword_ngrams(const std::string& word, int min_n, int max_n,
                                          std::uint32_t buckets);

// Loss and gradients of one negative-sampling step,
//   L = -log sig(u.v) - sum_n log sig(-u.v_n),
// with u the center's input vector, v the context's output vector and one
// row of `negatives` per sampled noise word's output vector. The trainer
// applies these directly, so a finite-difference check on this function
// covers the whole update.
struct SgnsStep {
  double loss = 0.0;
  Eigen::VectorXd d_center;
  Eigen::VectorXd d_context;
  Eigen::MatrixXd d_negatives;
};

SgnsStep sgns_gradients(const Eigen::VectorXd& center, const Eigen::VectorXd& context,
                        const Eigen::MatrixXd& negatives);

// N-gram side of a subword model. Bucket rows are created on first touch
// with a deterministic per-bucket init, so an unseen word still composes a
// reproducible nonzero vector from its n-grams alone.
struct SubwordModel {
  SubwordConfig cfg;
  Eigen::Index dim = 0;
  std::uint64_t seed = 0;
  std::unordered_map<std::uint32_t, Eigen::VectorXd> bucket_rows;  // trained buckets
  EmbeddingTable word_part;  // raw per-word input vectors

  Eigen::VectorXd bucket_vector(std::uint32_t id) const;
  // Mean of the word's own vector (when in vocabulary) and its n-gram
  // bucket vectors. Defined for any non-empty word.
  Eigen::VectorXd word_vector(const std::string& word) const;
};

// Trained model. `table` rows are the vectors callers score with: raw
// input vectors in word mode, word/n-gram compositions in subword mode.
struct SGNSModel {
  EmbeddingTable table;
  FrequencyTable freqs;
  std::optional<SubwordModel> subword;
};

// Skip-gram with negative sampling over pre-tokenized sentences.
// Vocabulary keeps tokens with count >= min_count (empty vocabulary is an
// error); each center position draws a window radius in [1, window], and
// each (center, context) pair takes one positive and cfg.negatives noise
// updates with noise words from the unigram^0.75 distribution.
SGNSModel train_sgns(const std::vector<std::vector<std::string>>& sentences,
                     const SGNSConfig& cfg);

// Phrase embedder over a subword model: every word composes a vector, so
// embed() never reports a phrase as unrepresentable.
class SubwordPhraseEmbedder : public Embedder {
 public:
  SubwordPhraseEmbedder(const SubwordModel& model, const FrequencyTable& freqs)
      : model_(model), freqs_(freqs) {}
  std::optional<Eigen::VectorXd> embed(const std::string& phrase) const override;
  Eigen::Index dim() const override { return model_.dim; }

 private:
  const SubwordModel& model_;
  const FrequencyTable& freqs_;
};

// Model directory layout: model.json manifest naming the type plus
// vectors/frequency files, words.vec and ngrams.vec for the subword parts.
void save_sgns_model(const SGNSModel& model, const std::string& dir);
SGNSModel load_sgns_model(const std::string& dir);

}  // namespace skillrel
