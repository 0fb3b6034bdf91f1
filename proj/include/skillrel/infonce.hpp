#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "skillrel/embedding.hpp"

namespace skillrel {

struct InfoNCEConfig {
  double scale = 20.0;       // similarity multiplier inside the softmax
  std::size_t batch_size = 128;
  double learning_rate = 2e-5;
  int epochs = 1;
  double warmup_fraction = 0.05;
  int dim = 0;               // must be set by the caller
  std::uint64_t seed = 42;

  void validate() const;  // throws config-error
};

// Mean over rows i of -log softmax_i(scale * cos(a_i, p_j)) with the row's
// own positive as the correct class and every other row's positive as an
// in-batch negative. Softmax rows are max-shifted, so non-finite values can
// only come from non-finite or zero-norm inputs, which raise numeric-error.
struct InfoNCELoss {
  double loss = 0.0;
  Eigen::MatrixXd d_anchors;    // K x dim
  Eigen::MatrixXd d_positives;  // K x dim
};

InfoNCELoss infonce_loss(const Eigen::MatrixXd& anchors, const Eigen::MatrixXd& positives,
                         double scale);

struct InfoNCEResult {
  EmbeddingTable table;
  std::vector<double> epoch_loss;     // mean batch loss per epoch
  std::vector<std::string> warnings;  // e.g. batch size above the pair count
};

// Contrastive training of one shared phrase table. Vocabulary is every
// distinct anchor or positive in first-appearance order, rows start
// Gaussian/sqrt(dim). Each epoch shuffles pairs with the run's seed and
// walks them in batches; both sides of a batch index the shared table and
// receive decoupled-weight-decay adaptive-moment updates under a linear
// warmup then linear decay schedule. Single-threaded and bit-deterministic.
// epochs = 0 returns the untouched initialization.
InfoNCEResult train_infonce(const std::vector<TrainingPair>& pairs, const InfoNCEConfig& cfg);

}  // namespace skillrel
