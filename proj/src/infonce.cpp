#include "skillrel/infonce.hpp"

#include <algorithm>
#include <cmath>

#include "skillrel/error.hpp"
#include "skillrel/rng.hpp"

namespace skillrel {

void InfoNCEConfig::validate() const {
  if (scale <= 0.0) throw config_error("scale must be positive");
  if (batch_size < 2) throw config_error("batch_size must be >= 2");
  if (learning_rate <= 0.0) throw config_error("learning_rate must be positive");
  if (epochs < 0) throw config_error("epochs must be >= 0");
  if (warmup_fraction < 0.0 || warmup_fraction >= 1.0)
    throw config_error("warmup_fraction must be in [0, 1)");
  if (dim <= 0) throw config_error("dim must be positive");
}

InfoNCELoss infonce_loss(const Eigen::MatrixXd& anchors, const Eigen::MatrixXd& positives,
                         double scale) {
  const Eigen::Index k = anchors.rows();
  const Eigen::Index dim = anchors.cols();
  if (k < 1) throw config_error("need at least one row");
  if (positives.rows() != k || positives.cols() != dim)
    throw config_error("anchor and positive shapes differ");
  if (!anchors.allFinite() || !positives.allFinite())
    throw numeric_error("non-finite input vector");

  const Eigen::VectorXd anchor_norms = anchors.rowwise().norm();
  const Eigen::VectorXd positive_norms = positives.rowwise().norm();
  if ((anchor_norms.array() == 0.0).any() || (positive_norms.array() == 0.0).any())
    throw numeric_error("zero-norm row");

  const Eigen::MatrixXd a_hat = anchor_norms.cwiseInverse().asDiagonal() * anchors;
  const Eigen::MatrixXd p_hat = positive_norms.cwiseInverse().asDiagonal() * positives;
  const Eigen::MatrixXd cos_ij = a_hat * p_hat.transpose();  // K x K
  const Eigen::MatrixXd scores = scale * cos_ij;

  // Row-stabilized softmax and the mean cross-entropy against the diagonal.
  const Eigen::VectorXd row_max = scores.rowwise().maxCoeff();
  const Eigen::MatrixXd shifted = scores.colwise() - row_max;
  const Eigen::MatrixXd expo = shifted.array().exp().matrix();
  const Eigen::VectorXd row_sum = expo.rowwise().sum();
  double loss = 0.0;
  for (Eigen::Index i = 0; i < k; ++i)
    loss += std::log(row_sum[i]) - shifted(i, i);
  loss /= static_cast<double>(k);

  // d loss / d scores, then chain through the cosine.
  Eigen::MatrixXd g = row_sum.cwiseInverse().asDiagonal() * expo;  // softmax rows
  g.diagonal().array() -= 1.0;
  g /= static_cast<double>(k);

  const Eigen::MatrixXd gc = g.cwiseProduct(cos_ij);
  const Eigen::VectorXd row_gc = gc.rowwise().sum();
  const Eigen::VectorXd col_gc = gc.colwise().sum().transpose();

  InfoNCELoss out;
  out.loss = loss;
  out.d_anchors =
      scale * anchor_norms.cwiseInverse().asDiagonal() * (g * p_hat - row_gc.asDiagonal() * a_hat);
  out.d_positives = scale * positive_norms.cwiseInverse().asDiagonal() *
                    (g.transpose() * a_hat - col_gc.asDiagonal() * p_hat);
  if (!std::isfinite(out.loss) || !out.d_anchors.allFinite() || !out.d_positives.allFinite())
    throw numeric_error("non-finite loss or gradient");
  return out;
}

InfoNCEResult train_infonce(const std::vector<TrainingPair>& pairs, const InfoNCEConfig& cfg) {
  cfg.validate();
  if (pairs.empty()) throw empty_input_error("no training pairs");

  InfoNCEResult result;
  EmbeddingTable& table = result.table;

  // Vocabulary in first-appearance order.
  std::vector<Eigen::Index> anchor_row(pairs.size()), positive_row(pairs.size());
  {
    std::unordered_map<std::string, Eigen::Index> seen;
    std::vector<std::string> order;
    const auto intern = [&](const std::string& phrase) {
      const auto [it, fresh] = seen.emplace(phrase, static_cast<Eigen::Index>(order.size()));
      if (fresh) order.push_back(phrase);
      return it->second;
    };
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      anchor_row[i] = intern(pairs[i].anchor);
      positive_row[i] = intern(pairs[i].positive);
    }
    Rng init_rng(cfg.seed);
    const double sd = 1.0 / std::sqrt(static_cast<double>(cfg.dim));
    table.vectors.resize(static_cast<Eigen::Index>(order.size()), cfg.dim);
    for (Eigen::Index r = 0; r < table.vectors.rows(); ++r)
      for (Eigen::Index c = 0; c < cfg.dim; ++c) table.vectors(r, c) = sd * init_rng.gaussian();
    table.tokens = std::move(order);
    for (Eigen::Index r = 0; r < table.vectors.rows(); ++r)
      table.index.emplace(table.tokens[static_cast<std::size_t>(r)], r);
  }
  if (cfg.epochs == 0) return result;

  std::size_t batch = cfg.batch_size;
  if (batch > pairs.size()) {
    batch = pairs.size();
    result.warnings.push_back("batch size " + std::to_string(cfg.batch_size) + " exceeds pair count " +
                              std::to_string(pairs.size()) + "; training with one batch of " +
                              std::to_string(batch));
  }
  const std::size_t steps_per_epoch = (pairs.size() + batch - 1) / batch;
  const std::size_t total_steps = steps_per_epoch * static_cast<std::size_t>(cfg.epochs);
  const std::size_t warmup_steps =
      static_cast<std::size_t>(cfg.warmup_fraction * static_cast<double>(total_steps));

  const double beta1 = 0.9, beta2 = 0.999, eps = 1e-8, weight_decay = 0.01;
  Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(table.vectors.rows(), cfg.dim);
  Eigen::MatrixXd m = grad, v = grad;

  Rng order_rng(cfg.seed + 1);
  std::vector<std::size_t> perm(pairs.size());
  for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;

  std::size_t step = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    order_rng.shuffle(perm);
    double loss_sum = 0.0;
    std::size_t batches = 0;

    for (std::size_t start = 0; start < perm.size(); start += batch, ++batches) {
      const std::size_t count = std::min(batch, perm.size() - start);
      Eigen::MatrixXd anchors(count, cfg.dim), positives(count, cfg.dim);
      for (std::size_t i = 0; i < count; ++i) {
        anchors.row(static_cast<Eigen::Index>(i)) = table.vectors.row(anchor_row[perm[start + i]]);
        positives.row(static_cast<Eigen::Index>(i)) = table.vectors.row(positive_row[perm[start + i]]);
      }
      const InfoNCELoss batch_loss = infonce_loss(anchors, positives, cfg.scale);
      loss_sum += batch_loss.loss;

      // Scatter into the table-shaped gradient; a phrase repeated in the
      // batch accumulates from every occurrence.
      grad.setZero();
      for (std::size_t i = 0; i < count; ++i) {
        grad.row(anchor_row[perm[start + i]]) += batch_loss.d_anchors.row(static_cast<Eigen::Index>(i));
        grad.row(positive_row[perm[start + i]]) +=
            batch_loss.d_positives.row(static_cast<Eigen::Index>(i));
      }

      const double lr_now =
          step < warmup_steps
              ? cfg.learning_rate * static_cast<double>(step + 1) / static_cast<double>(warmup_steps)
              : cfg.learning_rate * static_cast<double>(total_steps - step) /
                    static_cast<double>(total_steps - warmup_steps);
      ++step;

      // Decoupled weight decay: moments see only the loss gradient.
      m = beta1 * m + (1.0 - beta1) * grad;
      v = beta2 * v + (1.0 - beta2) * grad.cwiseProduct(grad);
      const double bias1 = 1.0 - std::pow(beta1, static_cast<double>(step));
      const double bias2 = 1.0 - std::pow(beta2, static_cast<double>(step));
      table.vectors -=
          lr_now * ((m / bias1).cwiseQuotient(((v / bias2).cwiseSqrt().array() + eps).matrix()) +
                    weight_decay * table.vectors);
    }
    result.epoch_loss.push_back(loss_sum / static_cast<double>(batches));
  }
  return result;
}

}  // namespace skillrel
