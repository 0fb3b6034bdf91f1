#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "skillrel/builder.hpp"
#include "skillrel/embedding.hpp"

namespace skillrel {

// What a pair scores when either phrase has no vector: a floor score of -1
// (default, maximally unrelated), a zero score, or dropping the pair from
// the ranking. The report always records which one was in force.
enum class MissingPolicy { score_neg_one, zero, skip };

std::string to_string(MissingPolicy policy);
MissingPolicy missing_policy_from_string(const std::string& name);  // config-error

struct ScoredPair {
  BenchmarkPair pair;
  std::optional<double> score;  // empty when either side is unrepresentable
};

// Cosine per benchmark pair, in file order. Phrases are embedded once each.
std::vector<ScoredPair> score_benchmark(const Benchmark& bench, const Embedder& embedder);

struct PRPoint {
  double threshold = 0.0;  // the score at this rank
  double precision = 0.0;
  double recall = 0.0;
};

struct APResult {
  double auc_pr = 0.0;
  std::vector<PRPoint> curve;  // one point per rank
};

// Rank-based average precision: sort by descending score with ties kept in
// file order, AP = sum of precision at each positive's rank / positives.
// Missing scores are resolved by `policy` first; no positive surviving the
// policy is a metric-error.
APResult average_precision(const std::vector<ScoredPair>& scored, MissingPolicy policy);

// Mean reciprocal rank over two queries per positive pair (each side seeks
// its partner). Candidates are every distinct skill in the benchmark except
// the query, ranked by descending cosine with lexicographic tie-breaks;
// candidates without vectors rank after all scored ones, so the partner is
// always ranked somewhere and mrr stays positive. The query count is fixed
// at 2 x positives regardless of policy.
double mrr(const Benchmark& bench, const Embedder& embedder, int threads = 1);

// matrix[i][j] = cosine(rows[i], cols[j]). Diagnostic view: any phrase the
// embedder cannot represent is an oov-error naming the phrase.
Eigen::MatrixXd similarity_matrix(const std::vector<std::string>& rows,
                                  const std::vector<std::string>& cols, const Embedder& embedder);

// Tab-delimited rendering with row/column headers.
std::string matrix_tsv(const std::vector<std::string>& rows, const std::vector<std::string>& cols,
                       const Eigen::MatrixXd& m);

// Standalone SVG heatmap with a fixed blue-white-red ramp over [-1, 1].
std::string heatmap_svg(const std::vector<std::string>& rows, const std::vector<std::string>& cols,
                        const Eigen::MatrixXd& m);

struct EvalReport {
  double auc_pr = 0.0;
  double mrr = 0.0;
  std::size_t n_pairs = 0;
  std::size_t n_queries = 0;    // 2 x positive pairs
  std::size_t oov_phrases = 0;  // distinct unrepresentable phrases
  MissingPolicy missing_policy = MissingPolicy::score_neg_one;
  std::vector<PRPoint> pr_curve;
};

EvalReport evaluate(const Benchmark& bench, const Embedder& embedder,
                    MissingPolicy policy = MissingPolicy::score_neg_one, int threads = 1);

std::string report_json(const EvalReport& report);
void save_report(const EvalReport& report, const std::string& path);
void save_pr_curve(const std::vector<PRPoint>& curve, const std::string& path);  // TSV

}  // namespace skillrel
