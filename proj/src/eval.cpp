#include "skillrel/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "skillrel/error.hpp"

namespace skillrel {

namespace {

using nlohmann::json;

// Every distinct phrase embedded once; the map holds nullopt for phrases
// the backend cannot represent.
std::map<std::string, std::optional<Eigen::VectorXd>> embed_phrases(const Benchmark& bench,
                                                                    const Embedder& embedder) {
  std::map<std::string, std::optional<Eigen::VectorXd>> vecs;
  for (const auto& p : bench.pairs) {
    vecs.emplace(p.skill_a, std::nullopt);
    vecs.emplace(p.skill_b, std::nullopt);
  }
  for (auto& [phrase, vec] : vecs) vec = embedder.embed(phrase);
  return vecs;
}

double checked_cosine(const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
  // A trained or composed vector can still be all-zero in principle; score
  // such a pair as unrelated rather than failing the whole evaluation.
  const double nu = u.norm();
  const double nv = v.norm();
  if (nu == 0.0 || nv == 0.0) return 0.0;
  return u.dot(v) / (nu * nv);
}

}  // namespace

std::string to_string(MissingPolicy policy) {
  switch (policy) {
    case MissingPolicy::score_neg_one: return "score-neg-one";
    case MissingPolicy::zero: return "zero";
    case MissingPolicy::skip: return "skip";
  }
  return "score-neg-one";
}

MissingPolicy missing_policy_from_string(const std::string& name) {
  if (name == "score-neg-one") return MissingPolicy::score_neg_one;
  if (name == "zero") return MissingPolicy::zero;
  if (name == "skip") return MissingPolicy::skip;
  throw config_error("unknown missing policy '" + name + "' (score-neg-one, zero, skip)");
}

std::vector<ScoredPair> score_benchmark(const Benchmark& bench, const Embedder& embedder) {
  const auto vecs = embed_phrases(bench, embedder);
  std::vector<ScoredPair> scored;
  scored.reserve(bench.pairs.size());
  for (const auto& p : bench.pairs) {
    ScoredPair sp;
    sp.pair = p;
    const auto& va = vecs.at(p.skill_a);
    const auto& vb = vecs.at(p.skill_b);
    if (va && vb) sp.score = checked_cosine(*va, *vb);
    scored.push_back(std::move(sp));
  }
  return scored;
}

APResult average_precision(const std::vector<ScoredPair>& scored, MissingPolicy policy) {
  // Resolve missing scores, keeping file positions for tie-breaking.
  struct Entry {
    double score;
    bool positive;
    std::size_t file_pos;
  };
  std::vector<Entry> entries;
  entries.reserve(scored.size());
  for (std::size_t i = 0; i < scored.size(); ++i) {
    const auto& sp = scored[i];
    double score = 0.0;
    if (sp.score) {
      score = *sp.score;
    } else if (policy == MissingPolicy::score_neg_one) {
      score = -1.0;
    } else if (policy == MissingPolicy::zero) {
      score = 0.0;
    } else {
      continue;  // skip
    }
    entries.push_back({score, sp.pair.label == Label::positive, i});
  }

  std::size_t total_positives = 0;
  for (const auto& e : entries) total_positives += e.positive ? 1 : 0;
  if (total_positives == 0) throw metric_error("no positive pairs to rank");

  std::sort(entries.begin(), entries.end(), [](const Entry& x, const Entry& y) {
    if (x.score != y.score) return x.score > y.score;
    return x.file_pos < y.file_pos;
  });

  APResult result;
  result.curve.reserve(entries.size());
  std::size_t hits = 0;
  double ap_sum = 0.0;
  for (std::size_t k = 0; k < entries.size(); ++k) {
    if (entries[k].positive) ++hits;
    const double precision = static_cast<double>(hits) / static_cast<double>(k + 1);
    const double recall = static_cast<double>(hits) / static_cast<double>(total_positives);
    if (entries[k].positive) ap_sum += precision;
    result.curve.push_back({entries[k].score, precision, recall});
  }
  result.auc_pr = ap_sum / static_cast<double>(total_positives);
  return result;
}

double mrr(const Benchmark& bench, const Embedder& embedder, int threads) {
  const auto vecs = embed_phrases(bench, embedder);

  std::vector<std::string> candidates;
  candidates.reserve(vecs.size());
  for (const auto& [phrase, _] : vecs) candidates.push_back(phrase);  // already sorted

  struct Query {
    const std::string* query;
    const std::string* partner;
  };
  std::vector<Query> queries;
  for (const auto& p : bench.pairs) {
    if (p.label != Label::positive) continue;
    queries.push_back({&p.skill_a, &p.skill_b});
    queries.push_back({&p.skill_b, &p.skill_a});
  }
  if (queries.empty()) throw metric_error("no positive pairs to query");

  // Rank of the partner among all candidates except the query: scored
  // candidates by descending cosine then name; unscored ones after them,
  // by name. Counting beats sorting since only one candidate's rank matters.
  const auto reciprocal_rank = [&](const Query& q) {
    const auto& query_vec = vecs.at(*q.query);
    const auto& partner_vec = vecs.at(*q.partner);
    const bool partner_scored = query_vec.has_value() && partner_vec.has_value();
    const double partner_score =
        partner_scored ? checked_cosine(*query_vec, *partner_vec) : 0.0;

    std::size_t rank = 1;
    for (const auto& name : candidates) {
      if (name == *q.query || name == *q.partner) continue;
      const auto& cand_vec = vecs.at(name);
      const bool cand_scored = query_vec.has_value() && cand_vec.has_value();
      bool ahead = false;
      if (cand_scored && !partner_scored) {
        ahead = true;
      } else if (cand_scored == partner_scored) {
        if (cand_scored) {
          const double s = checked_cosine(*query_vec, *cand_vec);
          ahead = s > partner_score || (s == partner_score && name < *q.partner);
        } else {
          ahead = name < *q.partner;
        }
      }
      rank += ahead ? 1 : 0;
    }
    return 1.0 / static_cast<double>(rank);
  };

  std::vector<double> rr(queries.size());
  const int workers =
      std::max(1, std::min<int>(threads, static_cast<int>(queries.size())));
  if (workers == 1) {
    for (std::size_t i = 0; i < queries.size(); ++i) rr[i] = reciprocal_rank(queries[i]);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < workers; ++t)
      pool.emplace_back([&, t] {
        for (std::size_t i = static_cast<std::size_t>(t); i < queries.size();
             i += static_cast<std::size_t>(workers))
          rr[i] = reciprocal_rank(queries[i]);
      });
    for (auto& th : pool) th.join();
  }

  double sum = 0.0;
  for (const double r : rr) sum += r;  // fixed order keeps the mean bit-stable
  return sum / static_cast<double>(queries.size());
}

Eigen::MatrixXd similarity_matrix(const std::vector<std::string>& rows,
                                  const std::vector<std::string>& cols, const Embedder& embedder) {
  const auto embed_all = [&](const std::vector<std::string>& phrases) {
    std::vector<Eigen::VectorXd> out;
    out.reserve(phrases.size());
    for (const auto& phrase : phrases) {
      auto v = embedder.embed(phrase);
      if (!v) throw oov_error("no vector for skill '" + phrase + "'");
      out.push_back(std::move(*v));
    }
    return out;
  };
  const auto row_vecs = embed_all(rows);
  const auto col_vecs = embed_all(cols);

  Eigen::MatrixXd m(rows.size(), cols.size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          rows[i] == cols[j] ? 1.0 : checked_cosine(row_vecs[i], col_vecs[j]);
  return m;
}

std::string matrix_tsv(const std::vector<std::string>& rows, const std::vector<std::string>& cols,
                       const Eigen::MatrixXd& m) {
  std::ostringstream out;
  for (const auto& c : cols) out << '\t' << c;
  out << '\n';
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out << rows[i];
    for (std::size_t j = 0; j < cols.size(); ++j) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.6f", m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
      out << '\t' << buf;
    }
    out << '\n';
  }
  return out.str();
}

namespace {

// Fixed diverging ramp: -1 deep blue, 0 white, +1 deep red.
std::string ramp_color(double v) {
  v = std::clamp(v, -1.0, 1.0);
  const auto mix = [](int lo, int hi, double t) {
    return static_cast<int>(std::lround(lo + (hi - lo) * t));
  };
  int r, g, b;
  if (v < 0.0) {
    const double t = v + 1.0;  // 0 at -1, 1 at 0
    r = mix(33, 247, t);
    g = mix(102, 247, t);
    b = mix(172, 247, t);
  } else {
    r = mix(247, 178, v);
    g = mix(247, 24, v);
    b = mix(247, 43, v);
  }
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, g, b);
  return buf;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (const char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string heatmap_svg(const std::vector<std::string>& rows, const std::vector<std::string>& cols,
                        const Eigen::MatrixXd& m) {
  const int cell = 28;
  const int label_w = 160;
  const int label_h = 120;
  const int width = label_w + cell * static_cast<int>(cols.size()) + 10;
  const int height = label_h + cell * static_cast<int>(rows.size()) + 10;

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  svg << "<rect width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";

  for (std::size_t j = 0; j < cols.size(); ++j) {
    const int x = label_w + static_cast<int>(j) * cell + cell / 2;
    svg << "<text x=\"" << x << "\" y=\"" << label_h - 8 << "\" text-anchor=\"start\" transform=\"rotate(-60 "
        << x << ' ' << label_h - 8 << ")\">" << xml_escape(cols[j]) << "</text>\n";
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const int y = label_h + static_cast<int>(i) * cell + cell / 2 + 4;
    svg << "<text x=\"" << label_w - 6 << "\" y=\"" << y << "\" text-anchor=\"end\">"
        << xml_escape(rows[i]) << "</text>\n";
  }
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j) {
      const double v = m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      const int x = label_w + static_cast<int>(j) * cell;
      const int y = label_h + static_cast<int>(i) * cell;
      svg << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << cell << "\" height=\"" << cell
          << "\" fill=\"" << ramp_color(v) << "\"><title>" << xml_escape(rows[i]) << " / "
          << xml_escape(cols[j]) << ": " << v << "</title></rect>\n";
    }
  svg << "</svg>\n";
  return svg.str();
}

EvalReport evaluate(const Benchmark& bench, const Embedder& embedder, MissingPolicy policy,
                    int threads) {
  EvalReport report;
  report.missing_policy = policy;
  report.n_pairs = bench.pairs.size();

  const auto scored = score_benchmark(bench, embedder);
  const auto ap = average_precision(scored, policy);
  report.auc_pr = ap.auc_pr;
  report.pr_curve = ap.curve;
  report.mrr = mrr(bench, embedder, threads);

  std::size_t positives = 0;
  for (const auto& p : bench.pairs) positives += p.label == Label::positive ? 1 : 0;
  report.n_queries = 2 * positives;
  report.oov_phrases = oov_count(bench, embedder);
  return report;
}

std::string report_json(const EvalReport& report) {
  json j{{"auc_pr", report.auc_pr},
         {"mrr", report.mrr},
         {"n_pairs", report.n_pairs},
         {"n_queries", report.n_queries},
         {"oov_phrases", report.oov_phrases},
         {"missing_policy", to_string(report.missing_policy)}};
  json curve = json::array();
  for (const auto& pt : report.pr_curve)
    curve.push_back({{"threshold", pt.threshold}, {"precision", pt.precision}, {"recall", pt.recall}});
  j["pr_curve"] = curve;
  return j.dump(2);
}

void save_report(const EvalReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot write " + path);
  out << report_json(report) << '\n';
  if (!out) throw io_error("write failed for " + path);
}

void save_pr_curve(const std::vector<PRPoint>& curve, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot write " + path);
  out << "threshold\tprecision\trecall\n";
  char buf[96];
  for (const auto& pt : curve) {
    std::snprintf(buf, sizeof buf, "%.9g\t%.9g\t%.9g\n", pt.threshold, pt.precision, pt.recall);
    out << buf;
  }
  if (!out) throw io_error("write failed for " + path);
}

}  // namespace skillrel
