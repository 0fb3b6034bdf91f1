#include "skillrel/embedding.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "skillrel/error.hpp"
#include "skillrel/text.hpp"

namespace skillrel {

namespace {

using nlohmann::json;

std::string underscore_token(const std::string& token) {
  std::string out = token;
  std::replace(out.begin(), out.end(), ' ', '_');
  return out;
}

bool parse_double(const std::string& s, double& out) {
  try {
    std::size_t pos = 0;
    out = std::stod(s, &pos);
    return pos == s.size();
  } catch (const std::exception&) {
    return false;
  }
}

}  // namespace

std::optional<Eigen::Index> EmbeddingTable::row_of(const std::string& token) const {
  const auto it = index.find(token);
  if (it == index.end()) return std::nullopt;
  return it->second;
}

Eigen::VectorXd EmbeddingTable::vector_of(const std::string& token) const {
  const auto row = row_of(token);
  if (!row) throw oov_error("no vector for token '" + token + "'");
  return vectors.row(*row);
}

Eigen::Index EmbeddingTable::add(const std::string& token, const Eigen::VectorXd& vec) {
  if (index.count(token)) throw config_error("duplicate token '" + token + "'");
  if (vectors.rows() == 0) {
    vectors.resize(1, vec.size());
  } else {
    if (vec.size() != vectors.cols())
      throw config_error("vector length " + std::to_string(vec.size()) + " does not match table dim " +
                         std::to_string(vectors.cols()));
    vectors.conservativeResize(vectors.rows() + 1, Eigen::NoChange);
  }
  const Eigen::Index row = vectors.rows() - 1;
  vectors.row(row) = vec.transpose();
  index.emplace(token, row);
  tokens.push_back(token);
  return row;
}

std::size_t FrequencyTable::freq(const std::string& token) const {
  const auto it = counts.find(token);
  return it == counts.end() ? 1 : it->second;
}

double cosine(const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
  if (u.size() != v.size())
    throw config_error("cosine on dims " + std::to_string(u.size()) + " and " + std::to_string(v.size()));
  const double nu = u.norm();
  const double nv = v.norm();
  if (nu == 0.0 || nv == 0.0) throw numeric_error("cosine of a zero-norm vector");
  return u.dot(v) / (nu * nv);
}

std::vector<std::string> tokenize_for_embedding(const std::string& text) {
  const std::string lower = to_lower_ascii(text);
  std::vector<std::string> out;
  std::string cur;
  const auto is_token_char = [](unsigned char c) {
    return std::isalnum(c) || c == '+' || c == '#';
  };
  for (std::size_t i = 0; i < lower.size(); ++i) {
    const unsigned char c = static_cast<unsigned char>(lower[i]);
    const bool keep_dot = c == '.' && i + 1 < lower.size() &&
                          is_token_char(static_cast<unsigned char>(lower[i + 1]));
    if (is_token_char(c) || keep_dot) {
      // A '.' sticks to a following token char, so "node.js" and ".net"
      // stay whole while sentence-final periods separate.
      cur.push_back(static_cast<char>(c));
    } else if (!cur.empty()) {
      out.push_back(cur);
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

ComposeResult compose_phrase(const std::string& phrase, const EmbeddingTable& table,
                             const FrequencyTable& freqs) {
  ComposeResult result;
  const auto words = tokenize_for_embedding(phrase);
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(table.dim());
  double weight_sum = 0.0;
  for (const auto& w : words) {
    const auto row = table.row_of(w);
    if (!row) {
      result.missing_words.push_back(w);
      continue;
    }
    const double weight = 1.0 / static_cast<double>(freqs.freq(w));
    acc += weight * table.vectors.row(*row).transpose();
    weight_sum += weight;
  }
  if (weight_sum > 0.0) result.vec = acc / weight_sum;
  return result;
}

PhraseTableEmbedder::PhraseTableEmbedder(const EmbeddingTable& table) : table_(table) {
  for (Eigen::Index r = 0; r < table.size(); ++r)
    folded_.emplace(to_lower_ascii(table.token_at(r)), r);  // emplace keeps the first
}

std::optional<Eigen::VectorXd> PhraseTableEmbedder::embed(const std::string& phrase) const {
  if (const auto row = table_.row_of(phrase)) return table_.vectors.row(*row).transpose();
  const auto it = folded_.find(to_lower_ascii(phrase));
  if (it != folded_.end()) return table_.vectors.row(it->second).transpose();
  return std::nullopt;
}

ComposedWordEmbedder::ComposedWordEmbedder(const EmbeddingTable& table, const FrequencyTable& freqs)
    : table_(table), freqs_(freqs) {}

std::optional<Eigen::VectorXd> ComposedWordEmbedder::embed(const std::string& phrase) const {
  return compose_phrase(phrase, table_, freqs_).vec;
}

std::size_t oov_count(const Benchmark& bench, const Embedder& embedder) {
  std::set<std::string> phrases;
  for (const auto& p : bench.pairs) {
    phrases.insert(p.skill_a);
    phrases.insert(p.skill_b);
  }
  std::size_t missing = 0;
  for (const auto& phrase : phrases)
    if (!embedder.embed(phrase)) ++missing;
  return missing;
}

std::size_t oov_count(const Benchmark& bench, const EmbeddingTable& table,
                      const FrequencyTable& freqs) {
  return oov_count(bench, ComposedWordEmbedder(table, freqs));
}

std::vector<TrainingPair> gen_adjacent_pairs(const SkillList& list) {
  std::vector<TrainingPair> pairs;
  if (list.skills.size() < 2) return pairs;
  pairs.reserve(list.skills.size() - 1);
  for (std::size_t i = 0; i + 1 < list.skills.size(); ++i)
    pairs.push_back({list.skills[i], list.skills[i + 1]});
  return pairs;
}

std::vector<TrainingPair> gen_adjacent_pairs(const std::vector<SkillList>& lists) {
  std::vector<TrainingPair> pairs;
  for (const auto& list : lists) {
    auto part = gen_adjacent_pairs(list);
    pairs.insert(pairs.end(), part.begin(), part.end());
  }
  return pairs;
}

void save_table(const EmbeddingTable& table, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot write " + path);
  out << table.size() << ' ' << table.dim() << '\n';
  char buf[32];
  for (Eigen::Index r = 0; r < table.size(); ++r) {
    out << underscore_token(table.token_at(r));
    for (Eigen::Index c = 0; c < table.dim(); ++c) {
      std::snprintf(buf, sizeof buf, "%.9g", table.vectors(r, c));
      out << ' ' << buf;
    }
    out << '\n';
  }
  if (!out) throw io_error("write failed for " + path);
}

EmbeddingTable load_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot read " + path);
  std::string line;
  if (!std::getline(in, line)) throw parse_error(path + ":1: empty vector file");
  std::istringstream header(line);
  long long count = -1, dim = -1;
  if (!(header >> count >> dim) || count < 0 || dim <= 0)
    throw parse_error(path + ":1: bad header '" + line + "', want '<count> <dim>'");

  EmbeddingTable table;
  table.vectors.resize(count, dim);
  table.tokens.reserve(static_cast<std::size_t>(count));
  long long row = 0;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (row >= count)
      throw parse_error(path + ":" + std::to_string(lineno) + ": more rows than the header's " +
                        std::to_string(count));
    const auto fields = split(line, ' ');
    if (static_cast<long long>(fields.size()) != dim + 1)
      throw parse_error(path + ":" + std::to_string(lineno) + ": expected " + std::to_string(dim + 1) +
                        " fields, got " + std::to_string(fields.size()));
    const std::string& token = fields[0];
    if (table.index.count(token))
      throw parse_error(path + ":" + std::to_string(lineno) + ": duplicate token '" + token + "'");
    for (long long c = 0; c < dim; ++c) {
      double v = 0.0;
      if (!parse_double(fields[static_cast<std::size_t>(c) + 1], v))
        throw parse_error(path + ":" + std::to_string(lineno) + ": non-numeric value '" +
                          fields[static_cast<std::size_t>(c) + 1] + "'");
      table.vectors(row, c) = v;
    }
    table.index.emplace(token, row);
    table.tokens.push_back(token);
    ++row;
  }
  if (row != count)
    throw parse_error(path + ": header promises " + std::to_string(count) + " rows, file has " +
                      std::to_string(row));
  return table;
}

void save_frequencies(const FrequencyTable& freqs, const std::string& path) {
  std::vector<std::pair<std::string, std::size_t>> rows(freqs.counts.begin(), freqs.counts.end());
  std::sort(rows.begin(), rows.end(), [](const auto& x, const auto& y) {
    if (x.second != y.second) return x.second > y.second;
    return x.first < y.first;
  });
  std::ofstream out(path);
  if (!out) throw io_error("cannot write " + path);
  for (const auto& [token, count] : rows) out << token << '\t' << count << '\n';
  if (!out) throw io_error("write failed for " + path);
}

FrequencyTable load_frequencies(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot read " + path);
  FrequencyTable freqs;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw parse_error(path + ":" + std::to_string(lineno) + ": expected token\\tcount");
    const std::string token = line.substr(0, tab);
    unsigned long long count = 0;
    try {
      std::size_t pos = 0;
      count = std::stoull(line.substr(tab + 1), &pos);
      if (pos != line.size() - tab - 1) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw parse_error(path + ":" + std::to_string(lineno) + ": bad count '" + line.substr(tab + 1) + "'");
    }
    freqs.counts[token] = static_cast<std::size_t>(count);
  }
  return freqs;
}

void save_pairs(const std::vector<TrainingPair>& pairs, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot write " + path);
  for (const auto& p : pairs) {
    json j{{"anchor", p.anchor}, {"positive", p.positive}};
    out << j.dump() << '\n';
  }
  if (!out) throw io_error("write failed for " + path);
}

std::vector<TrainingPair> load_pairs(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot read " + path);
  std::vector<TrainingPair> pairs;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw parse_error(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
    if (!j.contains("anchor") || !j.contains("positive"))
      throw parse_error(path + ":" + std::to_string(lineno) + ": need anchor and positive");
    pairs.push_back({j["anchor"].get<std::string>(), j["positive"].get<std::string>()});
  }
  return pairs;
}

}  // namespace skillrel
