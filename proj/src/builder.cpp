#include "skillrel/builder.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <thread>

#include "json.hpp"
#include "skillrel/error.hpp"
#include "skillrel/rng.hpp"
#include "skillrel/text.hpp"

namespace skillrel {

namespace {

using nlohmann::json;

bool pair_less(const BenchmarkPair& x, const BenchmarkPair& y) {
  if (x.skill_a != y.skill_a) return x.skill_a < y.skill_a;
  return x.skill_b < y.skill_b;
}

// Normalized, deduplicated skills of one list, sorted.
std::vector<std::string> normalized_unique(const SkillList& list, const CasingMap& casing) {
  std::set<std::string> uniq;
  for (const auto& s : list.skills) uniq.insert(casing.normalize(s));
  return {uniq.begin(), uniq.end()};
}

struct PartialCounts {
  std::map<std::pair<std::string, std::string>, std::size_t> cooc;
  std::map<std::string, std::size_t> skill_count;
};

void count_into(const std::vector<SkillList>& lists, std::size_t begin, std::size_t end,
                const CasingMap& casing, PartialCounts& out) {
  for (std::size_t i = begin; i < end; ++i) {
    const auto skills = normalized_unique(lists[i], casing);
    for (const auto& s : skills) ++out.skill_count[s];
    for (std::size_t a = 0; a < skills.size(); ++a)
      for (std::size_t b = a + 1; b < skills.size(); ++b)
        ++out.cooc[{skills[a], skills[b]}];
  }
}

}  // namespace

std::string CasingMap::normalize(const std::string& raw) const {
  const auto it = chosen.find(to_lower_ascii(raw));
  return it == chosen.end() ? raw : it->second;
}

CasingMap build_casing_map(const std::vector<SkillList>& lists) {
  // fold -> variants in first-seen order with counts
  std::unordered_map<std::string, std::vector<std::pair<std::string, std::size_t>>> variants;
  for (const auto& list : lists) {
    for (const auto& s : list.skills) {
      auto& seen = variants[to_lower_ascii(s)];
      auto it = std::find_if(seen.begin(), seen.end(),
                             [&](const auto& v) { return v.first == s; });
      if (it == seen.end())
        seen.emplace_back(s, 1);
      else
        ++it->second;
    }
  }
  CasingMap map;
  map.chosen.reserve(variants.size());
  for (auto& [fold, seen] : variants) {
    const auto* best = &seen.front();
    for (const auto& v : seen)
      if (v.second > best->second) best = &v;  // strict: ties keep first-seen
    map.chosen.emplace(fold, best->first);
  }
  return map;
}

double PairStats::cond(const std::string& of, const std::string& given) const {
  const auto key = given < of ? std::make_pair(given, of) : std::make_pair(of, given);
  const auto pit = cooc.find(key);
  if (pit == cooc.end()) return 0.0;
  const auto sit = skill_count.find(given);
  if (sit == skill_count.end() || sit->second == 0) return 0.0;
  return static_cast<double>(pit->second) / static_cast<double>(sit->second);
}

PairStats count_pairs(const std::vector<SkillList>& lists, const CasingMap& casing,
                      int threads) {
  PairStats stats;
  stats.lists_counted = lists.size();
  const std::size_t n_workers =
      threads > 1 ? std::min<std::size_t>(static_cast<std::size_t>(threads), lists.size()) : 1;
  if (n_workers <= 1) {
    PartialCounts all;
    count_into(lists, 0, lists.size(), casing, all);
    stats.cooc = std::move(all.cooc);
    stats.skill_count = std::move(all.skill_count);
    return stats;
  }
  std::vector<PartialCounts> parts(n_workers);
  std::vector<std::thread> pool;
  pool.reserve(n_workers);
  const std::size_t chunk = (lists.size() + n_workers - 1) / n_workers;
  for (std::size_t w = 0; w < n_workers; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(lists.size(), begin + chunk);
    pool.emplace_back([&, begin, end, w] { count_into(lists, begin, end, casing, parts[w]); });
  }
  for (auto& t : pool) t.join();
  for (auto& part : parts) {
    for (auto& [k, v] : part.cooc) stats.cooc[k] += v;
    for (auto& [k, v] : part.skill_count) stats.skill_count[k] += v;
  }
  return stats;
}

void BuilderConfig::validate() const {
  if (min_count < 1) throw config_error("min_count must be >= 1");
  if (!(min_cond > 0.0 && min_cond <= 1.0)) throw config_error("min_cond must be in (0, 1]");
}

std::vector<BenchmarkPair> filter_positives(const PairStats& stats, const BuilderConfig& cfg) {
  cfg.validate();
  std::vector<BenchmarkPair> out;
  for (const auto& [key, cooc] : stats.cooc) {
    if (cooc < cfg.min_count) continue;
    const auto& [a, b] = key;
    const double c = static_cast<double>(cooc);
    const double p_b_given_a = c / static_cast<double>(stats.skill_count.at(a));
    const double p_a_given_b = c / static_cast<double>(stats.skill_count.at(b));
    if (p_b_given_a < cfg.min_cond || p_a_given_b < cfg.min_cond) continue;
    out.push_back({a, b, Label::positive, cooc});
  }
  std::sort(out.begin(), out.end(), [](const BenchmarkPair& x, const BenchmarkPair& y) {
    if (x.frequency != y.frequency) return x.frequency > y.frequency;
    return pair_less(x, y);
  });
  if (cfg.target_positives > 0 && out.size() > cfg.target_positives)
    out.resize(cfg.target_positives);
  return out;
}

std::vector<BenchmarkPair> sample_negatives(const PairStats& stats, std::size_t n,
                                            std::uint64_t seed) {
  std::vector<BenchmarkPair> out;
  if (n == 0) return out;
  std::vector<std::string> universe;
  universe.reserve(stats.skill_count.size());
  for (const auto& [skill, count] : stats.skill_count) universe.push_back(skill);
  if (universe.size() < 2)
    throw capacity_error("skill universe too small to sample negative pairs");

  Rng rng(seed);
  std::set<std::pair<std::string, std::string>> taken;
  const std::size_t max_attempts = 1000 * n;
  std::size_t attempts = 0;
  while (out.size() < n) {
    if (attempts++ >= max_attempts)
      throw capacity_error("could not find " + std::to_string(n) +
                           " zero-cooccurrence pairs in " + std::to_string(max_attempts) +
                           " attempts");
    const auto i = static_cast<std::size_t>(rng.uniform_index(universe.size()));
    const auto j = static_cast<std::size_t>(rng.uniform_index(universe.size()));
    if (i == j) continue;
    auto key = universe[i] < universe[j] ? std::make_pair(universe[i], universe[j])
                                         : std::make_pair(universe[j], universe[i]);
    if (stats.cooc.count(key)) continue;  // has co-occurred
    if (!taken.insert(key).second) continue;
    out.push_back({key.first, key.second, Label::negative, 0});
  }
  return out;
}

std::vector<BenchmarkPair> Benchmark::positives() const {
  std::vector<BenchmarkPair> out;
  for (const auto& p : pairs)
    if (p.label == Label::positive) out.push_back(p);
  return out;
}

std::vector<BenchmarkPair> Benchmark::negatives() const {
  std::vector<BenchmarkPair> out;
  for (const auto& p : pairs)
    if (p.label == Label::negative) out.push_back(p);
  return out;
}

Benchmark assemble_benchmark(std::vector<BenchmarkPair> positives,
                             std::vector<BenchmarkPair> negatives, const BuilderConfig& cfg,
                             const PairStats& stats) {
  cfg.validate();
  if (positives.size() != negatives.size())
    throw assembly_error("benchmark is unbalanced: " + std::to_string(positives.size()) +
                         " positives vs " + std::to_string(negatives.size()) + " negatives");

  std::set<std::pair<std::string, std::string>> seen;
  const auto canonicalize_and_check = [&](BenchmarkPair& p) {
    if (p.skill_a.empty() || p.skill_b.empty()) throw assembly_error("empty skill in pair");
    if (p.skill_b < p.skill_a) std::swap(p.skill_a, p.skill_b);
    if (p.skill_a == p.skill_b) throw assembly_error("self-pair '" + p.skill_a + "'");
    if (!seen.insert({p.skill_a, p.skill_b}).second)
      throw assembly_error("pair ('" + p.skill_a + "', '" + p.skill_b +
                           "') appears more than once");
  };
  for (auto& p : positives) {
    p.label = Label::positive;
    canonicalize_and_check(p);
  }
  for (auto& p : negatives) {
    p.label = Label::negative;
    p.frequency = 0;
    canonicalize_and_check(p);
  }

  std::sort(positives.begin(), positives.end(),
            [](const BenchmarkPair& x, const BenchmarkPair& y) {
              if (x.frequency != y.frequency) return x.frequency > y.frequency;
              return pair_less(x, y);
            });
  std::sort(negatives.begin(), negatives.end(), pair_less);

  Benchmark benchmark;
  benchmark.meta.min_count = cfg.min_count;
  benchmark.meta.min_cond = cfg.min_cond;
  benchmark.meta.target_positives = cfg.target_positives;
  benchmark.meta.seed = cfg.seed;
  benchmark.meta.n_positives = positives.size();
  benchmark.meta.n_negatives = negatives.size();
  benchmark.meta.n_lists = stats.lists_counted;
  benchmark.meta.n_skills = stats.skill_count.size();
  benchmark.meta.negatives_policy =
      "uniform rejection sampling over zero-cooccurrence pairs from the full "
      "extracted vocabulary";
  benchmark.meta.casing_policy = "most frequent surface variant; ties keep the first seen";
  benchmark.pairs = std::move(positives);
  benchmark.pairs.insert(benchmark.pairs.end(), std::make_move_iterator(negatives.begin()),
                         std::make_move_iterator(negatives.end()));
  return benchmark;
}

void save_benchmark(const Benchmark& benchmark, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot write benchmark file: " + path);
  out << "skill_a\tskill_b\tlabel\tfrequency\n";
  for (const auto& p : benchmark.pairs) {
    if (p.skill_a.find_first_of("\t\n") != std::string::npos ||
        p.skill_b.find_first_of("\t\n") != std::string::npos)
      throw assembly_error("skill contains a tab or newline: '" + p.skill_a + "' / '" +
                           p.skill_b + "'");
    out << p.skill_a << '\t' << p.skill_b << '\t'
        << (p.label == Label::positive ? "positive" : "negative") << '\t' << p.frequency
        << '\n';
  }
  if (!out) throw io_error("short write to benchmark file: " + path);
}

Benchmark load_benchmark(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open benchmark file: " + path);
  Benchmark benchmark;
  std::string line;
  std::size_t line_no = 0;
  bool saw_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim_view(line).empty()) continue;
    const auto fields = split(line, '\t');
    if (!saw_header) {
      if (fields.size() != 4 || fields[0] != "skill_a" || fields[1] != "skill_b" ||
          fields[2] != "label" || fields[3] != "frequency")
        throw parse_error(path + ":1: expected header skill_a<TAB>skill_b<TAB>label<TAB>frequency");
      saw_header = true;
      continue;
    }
    if (fields.size() != 4)
      throw parse_error(path + ":" + std::to_string(line_no) + ": expected 4 tab-separated fields");
    BenchmarkPair p;
    p.skill_a = fields[0];
    p.skill_b = fields[1];
    if (fields[2] == "positive") {
      p.label = Label::positive;
    } else if (fields[2] == "negative") {
      p.label = Label::negative;
    } else {
      throw parse_error(path + ":" + std::to_string(line_no) + ": unknown label '" + fields[2] +
                        "'");
    }
    try {
      p.frequency = static_cast<std::size_t>(std::stoull(fields[3]));
    } catch (const std::exception&) {
      throw parse_error(path + ":" + std::to_string(line_no) + ": bad frequency '" + fields[3] +
                        "'");
    }
    if (p.skill_a.empty() || p.skill_b.empty())
      throw parse_error(path + ":" + std::to_string(line_no) + ": empty skill");
    benchmark.pairs.push_back(std::move(p));
  }
  if (!saw_header) throw parse_error(path + ": missing header row");
  benchmark.meta.n_positives = benchmark.positives().size();
  benchmark.meta.n_negatives = benchmark.negatives().size();
  return benchmark;
}

void save_benchmark_meta(const BenchmarkMeta& meta, const std::string& path) {
  json j;
  j["min_count"] = meta.min_count;
  j["min_cond"] = meta.min_cond;
  j["target_positives"] = meta.target_positives;
  j["seed"] = meta.seed;
  j["n_positives"] = meta.n_positives;
  j["n_negatives"] = meta.n_negatives;
  j["n_lists"] = meta.n_lists;
  j["n_skills"] = meta.n_skills;
  j["negatives_policy"] = meta.negatives_policy;
  j["casing_policy"] = meta.casing_policy;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot write benchmark metadata: " + path);
  out << j.dump(2) << "\n";
}

}  // namespace skillrel
