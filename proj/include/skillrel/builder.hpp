#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "skillrel/extraction.hpp"

namespace skillrel {

// Casing normalization: every surface variant maps to the most frequent
// variant of its lowercase fold. Ties go to the variant seen first.
struct CasingMap {
  std::unordered_map<std::string, std::string> chosen;  // fold -> surface

  std::string normalize(const std::string& raw) const;
  std::size_t size() const { return chosen.size(); }
};

CasingMap build_casing_map(const std::vector<SkillList>& lists);

// Pair and per-skill occurrence counts over normalized, within-list
// deduplicated skill lists. Pair keys are ordered (a < b). Ordered maps
// keep downstream iteration deterministic.
struct PairStats {
  std::map<std::pair<std::string, std::string>, std::size_t> cooc;
  std::map<std::string, std::size_t> skill_count;  // lists containing the skill
  std::size_t lists_counted = 0;

  double cond(const std::string& of, const std::string& given) const;
};

PairStats count_pairs(const std::vector<SkillList>& lists, const CasingMap& casing,
                      int threads = 1);

enum class Label { positive, negative };

struct BenchmarkPair {
  std::string skill_a;
  std::string skill_b;
  Label label = Label::positive;
  std::size_t frequency = 0;  // cooc for positives, 0 for negatives
};

struct BuilderConfig {
  std::size_t min_count = 3;
  double min_cond = 0.25;
  std::size_t target_positives = 0;  // 0: keep every qualifying pair
  std::uint64_t seed = 42;

  void validate() const;  // throws config-error
};

// Pairs passing cooc >= min_count and both conditionals >= min_cond,
// ordered by descending cooc then lexicographic pair; truncated to
// target_positives when set.
std::vector<BenchmarkPair> filter_positives(const PairStats& stats, const BuilderConfig& cfg);

// n unordered zero-cooc pairs over the full extracted vocabulary, found by
// seeded rejection sampling (self-pairs, observed pairs and repeats are
// rejected; attempts capped at 1000 * n).
std::vector<BenchmarkPair> sample_negatives(const PairStats& stats, std::size_t n,
                                            std::uint64_t seed);

struct BenchmarkMeta {
  std::size_t min_count = 0;
  double min_cond = 0.0;
  std::size_t target_positives = 0;
  std::uint64_t seed = 0;
  std::size_t n_positives = 0;
  std::size_t n_negatives = 0;
  std::size_t n_lists = 0;
  std::size_t n_skills = 0;
  std::string negatives_policy;
  std::string casing_policy;
};

struct Benchmark {
  std::vector<BenchmarkPair> pairs;  // positives first, then negatives
  BenchmarkMeta meta;

  std::vector<BenchmarkPair> positives() const;
  std::vector<BenchmarkPair> negatives() const;
};

// Validates balance, no self-pairs, no duplicate unordered pairs, no
// label conflicts; orders positives by descending frequency then
// lexicographic, negatives lexicographic.
Benchmark assemble_benchmark(std::vector<BenchmarkPair> positives,
                             std::vector<BenchmarkPair> negatives, const BuilderConfig& cfg,
                             const PairStats& stats);

// Tab-separated: skill_a, skill_b, label, frequency with a header row.
void save_benchmark(const Benchmark& benchmark, const std::string& path);
Benchmark load_benchmark(const std::string& path);  // throws io/parse errors

void save_benchmark_meta(const BenchmarkMeta& meta, const std::string& path);

}  // namespace skillrel
