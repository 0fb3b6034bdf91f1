#include "skillrel/builder.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "skillrel/error.hpp"
#include "skillrel/rng.hpp"
#include "skillrel/text.hpp"

using namespace skillrel;
namespace fs = std::filesystem;

namespace {

SkillList make_list(std::vector<std::string> skills, const std::string& id = "s") {
  SkillList list;
  list.source_id = id;
  list.extractor = "rule";
  list.skills = std::move(skills);
  return list;
}

// Independent recount: set-based scan per pair, no shared code with the
// builder's counting path.
std::size_t brute_cooc(const std::vector<SkillList>& lists, const CasingMap& casing,
                       const std::string& a, const std::string& b) {
  std::size_t n = 0;
  for (const auto& list : lists) {
    bool has_a = false, has_b = false;
    for (const auto& s : list.skills) {
      const std::string norm = casing.normalize(s);
      has_a = has_a || norm == a;
      has_b = has_b || norm == b;
    }
    if (has_a && has_b) ++n;
  }
  return n;
}

std::size_t brute_count(const std::vector<SkillList>& lists, const CasingMap& casing,
                        const std::string& a) {
  std::size_t n = 0;
  for (const auto& list : lists) {
    for (const auto& s : list.skills) {
      if (casing.normalize(s) == a) {
        ++n;
        break;
      }
    }
  }
  return n;
}

// Lists drawn from disjoint skill groups, so cross-group pairs never
// co-occur and the negative sampler has room to work. Mixed casing keeps
// the normalization path exercised.
std::vector<SkillList> random_fixture(std::uint64_t seed, std::size_t n_lists) {
  constexpr std::size_t kGroups = 8;
  constexpr std::size_t kPerGroup = 5;
  std::vector<std::vector<std::string>> groups(kGroups);
  for (std::size_t g = 0; g < kGroups; ++g)
    for (std::size_t k = 0; k < kPerGroup; ++k)
      groups[g].push_back("Skill" + std::to_string(g) + char('a' + k));
  Rng rng(seed);
  std::vector<SkillList> lists;
  for (std::size_t i = 0; i < n_lists; ++i) {
    const auto& group = groups[rng.uniform_index(kGroups)];
    const std::size_t len = 2 + rng.uniform_index(3);
    std::vector<std::string> skills;
    for (std::size_t k = 0; k < len; ++k) {
      std::string s = group[rng.uniform_index(group.size())];
      if (rng.uniform_real() < 0.3) s = to_lower_ascii(s);  // casing variant
      skills.push_back(std::move(s));
    }
    lists.push_back(make_list(std::move(skills), "s" + std::to_string(i)));
  }
  return lists;
}

}  // namespace

TEST_CASE("casing map picks the most frequent variant") {
  std::vector<SkillList> lists = {
      make_list({"CSS", "x"}), make_list({"CSS", "y"}), make_list({"CSS"}),
      make_list({"css"}),
  };
  auto map = build_casing_map(lists);
  CHECK(map.normalize("css") == "CSS");
  CHECK(map.normalize("CSS") == "CSS");
  CHECK(map.normalize("Css") == "CSS");
  // unseen strings pass through
  CHECK(map.normalize("Rust") == "Rust");
}

TEST_CASE("casing ties keep the first seen variant") {
  std::vector<SkillList> lists = {make_list({"html"}), make_list({"HTML"})};
  auto map = build_casing_map(lists);
  CHECK(map.normalize("HtMl") == "html");
}

TEST_CASE("single variant maps to itself") {
  std::vector<SkillList> lists = {make_list({"Kubernetes"})};
  auto map = build_casing_map(lists);
  CHECK(map.normalize("Kubernetes") == "Kubernetes");
}

TEST_CASE("count_pairs enumerates unordered pairs once per list") {
  std::vector<SkillList> lists = {make_list({"a", "b", "c"})};
  auto stats = count_pairs(lists, build_casing_map(lists));
  CHECK(stats.lists_counted == 1);
  REQUIRE(stats.cooc.size() == 3);
  CHECK(stats.cooc.at({"a", "b"}) == 1);
  CHECK(stats.cooc.at({"a", "c"}) == 1);
  CHECK(stats.cooc.at({"b", "c"}) == 1);
  CHECK(stats.skill_count.at("a") == 1);
  CHECK(stats.skill_count.at("b") == 1);
  CHECK(stats.skill_count.at("c") == 1);
}

TEST_CASE("within-list duplicates count once") {
  std::vector<SkillList> lists = {make_list({"a", "a", "b"})};
  auto stats = count_pairs(lists, build_casing_map(lists));
  REQUIRE(stats.cooc.size() == 1);
  CHECK(stats.cooc.at({"a", "b"}) == 1);
  CHECK(stats.skill_count.at("a") == 1);
}

TEST_CASE("repeated lists accumulate and conditionals reach one") {
  std::vector<SkillList> lists = {make_list({"a", "b"}), make_list({"a", "b"})};
  auto stats = count_pairs(lists, build_casing_map(lists));
  CHECK(stats.cooc.at({"a", "b"}) == 2);
  CHECK(stats.skill_count.at("a") == 2);
  CHECK(stats.skill_count.at("b") == 2);
  CHECK(stats.cond("b", "a") == doctest::Approx(1.0));
  CHECK(stats.cond("a", "b") == doctest::Approx(1.0));
}

TEST_CASE("casing variants merge before counting") {
  std::vector<SkillList> lists = {make_list({"CSS", "HTML"}), make_list({"css", "HTML"})};
  auto stats = count_pairs(lists, build_casing_map(lists));
  REQUIRE(stats.cooc.size() == 1);
  CHECK(stats.cooc.at({"CSS", "HTML"}) == 2);
  CHECK(stats.skill_count.at("CSS") == 2);
}

TEST_CASE("threaded counting equals sequential counting") {
  auto lists = random_fixture(7, 500);
  auto map = build_casing_map(lists);
  auto seq = count_pairs(lists, map, 1);
  auto par = count_pairs(lists, map, 4);
  CHECK(seq.cooc == par.cooc);
  CHECK(seq.skill_count == par.skill_count);
}

TEST_CASE("positive filter applies both thresholds") {
  PairStats stats;
  stats.lists_counted = 40;
  // 0.30 and 0.25: kept at the boundary
  stats.cooc[{"a", "b"}] = 3;
  stats.skill_count["a"] = 10;
  stats.skill_count["b"] = 12;
  // conditionals 1.0 but below the count floor
  stats.cooc[{"c", "d"}] = 2;
  stats.skill_count["c"] = 2;
  stats.skill_count["d"] = 2;
  // 1.0 and 0.20: one direction fails
  stats.cooc[{"e", "f"}] = 5;
  stats.skill_count["e"] = 5;
  stats.skill_count["f"] = 25;
  BuilderConfig cfg;
  auto positives = filter_positives(stats, cfg);
  REQUIRE(positives.size() == 1);
  CHECK(positives[0].skill_a == "a");
  CHECK(positives[0].skill_b == "b");
  CHECK(positives[0].frequency == 3);
}

TEST_CASE("target_positives keeps the most frequent pairs") {
  PairStats stats;
  stats.lists_counted = 100;
  const auto add = [&](const std::string& a, const std::string& b, std::size_t cooc) {
    stats.cooc[{a, b}] = cooc;
    stats.skill_count[a] += cooc;
    stats.skill_count[b] += cooc;
  };
  add("a", "b", 10);
  add("c", "d", 7);
  add("e", "f", 7);
  add("g", "h", 3);
  BuilderConfig cfg;
  cfg.target_positives = 2;
  auto positives = filter_positives(stats, cfg);
  REQUIRE(positives.size() == 2);
  CHECK(positives[0].frequency == 10);
  // frequency tie broken lexicographically
  CHECK(positives[1].skill_a == "c");
}

TEST_CASE("negative sampling draws only zero-cooc pairs") {
  std::vector<SkillList> lists = {make_list({"a", "b"}), make_list({"a", "b"}),
                                  make_list({"a", "b"}), make_list({"c"}), make_list({"d"})};
  auto map = build_casing_map(lists);
  auto stats = count_pairs(lists, map);
  auto negatives = sample_negatives(stats, 1, 7);
  REQUIRE(negatives.size() == 1);
  const auto& n = negatives[0];
  CHECK(n.frequency == 0);
  CHECK(stats.cooc.count({n.skill_a, n.skill_b}) == 0);
  // the zero-cooc set over {a,b,c,d} minus {(a,b)}
  std::set<std::pair<std::string, std::string>> allowed = {
      {"a", "c"}, {"a", "d"}, {"b", "c"}, {"b", "d"}, {"c", "d"}};
  CHECK(allowed.count({n.skill_a, n.skill_b}) == 1);
}

TEST_CASE("sampling n=0 returns empty") {
  PairStats stats;
  stats.skill_count["a"] = 1;
  stats.skill_count["b"] = 1;
  CHECK(sample_negatives(stats, 0, 1).empty());
}

TEST_CASE("exhausted universe raises a capacity error") {
  std::vector<SkillList> lists = {make_list({"a", "b"})};
  auto map = build_casing_map(lists);
  auto stats = count_pairs(lists, map);
  CHECK_THROWS_AS(sample_negatives(stats, 1, 3), Error);
  PairStats tiny;
  tiny.skill_count["only"] = 5;
  CHECK_THROWS_AS(sample_negatives(tiny, 1, 3), Error);
}

TEST_CASE("assemble validates balance and conflicts") {
  BuilderConfig cfg;
  PairStats stats;
  std::vector<BenchmarkPair> pos = {{"a", "b", Label::positive, 5},
                                    {"c", "d", Label::positive, 3}};
  std::vector<BenchmarkPair> neg = {{"a", "c", Label::negative, 0},
                                    {"b", "d", Label::negative, 0}};
  auto benchmark = assemble_benchmark(pos, neg, cfg, stats);
  CHECK(benchmark.pairs.size() == 4);
  CHECK(benchmark.positives().size() == 2);
  CHECK(benchmark.negatives().size() == 2);

  CHECK_THROWS_AS(assemble_benchmark(pos, {neg[0]}, cfg, stats), Error);

  std::vector<BenchmarkPair> conflict = {{"a", "b", Label::negative, 0},
                                         {"c", "e", Label::negative, 0}};
  CHECK_THROWS_AS(assemble_benchmark(pos, conflict, cfg, stats), Error);

  std::vector<BenchmarkPair> self_pos = {{"a", "a", Label::positive, 5},
                                         {"c", "d", Label::positive, 3}};
  CHECK_THROWS_AS(assemble_benchmark(self_pos, neg, cfg, stats), Error);
}

TEST_CASE("full build is sound against brute force recounting") {
  auto lists = random_fixture(11, 400);
  auto map = build_casing_map(lists);
  auto stats = count_pairs(lists, map);
  BuilderConfig cfg;
  cfg.seed = 5;
  auto positives = filter_positives(stats, cfg);
  REQUIRE(positives.size() > 0);
  auto negatives = sample_negatives(stats, positives.size(), cfg.seed);
  auto benchmark = assemble_benchmark(positives, negatives, cfg, stats);

  for (const auto& p : benchmark.positives()) {
    const std::size_t cooc = brute_cooc(lists, map, p.skill_a, p.skill_b);
    CHECK(cooc == p.frequency);
    CHECK(cooc >= cfg.min_count);
    const std::size_t ca = brute_count(lists, map, p.skill_a);
    const std::size_t cb = brute_count(lists, map, p.skill_b);
    CHECK(static_cast<double>(cooc) / ca >= cfg.min_cond);
    CHECK(static_cast<double>(cooc) / cb >= cfg.min_cond);
  }
  for (const auto& p : benchmark.negatives())
    CHECK(brute_cooc(lists, map, p.skill_a, p.skill_b) == 0);
}

TEST_CASE("same seed gives byte-identical benchmark files") {
  auto lists = random_fixture(13, 300);
  const auto build_once = [&](std::uint64_t seed, const fs::path& path) {
    auto map = build_casing_map(lists);
    auto stats = count_pairs(lists, map);
    BuilderConfig cfg;
    cfg.seed = seed;
    auto positives = filter_positives(stats, cfg);
    auto negatives = sample_negatives(stats, positives.size(), cfg.seed);
    save_benchmark(assemble_benchmark(positives, negatives, cfg, stats), path.string());
  };
  fs::path p1 = fs::temp_directory_path() / "bench_run1.tsv";
  fs::path p2 = fs::temp_directory_path() / "bench_run2.tsv";
  build_once(21, p1);
  build_once(21, p2);
  std::ifstream f1(p1, std::ios::binary), f2(p2, std::ios::binary);
  std::stringstream s1, s2;
  s1 << f1.rdbuf();
  s2 << f2.rdbuf();
  CHECK(s1.str() == s2.str());
  CHECK(!s1.str().empty());
  fs::remove(p1);
  fs::remove(p2);
}

TEST_CASE("raising thresholds never adds positives") {
  auto lists = random_fixture(17, 400);
  auto map = build_casing_map(lists);
  auto stats = count_pairs(lists, map);
  const auto key_set = [](const std::vector<BenchmarkPair>& v) {
    std::set<std::pair<std::string, std::string>> s;
    for (const auto& p : v) s.insert({p.skill_a, p.skill_b});
    return s;
  };
  BuilderConfig base;
  base.min_count = 2;
  base.min_cond = 0.10;
  auto loose = key_set(filter_positives(stats, base));

  BuilderConfig higher_count = base;
  higher_count.min_count = 3;
  for (const auto& k : key_set(filter_positives(stats, higher_count))) CHECK(loose.count(k) == 1);

  BuilderConfig higher_cond = base;
  higher_cond.min_cond = 0.20;
  for (const auto& k : key_set(filter_positives(stats, higher_cond))) CHECK(loose.count(k) == 1);
}

TEST_CASE("benchmark file ordering and round trip") {
  BuilderConfig cfg;
  PairStats stats;
  std::vector<BenchmarkPair> pos = {{"zeta", "zz", Label::positive, 3},
                                    {"alpha", "beta", Label::positive, 9}};
  std::vector<BenchmarkPair> neg = {{"mm", "nn", Label::negative, 0},
                                    {"aa", "bb", Label::negative, 0}};
  auto benchmark = assemble_benchmark(pos, neg, cfg, stats);
  // positives by descending frequency, negatives lexicographic
  CHECK(benchmark.pairs[0].skill_a == "alpha");
  CHECK(benchmark.pairs[1].skill_a == "zeta");
  CHECK(benchmark.pairs[2].skill_a == "aa");
  CHECK(benchmark.pairs[3].skill_a == "mm");

  fs::path p = fs::temp_directory_path() / "bench_roundtrip.tsv";
  save_benchmark(benchmark, p.string());
  auto loaded = load_benchmark(p.string());
  REQUIRE(loaded.pairs.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(loaded.pairs[i].skill_a == benchmark.pairs[i].skill_a);
    CHECK(loaded.pairs[i].skill_b == benchmark.pairs[i].skill_b);
    CHECK((loaded.pairs[i].label == benchmark.pairs[i].label));
    CHECK(loaded.pairs[i].frequency == benchmark.pairs[i].frequency);
  }
  fs::remove(p);
}

TEST_CASE("benchmark load rejects malformed files") {
  fs::path p = fs::temp_directory_path() / "bench_bad.tsv";
  {
    std::ofstream out(p);
    out << "wrong\theader\n";
  }
  CHECK_THROWS_AS(load_benchmark(p.string()), Error);
  {
    std::ofstream out(p);
    out << "skill_a\tskill_b\tlabel\tfrequency\n";
    out << "a\tb\tmaybe\t3\n";
  }
  CHECK_THROWS_AS(load_benchmark(p.string()), Error);
  {
    std::ofstream out(p);
    out << "skill_a\tskill_b\tlabel\tfrequency\n";
    out << "a\tb\tpositive\tmany\n";
  }
  CHECK_THROWS_AS(load_benchmark(p.string()), Error);
  fs::remove(p);
  CHECK_THROWS_AS(load_benchmark((fs::temp_directory_path() / "missing.tsv").string()), Error);
}

TEST_CASE("metadata sidecar records the build choices") {
  BuilderConfig cfg;
  cfg.seed = 99;
  PairStats stats;
  stats.lists_counted = 12;
  stats.skill_count["a"] = 3;
  auto benchmark = assemble_benchmark({{"a", "b", Label::positive, 4}},
                                      {{"c", "d", Label::negative, 0}}, cfg, stats);
  fs::path p = fs::temp_directory_path() / "bench_meta.json";
  save_benchmark_meta(benchmark.meta, p.string());
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  CHECK(text.find("\"seed\": 99") != std::string::npos);
  CHECK(text.find("\"min_count\": 3") != std::string::npos);
  CHECK(text.find("\"n_positives\": 1") != std::string::npos);
  fs::remove(p);
}
