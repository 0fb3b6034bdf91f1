#include "skillrel/embedding.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "skillrel/error.hpp"
#include "skillrel/rng.hpp"

using namespace skillrel;
namespace fs = std::filesystem;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> xs) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (const double x : xs) v[i++] = x;
  return v;
}

fs::path temp_file(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "skillrel_embed_test";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("cosine basics") {
  const auto u = vec({1.0, 2.0, -3.0});
  CHECK(cosine(u, u) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(cosine(vec({1, 0}), vec({0, 1})) == doctest::Approx(0.0));
  CHECK(cosine(vec({1, 0}), vec({1, 1})) == doctest::Approx(0.70711).epsilon(1e-5));
  CHECK(cosine(vec({1, 0}), vec({-1, 0})) == doctest::Approx(-1.0));
}

TEST_CASE("cosine rejects zero norms and dim mismatches") {
  CHECK_THROWS_AS(cosine(vec({0, 0}), vec({1, 0})), Error);
  CHECK_THROWS_AS(cosine(vec({1, 0}), vec({0, 0})), Error);
  CHECK_THROWS_AS(cosine(vec({1, 0, 0}), vec({1, 0})), Error);
  try {
    cosine(vec({0, 0}), vec({1, 0}));
  } catch (const Error& e) {
    CHECK(e.category() == "numeric-error");
  }
}

TEST_CASE("cosine is invariant to positive scaling") {
  Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::VectorXd u(5), v(5);
    for (Eigen::Index i = 0; i < 5; ++i) {
      u[i] = rng.gaussian();
      v[i] = rng.gaussian();
    }
    const double c = rng.uniform_real(0.01, 100.0);
    CHECK(cosine(c * u, v) == doctest::Approx(cosine(u, v)).epsilon(1e-12));
  }
}

TEST_CASE("tokenizer keeps skill punctuation inside tokens") {
  CHECK(tokenize_for_embedding("C++ and R") == std::vector<std::string>{"c++", "and", "r"});
  CHECK(tokenize_for_embedding("Node.js, .NET; C#!") ==
        std::vector<std::string>{"node.js", ".net", "c#"});
  CHECK(tokenize_for_embedding("APIs. Join us.") == std::vector<std::string>{"apis", "join", "us"});
  CHECK(tokenize_for_embedding("machine-learning") == std::vector<std::string>{"machine", "learning"});
  CHECK(tokenize_for_embedding("C++.") == std::vector<std::string>{"c++"});
  CHECK(tokenize_for_embedding("2.5 years") == std::vector<std::string>{"2.5", "years"});
  CHECK(tokenize_for_embedding("") == std::vector<std::string>{});
  CHECK(tokenize_for_embedding("  ,;  ") == std::vector<std::string>{});
}

TEST_CASE("embedding table add and lookup") {
  EmbeddingTable table;
  table.add("html", vec({1, 0}));
  table.add("css", vec({0, 1}));
  CHECK(table.size() == 2);
  CHECK(table.dim() == 2);
  CHECK(table.contains("html"));
  CHECK_FALSE(table.contains("sql"));
  CHECK(table.vector_of("css") == vec({0, 1}));
  CHECK_THROWS_AS(table.vector_of("sql"), Error);
  CHECK_THROWS_AS(table.add("html", vec({2, 2})), Error);
  CHECK_THROWS_AS(table.add("sql", vec({1, 2, 3})), Error);
}

TEST_CASE("compose_phrase weights by inverse frequency") {
  EmbeddingTable table;
  table.add("python", vec({1, 0}));
  table.add("django", vec({0, 1}));
  FrequencyTable freqs;
  freqs.counts["python"] = 1;
  freqs.counts["django"] = 3;

  SUBCASE("single word is exact") {
    const auto r = compose_phrase("python", table, freqs);
    REQUIRE(r.vec.has_value());
    CHECK((*r.vec - vec({1, 0})).norm() == doctest::Approx(0.0));
    CHECK(r.missing_words.empty());
  }
  SUBCASE("equal frequencies give the mean") {
    freqs.counts["django"] = 1;
    const auto r = compose_phrase("python django", table, freqs);
    REQUIRE(r.vec.has_value());
    CHECK((*r.vec - vec({0.5, 0.5})).norm() == doctest::Approx(0.0));
  }
  SUBCASE("weights 1/1 and 1/3 mix to 0.75 and 0.25") {
    const auto r = compose_phrase("python django", table, freqs);
    REQUIRE(r.vec.has_value());
    CHECK((*r.vec)[0] == doctest::Approx(0.75).epsilon(1e-12));
    CHECK((*r.vec)[1] == doctest::Approx(0.25).epsilon(1e-12));
  }
  SUBCASE("order does not matter under equal weights") {
    freqs.counts["django"] = 1;
    const auto ab = compose_phrase("python django", table, freqs);
    const auto ba = compose_phrase("django python", table, freqs);
    REQUIRE(ab.vec.has_value());
    REQUIRE(ba.vec.has_value());
    CHECK((*ab.vec - *ba.vec).norm() == doctest::Approx(0.0));
  }
  SUBCASE("unknown words are skipped and reported") {
    const auto r = compose_phrase("python kubernetes", table, freqs);
    REQUIRE(r.vec.has_value());
    CHECK((*r.vec - vec({1, 0})).norm() == doctest::Approx(0.0));
    CHECK(r.missing_words == std::vector<std::string>{"kubernetes"});
  }
  SUBCASE("all-unknown phrase yields no vector") {
    const auto r = compose_phrase("rust golang", table, freqs);
    CHECK_FALSE(r.vec.has_value());
    CHECK(r.missing_words == std::vector<std::string>{"rust", "golang"});
  }
}

TEST_CASE("unseen word frequency defaults to one") {
  FrequencyTable freqs;
  freqs.counts["seen"] = 9;
  CHECK(freqs.freq("seen") == 9);
  CHECK(freqs.freq("unseen") == 1);
}

TEST_CASE("phrase table embedder falls back to the lowercase fold") {
  EmbeddingTable table;
  table.add("Machine Learning", vec({1, 0}));
  table.add("SQL", vec({0, 1}));
  PhraseTableEmbedder embedder(table);
  REQUIRE(embedder.embed("Machine Learning").has_value());
  REQUIRE(embedder.embed("machine learning").has_value());
  CHECK((*embedder.embed("machine learning") - vec({1, 0})).norm() == doctest::Approx(0.0));
  CHECK_FALSE(embedder.embed("prolog").has_value());
}

TEST_CASE("oov_count over a benchmark") {
  EmbeddingTable table;
  table.add("html", vec({1, 0}));
  table.add("css", vec({0, 1}));
  table.add("sql", vec({1, 1}));
  FrequencyTable freqs;

  Benchmark bench;
  const auto pair = [](const std::string& a, const std::string& b, Label label) {
    BenchmarkPair p;
    p.skill_a = a;
    p.skill_b = b;
    p.label = label;
    return p;
  };

  SUBCASE("full coverage counts zero") {
    bench.pairs = {pair("html", "css", Label::positive), pair("html", "sql", Label::negative)};
    CHECK(oov_count(bench, table, freqs) == 0);
  }
  SUBCASE("one unrepresentable phrase counts once") {
    bench.pairs = {pair("html", "fortran", Label::negative),
                   pair("css", "fortran", Label::negative)};
    CHECK(oov_count(bench, table, freqs) == 1);
  }
  SUBCASE("three planted phrases count three") {
    bench.pairs = {pair("html", "fortran", Label::negative), pair("cobol", "css", Label::negative),
                   pair("ada", "sql", Label::negative)};
    CHECK(oov_count(bench, table, freqs) == 3);
  }
  SUBCASE("partially covered phrases still compose") {
    bench.pairs = {pair("html basics", "css", Label::positive)};
    CHECK(oov_count(bench, table, freqs) == 0);
  }
}

TEST_CASE("adjacent pairs from one list") {
  SkillList list;
  list.skills = {"a", "b", "c"};
  const auto pairs = gen_adjacent_pairs(list);
  REQUIRE(pairs.size() == 2);
  CHECK(pairs[0] == TrainingPair{"a", "b"});
  CHECK(pairs[1] == TrainingPair{"b", "c"});

  list.skills = {"a"};
  CHECK(gen_adjacent_pairs(list).empty());
  list.skills = {};
  CHECK(gen_adjacent_pairs(list).empty());
  list.skills.assign(10, "x");
  CHECK(gen_adjacent_pairs(list).size() == 9);
}

TEST_CASE("pair count over a corpus matches the per-list identity") {
  Rng rng(11);
  std::vector<SkillList> lists;
  std::size_t expected = 0;
  for (int i = 0; i < 50; ++i) {
    SkillList list;
    const std::size_t n = rng.uniform_index(6);  // 0..5 spans
    for (std::size_t k = 0; k < n; ++k) list.skills.push_back("s" + std::to_string(k));
    expected += n > 0 ? n - 1 : 0;
    lists.push_back(std::move(list));
  }
  CHECK(gen_adjacent_pairs(lists).size() == expected);
}

TEST_CASE("table save and load round trip") {
  EmbeddingTable table;
  Rng rng(3);
  for (int r = 0; r < 5; ++r) {
    Eigen::VectorXd v(8);
    for (Eigen::Index c = 0; c < 8; ++c) v[c] = rng.gaussian();
    table.add("token " + std::to_string(r), v);  // space exercises underscore mapping
  }
  const auto path = temp_file("roundtrip.vec");
  save_table(table, path.string());

  const auto loaded = load_table(path.string());
  REQUIRE(loaded.size() == 5);
  REQUIRE(loaded.dim() == 8);
  CHECK(loaded.contains("token_0"));
  double max_err = 0.0;
  for (Eigen::Index r = 0; r < 5; ++r)
    max_err = std::max(max_err, (loaded.vectors.row(r) - table.vectors.row(r)).cwiseAbs().maxCoeff());
  CHECK(max_err < 1e-6);
}

TEST_CASE("single-vector table writes two lines") {
  EmbeddingTable table;
  table.add("solo", vec({1.5, -2.5}));
  const auto path = temp_file("solo.vec");
  save_table(table, path.string());
  std::ifstream in(path);
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(in, line)) lines.push_back(line);
  REQUIRE(lines.size() == 2);
  CHECK(lines[0] == "1 2");
  CHECK(lines[1] == "solo 1.5 -2.5");
}

TEST_CASE("table load rejects malformed files") {
  const auto write = [](const fs::path& p, const std::string& body) {
    std::ofstream out(p);
    out << body;
  };

  SUBCASE("bad header") {
    const auto p = temp_file("bad_header.vec");
    write(p, "not a header\nfoo 1 2\n");
    CHECK_THROWS_AS(load_table(p.string()), Error);
  }
  SUBCASE("row count below header") {
    const auto p = temp_file("short.vec");
    write(p, "3 2\na 1 2\nb 3 4\n");
    try {
      load_table(p.string());
      FAIL("expected a parse error");
    } catch (const Error& e) {
      CHECK(e.category() == "parse-error");
    }
  }
  SUBCASE("non-numeric component names its line") {
    const auto p = temp_file("nonnum.vec");
    write(p, "2 2\na 1 2\nb 3 oops\n");
    try {
      load_table(p.string());
      FAIL("expected a parse error");
    } catch (const Error& e) {
      CHECK(std::string(e.what()).find(":3:") != std::string::npos);
    }
  }
  SUBCASE("field count mismatch") {
    const auto p = temp_file("fields.vec");
    write(p, "1 3\na 1 2\n");
    CHECK_THROWS_AS(load_table(p.string()), Error);
  }
  SUBCASE("missing file") {
    CHECK_THROWS_AS(load_table("/nonexistent/file.vec"), Error);
  }
}

TEST_CASE("frequency table save and load") {
  FrequencyTable freqs;
  freqs.counts = {{"python", 30}, {"sql", 30}, {"rare", 1}};
  const auto path = temp_file("freqs.tsv");
  save_frequencies(freqs, path.string());

  std::ifstream in(path);
  std::string first;
  std::getline(in, first);
  CHECK(first == "python\t30");  // count ties break lexicographically

  const auto loaded = load_frequencies(path.string());
  CHECK(loaded.counts == freqs.counts);
}

TEST_CASE("training pair save and load") {
  const std::vector<TrainingPair> pairs = {{"html", "css"}, {"sql", "database design"}};
  const auto path = temp_file("pairs.jsonl");
  save_pairs(pairs, path.string());
  const auto loaded = load_pairs(path.string());
  REQUIRE(loaded.size() == 2);
  CHECK(loaded[0] == pairs[0]);
  CHECK(loaded[1] == pairs[1]);

  std::ofstream out(path, std::ios::app);
  out << "{\"anchor\": \"only\"}\n";
  out.close();
  CHECK_THROWS_AS(load_pairs(path.string()), Error);
}
