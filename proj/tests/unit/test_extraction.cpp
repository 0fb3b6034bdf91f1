#include "skillrel/extraction.hpp"

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <thread>
#include <vector>

#include "doctest.h"
#include "httplib.h"
#include "json.hpp"
#include "skillrel/error.hpp"

using namespace skillrel;
namespace fs = std::filesystem;

namespace {

PatternMatch make_match(const std::string& sentence_text, std::size_t x_start, std::size_t x_end,
                        const std::string& doc_id = "d", std::size_t index = 0) {
  PatternMatch m;
  m.sentence.doc_id = doc_id;
  m.sentence.index = index;
  m.sentence.text = sentence_text;
  m.sentence.end = sentence_text.size();
  m.pattern_group = 2;
  m.trigger = "such as";
  m.x_start = x_start;
  m.x_end = x_end;
  m.matched_keyword = "experience";
  return m;
}

PatternMatch match_with_x(const std::string& x_region) {
  return make_match(x_region, 0, x_region.size());
}

// Test endpoint speaking the "simple" adapter shape. The handler decides
// the reply from the prompt text it receives.
class FakeEndpoint {
 public:
  using Handler = std::function<void(const std::string& prompt, int& status, std::string& completion)>;

  explicit FakeEndpoint(Handler handler) : handler_(std::move(handler)) {
    server_.Post("/complete", [this](const httplib::Request& req, httplib::Response& res) {
      ++calls_;
      auto body = nlohmann::json::parse(req.body);
      int status = 200;
      std::string completion;
      handler_(body["prompt"].get<std::string>(), status, completion);
      res.status = status;
      if (status == 200)
        res.set_content(nlohmann::json{{"completion", completion}}.dump(), "application/json");
      else
        res.set_content("error", "text/plain");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  ~FakeEndpoint() {
    server_.stop();
    thread_.join();
  }

  EndpointConfig config() const {
    EndpointConfig cfg;
    cfg.base_url = "http://127.0.0.1:" + std::to_string(port_);
    cfg.model = "test-model";
    cfg.rate_limit_rps = 10000.0;
    cfg.concurrency = 4;
    cfg.max_retries = 2;
    cfg.backoff_base_ms = 1;
    cfg.backoff_cap_ms = 4;
    return cfg;
  }

  int calls() const { return calls_.load(); }

 private:
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::atomic<int> calls_{0};
  Handler handler_;
};

PromptTemplate sentence_template() {
  return PromptTemplate::from_file(std::string(SKILLREL_DATA_DIR) + "/prompts/sentence_extraction.txt");
}

PromptTemplate job_ad_template() {
  return PromptTemplate::from_file(std::string(SKILLREL_DATA_DIR) + "/prompts/job_ad_extraction.txt");
}

}  // namespace

TEST_CASE("clean_mention trims edges and keeps interior symbols") {
  CHECK(clean_mention("  C++  ") == "C++");
  CHECK(clean_mention("Node.js.") == "Node.js");
  CHECK(clean_mention(",SQL;") == "SQL");
  CHECK(clean_mention("C#") == "C#");
  CHECK(clean_mention("(CI/CD)") == "(CI/CD)");
  CHECK(clean_mention("...") == "");
  CHECK(clean_mention("") == "");
}

TEST_CASE("parse_completion splits and cleans") {
  auto two = parse_completion("accounts receivable, accounts payable");
  REQUIRE(two.size() == 2);
  CHECK(two[0] == "accounts receivable");
  CHECK(two[1] == "accounts payable");

  CHECK(parse_completion("HTML,") == std::vector<std::string>{"HTML"});
  CHECK(parse_completion("a, , b.") == std::vector<std::string>{"a", "b"});
  CHECK(parse_completion("").empty());
  CHECK(parse_completion("none").empty());
  CHECK(parse_completion("None.").empty());
  CHECK(parse_completion("N/A").empty());
  CHECK(parse_completion("x\ny") == std::vector<std::string>{"x", "y"});
}

TEST_CASE("parse_completion collapses consecutive duplicates") {
  CHECK(parse_completion("SQL, SQL, Python") == std::vector<std::string>{"SQL", "Python"});
}

TEST_CASE("rule extractor splits x region on commas and or/and") {
  auto list = extract_skills_rule(match_with_x("Kubernetes, KafKa, or EKS"));
  CHECK(list.extractor == "rule");
  CHECK(list.skills == std::vector<std::string>{"Kubernetes", "KafKa", "EKS"});

  CHECK(extract_skills_rule(match_with_x("HTML")).skills == std::vector<std::string>{"HTML"});
  CHECK(extract_skills_rule(match_with_x("the, or")).skills.empty());
  CHECK(extract_skills_rule(match_with_x("machine learning and data analysis")).skills ==
        std::vector<std::string>{"machine learning", "data analysis"});
  CHECK(extract_skills_rule(match_with_x("the JVM, an IDE")).skills ==
        std::vector<std::string>{"JVM", "IDE"});
}

TEST_CASE("rule extractor mentions are substrings of the x region") {
  const std::string x = "PostgreSQL, MySQL, or similar relational databases";
  auto list = extract_skills_rule(match_with_x(x));
  for (const auto& s : list.skills) CHECK(x.find(s) != std::string::npos);
}

TEST_CASE("sentence prompt template assembles with placeholder replaced") {
  auto tpl = sentence_template();
  REQUIRE(tpl.shots.size() == 3);
  const std::string prompt = tpl.assemble("Our stack is Rust or similar systems skills.");
  CHECK(prompt.rfind("Sentence: Knowledge of supply chain management concepts", 0) == 0);
  CHECK(prompt.find("Equivalent skills list: punctuation, grammar, organization of texts, "
                    "formatting documents") != std::string::npos);
  const std::string tail =
      "Sentence: Our stack is Rust or similar systems skills.\nEquivalent skills list:";
  REQUIRE(prompt.size() >= tail.size());
  CHECK(prompt.substr(prompt.size() - tail.size()) == tail);
  CHECK(prompt.find("[sentence]") == std::string::npos);
}

TEST_CASE("job ad prompt template numbers the query block") {
  auto tpl = job_ad_template();
  REQUIRE(tpl.shots.size() == 1);
  const std::string prompt = tpl.assemble("MY AD TEXT");
  CHECK(prompt.find("# Vacancy 1\nAs a Senior Software Engineer") != std::string::npos);
  CHECK(prompt.find("# Skills 1\nSoftware engineering, Python, Django") != std::string::npos);
  const std::string tail = "# Vacancy 2\nMY AD TEXT\n\n# Skills 2";
  REQUIRE(prompt.size() >= tail.size());
  CHECK(prompt.substr(prompt.size() - tail.size()) == tail);
}

TEST_CASE("template validation rejects bad placeholder wiring") {
  PromptTemplate tpl;
  tpl.system = "sys";
  tpl.shots = {{"in", "out"}};
  tpl.shot_format = "{input} -> {output}";
  tpl.query_format = "query [X] and again [X]";
  tpl.placeholder = "[X]";
  CHECK_THROWS_AS(tpl.validate(), Error);

  tpl.query_format = "no marker here";
  CHECK_THROWS_AS(tpl.validate(), Error);

  tpl.query_format = "query [X]";
  tpl.shots.clear();
  CHECK_THROWS_AS(tpl.validate(), Error);
}

TEST_CASE("llm extraction parses completions from the endpoint") {
  FakeEndpoint ep([](const std::string&, int& status, std::string& completion) {
    status = 200;
    completion = "product purchasing, pricing structures, inventory control";
  });
  auto cfg = ep.config();
  LlmClient client(cfg);
  auto tpl = sentence_template();
  auto list = extract_skills_llm("Knowledge of supply chain management concepts such as product "
                                 "purchasing, pricing structures, and inventory control.",
                                 tpl, client);
  CHECK(list.extractor == "llm");
  CHECK(list.skills == std::vector<std::string>{"product purchasing", "pricing structures",
                                                "inventory control"});
}

TEST_CASE("transport retries recover from transient 500s") {
  std::atomic<int> failures_left{1};
  FakeEndpoint ep([&](const std::string&, int& status, std::string& completion) {
    if (failures_left.fetch_sub(1) > 0) {
      status = 500;
    } else {
      status = 200;
      completion = "X";
    }
  });
  LlmClient client(ep.config());
  CHECK(client.complete("s", "p") == "X");
  CHECK(ep.calls() == 2);
}

TEST_CASE("auth failure is raised immediately without retries") {
  FakeEndpoint ep([](const std::string&, int& status, std::string&) { status = 403; });
  LlmClient client(ep.config());
  try {
    client.complete("s", "p");
    FAIL("expected auth error");
  } catch (const Error& e) {
    CHECK(e.category() == "auth-error");
  }
  CHECK(ep.calls() == 1);
}

TEST_CASE("missing auth env variable fails fast") {
  EndpointConfig cfg;
  cfg.base_url = "http://127.0.0.1:1";
  cfg.auth_env = "SKILLREL_TEST_TOKEN_THAT_IS_NOT_SET";
  try {
    LlmClient client(cfg);
    FAIL("expected auth error");
  } catch (const Error& e) {
    CHECK(e.category() == "auth-error");
  }
}

TEST_CASE("extract_corpus rule mode emits one list per match") {
  std::vector<PatternMatch> matches;
  for (int i = 0; i < 5; ++i) {
    const std::string x = "SkillA" + std::to_string(i) + ", SkillB" + std::to_string(i);
    matches.push_back(make_match(x, 0, x.size(), "doc" + std::to_string(i), 0));
  }
  ExtractOptions opts;
  auto result = extract_corpus(matches, opts);
  REQUIRE(result.lists.size() == 5);
  CHECK(result.stats.items_total == 5);
  CHECK(result.stats.items_processed == 5);
  CHECK(result.lists[0].source_id == "doc0:0:0");
  CHECK(result.lists[0].skills == std::vector<std::string>{"SkillA0", "SkillB0"});
}

TEST_CASE("job ad mode requires the llm extractor") {
  std::vector<JobAd> ads = {{"a1", "text"}};
  ExtractOptions opts;
  opts.extractor = "rule";
  CHECK_THROWS_AS(extract_corpus(ads, opts), Error);
}

TEST_CASE("llm fault on one item does not abort the stream") {
  FakeEndpoint ep([](const std::string& prompt, int& status, std::string& completion) {
    if (prompt.find("BAD ITEM") != std::string::npos) {
      status = 500;
    } else {
      status = 200;
      completion = "alpha, beta";
    }
  });
  auto cfg = ep.config();
  cfg.max_retries = 1;
  auto tpl = sentence_template();
  std::vector<PatternMatch> matches;
  matches.push_back(make_match("GOOD ONE skills", 0, 4, "d1", 0));
  matches.push_back(make_match("BAD ITEM skills", 0, 4, "d2", 0));
  matches.push_back(make_match("GOOD TWO skills", 0, 4, "d3", 0));
  ExtractOptions opts;
  opts.extractor = "llm";
  opts.tpl = &tpl;
  opts.endpoint = &cfg;
  auto result = extract_corpus(matches, opts);
  REQUIRE(result.lists.size() == 2);
  CHECK(result.lists[0].source_id == "d1:0:0");
  CHECK(result.lists[1].source_id == "d3:0:0");
  CHECK(result.stats.failures == 1);
  CHECK(result.stats.items_processed == 2);
}

TEST_CASE("auth failure aborts the whole extraction") {
  FakeEndpoint ep([](const std::string&, int& status, std::string&) { status = 401; });
  auto cfg = ep.config();
  auto tpl = sentence_template();
  std::vector<PatternMatch> matches = {make_match("A skills", 0, 1, "d1", 0)};
  ExtractOptions opts;
  opts.extractor = "llm";
  opts.tpl = &tpl;
  opts.endpoint = &cfg;
  try {
    extract_corpus(matches, opts);
    FAIL("expected auth error");
  } catch (const Error& e) {
    CHECK(e.category() == "auth-error");
  }
}

TEST_CASE("checkpoint lets a rerun skip processed items") {
  fs::path cp = fs::temp_directory_path() / "extract_checkpoint.txt";
  fs::remove(cp);
  FakeEndpoint ep([](const std::string&, int& status, std::string& completion) {
    status = 200;
    completion = "alpha, beta";
  });
  auto cfg = ep.config();
  cfg.concurrency = 1;
  auto tpl = sentence_template();
  std::vector<PatternMatch> matches;
  matches.push_back(make_match("First sentence skills", 0, 5, "d1", 0));
  matches.push_back(make_match("Second sentence skills", 0, 5, "d2", 0));
  ExtractOptions opts;
  opts.extractor = "llm";
  opts.tpl = &tpl;
  opts.endpoint = &cfg;
  opts.checkpoint_path = cp.string();

  auto first = extract_corpus(matches, opts);
  CHECK(first.stats.items_processed == 2);
  CHECK(first.stats.items_skipped_checkpoint == 0);
  const int calls_after_first = ep.calls();

  auto second = extract_corpus(matches, opts);
  CHECK(second.stats.items_processed == 0);
  CHECK(second.stats.items_skipped_checkpoint == 2);
  CHECK(ep.calls() == calls_after_first);
  fs::remove(cp);
}

TEST_CASE("llm results come back in input order") {
  FakeEndpoint ep([](const std::string& prompt, int& status, std::string& completion) {
    status = 200;
    // make later items respond faster than earlier ones
    if (prompt.find("slow") != std::string::npos)
      std::this_thread::sleep_for(std::chrono::milliseconds(30));
    completion = "alpha, beta";
  });
  auto cfg = ep.config();
  auto tpl = sentence_template();
  std::vector<PatternMatch> matches;
  matches.push_back(make_match("slow item one skills", 0, 4, "d1", 0));
  matches.push_back(make_match("quick item skills", 0, 5, "d2", 0));
  matches.push_back(make_match("slow item two skills", 0, 4, "d3", 0));
  matches.push_back(make_match("quick item again skills", 0, 5, "d4", 0));
  ExtractOptions opts;
  opts.extractor = "llm";
  opts.tpl = &tpl;
  opts.endpoint = &cfg;
  auto result = extract_corpus(matches, opts);
  REQUIRE(result.lists.size() == 4);
  CHECK(result.lists[0].source_id == "d1:0:0");
  CHECK(result.lists[1].source_id == "d2:0:0");
  CHECK(result.lists[2].source_id == "d3:0:0");
  CHECK(result.lists[3].source_id == "d4:0:0");
}

TEST_CASE("job ad extraction returns spans in order") {
  const std::string demo_skills =
      "Software engineering, Python, Django, Typescript backends, system design, scalability, "
      "system performance, software development methodologies, mentorship, communication skills.";
  FakeEndpoint ep([&](const std::string&, int& status, std::string& completion) {
    status = 200;
    completion = demo_skills;
  });
  auto cfg = ep.config();
  auto tpl = job_ad_template();
  std::vector<JobAd> ads = {{"ad1", "Looking for a senior engineer with Python and Django."}};
  ExtractOptions opts;
  opts.extractor = "llm";
  opts.tpl = &tpl;
  opts.endpoint = &cfg;
  auto result = extract_corpus(ads, opts);
  REQUIRE(result.lists.size() == 1);
  const auto& skills = result.lists[0].skills;
  REQUIRE(skills.size() == 10);
  CHECK(skills[0] == "Software engineering");
  CHECK(skills[1] == "Python");
  CHECK(skills[2] == "Django");
  CHECK(skills[9] == "communication skills");
  CHECK(result.lists[0].source_id == "ad1");
}

TEST_CASE("token bucket refills at the configured rate") {
  TokenBucket bucket(5.0, 5.0);
  for (int i = 0; i < 5; ++i) CHECK(bucket.try_acquire(0.0));
  CHECK_FALSE(bucket.try_acquire(0.0));
  CHECK(bucket.seconds_until_available(0.0) == doctest::Approx(0.2));
  CHECK_FALSE(bucket.try_acquire(0.1));
  CHECK(bucket.try_acquire(0.2));
  // burst never exceeds capacity
  TokenBucket b2(10.0, 2.0);
  CHECK(b2.try_acquire(100.0));
  CHECK(b2.try_acquire(100.0));
  CHECK_FALSE(b2.try_acquire(100.0));
}

TEST_CASE("skill list json round trip") {
  SkillList list{"doc1:0:0", "rule", {"HTML", "CSS"}};
  auto line = skill_list_to_json(list);
  auto back = skill_list_from_json(line);
  CHECK(back.source_id == list.source_id);
  CHECK(back.extractor == list.extractor);
  CHECK(back.skills == list.skills);
  CHECK_THROWS_AS(skill_list_from_json("{\"nope\":1}"), Error);
}

TEST_CASE("load_skill_lists reads jsonl with line numbers in errors") {
  fs::path p = fs::temp_directory_path() / "skills_fixture.jsonl";
  {
    std::ofstream out(p);
    out << skill_list_to_json({"a", "rule", {"x", "y"}}) << "\n";
    out << "\n";
    out << skill_list_to_json({"b", "llm", {"z"}}) << "\n";
  }
  auto lists = load_skill_lists(p.string());
  REQUIRE(lists.size() == 2);
  CHECK(lists[1].skills == std::vector<std::string>{"z"});
  {
    std::ofstream out(p, std::ios::app);
    out << "garbage\n";
  }
  try {
    load_skill_lists(p.string());
    FAIL("expected parse error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find(":4:") != std::string::npos);
  }
  fs::remove(p);
}
