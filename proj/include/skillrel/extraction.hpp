#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "skillrel/corpus.hpp"
#include "skillrel/llm.hpp"
#include "skillrel/miner.hpp"

namespace skillrel {

// Ordered skill mentions extracted from one source (a matched sentence or
// a whole job ad). Order is preserved as produced; consecutive exact
// duplicates are collapsed.
struct SkillList {
  std::string source_id;
  std::string extractor;  // "llm" or "rule"
  std::vector<std::string> skills;
};

// Trims whitespace, trailing periods and stray edge punctuation from one
// mention. Interior characters ('+', '#', parentheses, dots) survive.
std::string clean_mention(std::string_view raw);

// Comma/newline-separated completion -> cleaned mentions. Empty and
// "none"-style completions give an empty list.
std::vector<std::string> parse_completion(std::string_view completion);

// Deterministic offline extractor over a pattern match's X-region: splits
// on commas and standalone "or"/"and", strips filler words.
SkillList extract_skills_rule(const PatternMatch& m);

struct PromptShot {
  std::string input;
  std::string output;
};

// Few-shot prompt: rendered shots joined by blank lines, then the query
// block whose placeholder is replaced by the target text.
//   shot_format:  {index} {input} {output}
//   query_format: {index} + the literal placeholder token
struct PromptTemplate {
  std::string system;
  std::vector<PromptShot> shots;
  std::string shot_format;
  std::string query_format;
  std::string placeholder;

  void validate() const;  // throws config-error
  std::string assemble(std::string_view target) const;

  // "### section" data file; see data/prompts/ for the shipped templates.
  static PromptTemplate from_file(const std::string& path);
};

SkillList extract_skills_llm(const std::string& text, const PromptTemplate& tpl,
                             LlmClient& client);

struct ExtractStats {
  std::size_t items_total = 0;
  std::size_t items_processed = 0;
  std::size_t items_skipped_checkpoint = 0;
  std::size_t items_empty = 0;
  std::size_t failures = 0;
  std::size_t llm_calls = 0;
};

struct ExtractOptions {
  std::string extractor = "rule";  // "rule" | "llm"
  std::string checkpoint_path;     // empty: no checkpointing
  const PromptTemplate* tpl = nullptr;
  const EndpointConfig* endpoint = nullptr;
};

struct ExtractResult {
  std::vector<SkillList> lists;  // input order; only lists with >= 1 mention
  ExtractStats stats;
};

// Sentence path: one list per pattern match. source_id is
// "<doc_id>:<sentence index>:<match ordinal within the sentence>".
ExtractResult extract_corpus(const std::vector<PatternMatch>& matches,
                             const ExtractOptions& opts);

// Job-ad path: llm extractor only; source_id is the ad id.
ExtractResult extract_corpus(const std::vector<JobAd>& ads, const ExtractOptions& opts);

std::string skill_list_to_json(const SkillList& list);
SkillList skill_list_from_json(const std::string& line);  // throws parse-error

// Reads line-delimited SkillList records; blank lines are skipped.
std::vector<SkillList> load_skill_lists(const std::string& path);

}  // namespace skillrel
