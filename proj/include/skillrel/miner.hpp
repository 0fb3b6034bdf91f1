#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "skillrel/corpus.hpp"

namespace skillrel {

// Trigger sets, keyword set and window for the two lexical pattern
// families. Defaults give 8 group-1 templates ("<connector> <qualifier>")
// and 6 group-2 trigger phrases.
struct PatternConfig {
  std::vector<std::string> group1_connectors = {"and", "or"};
  std::vector<std::string> group1_qualifiers = {"other", "related", "similar", "equivalent"};
  std::vector<std::string> group2_triggers = {"such as",    "including", "especially",
                                              "for example", "e.g.",      "i.e."};
  std::vector<std::string> keywords = {"skill", "technique", "knowledge", "experience",
                                       "background"};
  int kw_window_chars = 30;
  bool clip_x_at_semicolon = true;

  void validate() const;  // throws config-error

  // The 8 canonical "<connector> <qualifier>" template strings.
  std::vector<std::string> group1_templates() const;
  std::size_t pattern_count() const;

  // key = value lines, lists '|'-separated, '#' comments.
  static PatternConfig from_file(const std::string& path);
};

// One pattern hit in a sentence. Offsets are byte positions in
// sentence.text. The X-region is where related skills are enumerated; it
// precedes the trigger for group 1 and follows it for group 2.
struct PatternMatch {
  Sentence sentence;
  int pattern_group = 0;  // 1 or 2
  std::string trigger;    // canonical lowercase template, e.g. "or similar"
  std::size_t trigger_start = 0;
  std::size_t trigger_end = 0;
  std::size_t x_start = 0;
  std::size_t x_end = 0;
  std::string matched_keyword;  // lowercased surface token satisfying KW

  std::string x_text() const { return sentence.text.substr(x_start, x_end - x_start); }
};

struct MiningStats {
  std::size_t ads_scanned = 0;
  std::size_t sentences_scanned = 0;
  std::size_t sentences_matched = 0;
  std::size_t duplicates_removed = 0;
  std::size_t matches_emitted = 0;
  std::map<std::string, std::size_t> per_pattern;
};

struct MineResult {
  std::vector<PatternMatch> matches;
  MiningStats stats;
};

// All pattern hits in one sentence, ordered by trigger position. Pure and
// reentrant.
std::vector<PatternMatch> match_patterns(const Sentence& sentence, const PatternConfig& cfg);

// Matches over a sentence stream with exact-text deduplication of matched
// sentences (first occurrence in input order wins) and a final sort by
// (doc_id, sentence index, trigger_start). Deterministic for any thread
// count.
MineResult mine_sentences(const std::vector<Sentence>& sentences, const PatternConfig& cfg,
                          int threads = 1);

MineResult mine_corpus(CorpusReader& ads, const PatternConfig& cfg, int threads = 1);

// One JSON object per line; carries the sentence text plus byte offsets so
// the record reloads into an equivalent PatternMatch.
std::string match_to_json(const PatternMatch& m);
PatternMatch match_from_json(const std::string& line);

// Reads a JSONL file of match records, skipping blank lines. Errors carry
// path:line.
std::vector<PatternMatch> load_matches(const std::string& path);

}  // namespace skillrel
