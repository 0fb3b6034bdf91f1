#pragma once

#include <cstddef>
#include <fstream>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

namespace skillrel {

// One job ad as read from a line-delimited corpus file. Text is NFC-lite
// normalized and whitespace-trimmed at load so downstream offsets and
// casing statistics are stable.
struct JobAd {
  std::string id;
  std::string text;
};

// A segmented sentence with byte offsets into its parent ad's text.
// Invariant: parent.text.substr(start, end - start) == text.
struct Sentence {
  std::string doc_id;
  std::size_t index = 0;
  std::string text;
  std::size_t start = 0;
  std::size_t end = 0;
};

struct LoadStats {
  std::size_t lines_total = 0;
  std::size_t ads_loaded = 0;
  std::size_t lines_skipped = 0;
  std::vector<std::string> errors;  // one message per skipped line
};

// Streams JobAds from a line-delimited file of {"id": ..., "text": ...}
// records. Malformed lines and duplicate ids are counted and skipped.
class CorpusReader {
 public:
  explicit CorpusReader(const std::string& path);  // throws io-error

  std::optional<JobAd> next();
  const LoadStats& stats() const { return stats_; }

 private:
  std::ifstream in_;
  std::string path_;
  LoadStats stats_;
  std::unordered_set<std::string> seen_ids_;
};

std::vector<JobAd> load_corpus(const std::string& path, LoadStats* stats = nullptr);

// Rule-based splitting on '.', '!', '?', newlines and bullet characters,
// with an abbreviation guard that keeps "e.g."/"i.e."-style tokens inside
// one sentence. Trimmed segments shorter than 3 characters are dropped.
std::vector<Sentence> segment_sentences(const JobAd& ad);

std::string sentence_to_json(const Sentence& s);

}  // namespace skillrel
