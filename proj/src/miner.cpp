#include "skillrel/miner.hpp"

#include <algorithm>
#include <fstream>
#include <thread>
#include <unordered_set>

#include "json.hpp"
#include "skillrel/error.hpp"
#include "skillrel/stem.hpp"
#include "skillrel/text.hpp"

namespace skillrel {

namespace {

using nlohmann::json;

bool ci_eq(char a, char b) {
  if (a >= 'A' && a <= 'Z') a = static_cast<char>(a - 'A' + 'a');
  if (b >= 'A' && b <= 'Z') b = static_cast<char>(b - 'A' + 'a');
  return a == b;
}

// Matches `phrase` at `pos`, case-insensitively; a space in the phrase
// matches a run of whitespace. Returns the end offset or 0 on failure.
std::size_t match_phrase_at(const std::string& text, std::size_t pos, const std::string& phrase) {
  std::size_t t = pos;
  for (std::size_t p = 0; p < phrase.size(); ++p) {
    if (phrase[p] == ' ') {
      if (t >= text.size() || !is_ascii_space(text[t])) return 0;
      while (t < text.size() && is_ascii_space(text[t])) ++t;
    } else {
      if (t >= text.size() || !ci_eq(text[t], phrase[p])) return 0;
      ++t;
    }
  }
  return t;
}

bool boundary_before(const std::string& text, std::size_t pos) {
  return pos == 0 || !is_ascii_alnum(text[pos - 1]);
}

bool boundary_after(const std::string& text, std::size_t end, const std::string& phrase) {
  if (phrase.back() == '.') return true;  // "e.g." ends on its own boundary
  return end >= text.size() || !is_ascii_alnum(text[end]);
}

struct KeywordIndex {
  std::vector<TokenSpan> tokens;       // lowercased alpha tokens
  std::vector<bool> is_keyword;        // stem in the stemmed keyword set
};

KeywordIndex build_keyword_index(const std::string& text,
                                 const std::unordered_set<std::string>& stemmed_keywords) {
  KeywordIndex idx;
  idx.tokens = alpha_tokens(text);
  idx.is_keyword.reserve(idx.tokens.size());
  for (auto& tok : idx.tokens) {
    tok.text = to_lower_ascii(tok.text);
    idx.is_keyword.push_back(stemmed_keywords.count(porter_stem(tok.text)) > 0);
  }
  return idx;
}

// Nearest keyword token fully after `from` with gap <= window.
const TokenSpan* keyword_after(const KeywordIndex& idx, std::size_t from, int window) {
  for (std::size_t i = 0; i < idx.tokens.size(); ++i) {
    const TokenSpan& tok = idx.tokens[i];
    if (tok.begin < from || !idx.is_keyword[i]) continue;
    if (tok.begin - from > static_cast<std::size_t>(window)) return nullptr;  // tokens are ordered
    return &tok;
  }
  return nullptr;
}

// Nearest keyword token fully before `upto` with gap <= window.
const TokenSpan* keyword_before(const KeywordIndex& idx, std::size_t upto, int window) {
  const TokenSpan* best = nullptr;
  for (std::size_t i = 0; i < idx.tokens.size(); ++i) {
    const TokenSpan& tok = idx.tokens[i];
    if (tok.end > upto) break;
    if (idx.is_keyword[i]) best = &tok;
  }
  if (!best) return nullptr;
  if (upto - best->end > static_cast<std::size_t>(window)) return nullptr;
  return best;
}

// Trims whitespace plus stray leading/trailing list punctuation.
bool trim_x_region(const std::string& text, std::size_t& b, std::size_t& e) {
  const auto droppable = [&](char c, bool leading) {
    if (is_ascii_space(c)) return true;
    if (c == ',' || c == ':') return true;
    return leading && c == ';';
  };
  while (b < e && droppable(text[b], true)) ++b;
  while (e > b && droppable(text[e - 1], false)) --e;
  return b < e;
}

}  // namespace

void PatternConfig::validate() const {
  if (group1_connectors.empty() || group1_qualifiers.empty() || group2_triggers.empty() ||
      keywords.empty())
    throw config_error("pattern sets must be non-empty");
  if (kw_window_chars < 0) throw config_error("kw_window_chars must be >= 0");
  for (const auto& w : keywords)
    if (w.empty()) throw config_error("empty keyword");
}

std::vector<std::string> PatternConfig::group1_templates() const {
  std::vector<std::string> out;
  for (const auto& c : group1_connectors)
    for (const auto& q : group1_qualifiers) out.push_back(c + " " + q);
  return out;
}

std::size_t PatternConfig::pattern_count() const {
  return group1_connectors.size() * group1_qualifiers.size() + group2_triggers.size();
}

PatternConfig PatternConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open pattern config: " + path);
  PatternConfig cfg;
  std::string line;
  std::size_t line_no = 0;
  const auto parse_list = [](const std::string& value) {
    std::vector<std::string> items;
    for (const auto& part : split(value, '|')) {
      std::string item = trim(part);
      if (!item.empty()) items.push_back(to_lower_ascii(item));
    }
    return items;
  };
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view sv = trim_view(line);
    if (sv.empty() || sv.front() == '#') continue;
    const auto eq = sv.find('=');
    if (eq == std::string_view::npos)
      throw parse_error(path + ":" + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(sv.substr(0, eq));
    const std::string value = trim(sv.substr(eq + 1));
    if (key == "group1_connectors") {
      cfg.group1_connectors = parse_list(value);
    } else if (key == "group1_qualifiers") {
      cfg.group1_qualifiers = parse_list(value);
    } else if (key == "group2_triggers") {
      cfg.group2_triggers = parse_list(value);
    } else if (key == "keywords") {
      cfg.keywords = parse_list(value);
    } else if (key == "kw_window_chars") {
      cfg.kw_window_chars = std::stoi(value);
    } else if (key == "clip_x_at_semicolon") {
      cfg.clip_x_at_semicolon = (value == "true" || value == "1");
    } else {
      throw parse_error(path + ":" + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
  }
  cfg.validate();
  return cfg;
}

std::vector<PatternMatch> match_patterns(const Sentence& sentence, const PatternConfig& cfg) {
  std::vector<PatternMatch> out;
  const std::string& text = sentence.text;
  if (trim_view(text).empty()) return out;

  std::unordered_set<std::string> stemmed_keywords;
  for (const auto& kw : cfg.keywords) stemmed_keywords.insert(porter_stem(to_lower_ascii(kw)));
  const KeywordIndex idx = build_keyword_index(text, stemmed_keywords);

  const auto last_semicolon_before = [&](std::size_t pos) -> std::size_t {
    const auto p = text.rfind(';', pos == 0 ? 0 : pos - 1);
    return (p == std::string::npos || p >= pos) ? 0 : p + 1;
  };
  const auto first_semicolon_after = [&](std::size_t pos) {
    const auto p = text.find(';', pos);
    return p == std::string::npos ? text.size() : p;
  };

  // Group 1: X <connector> <qualifier> ... KW
  for (std::size_t i = 0; i + 1 < idx.tokens.size(); ++i) {
    const TokenSpan& conn = idx.tokens[i];
    const TokenSpan& qual = idx.tokens[i + 1];
    if (std::find(cfg.group1_connectors.begin(), cfg.group1_connectors.end(), conn.text) ==
        cfg.group1_connectors.end())
      continue;
    if (std::find(cfg.group1_qualifiers.begin(), cfg.group1_qualifiers.end(), qual.text) ==
        cfg.group1_qualifiers.end())
      continue;
    bool only_space = true;
    for (std::size_t k = conn.end; k < qual.begin; ++k)
      if (!is_ascii_space(text[k])) only_space = false;
    if (!only_space) continue;

    const TokenSpan* kw = keyword_after(idx, qual.end, cfg.kw_window_chars);
    if (!kw) continue;

    std::size_t xb = cfg.clip_x_at_semicolon ? last_semicolon_before(conn.begin) : 0;
    std::size_t xe = conn.begin;
    if (!trim_x_region(text, xb, xe)) continue;

    PatternMatch m;
    m.sentence = sentence;
    m.pattern_group = 1;
    m.trigger = conn.text + " " + qual.text;
    m.trigger_start = conn.begin;
    m.trigger_end = qual.end;
    m.x_start = xb;
    m.x_end = xe;
    m.matched_keyword = kw->text;
    out.push_back(std::move(m));
  }

  // Group 2: KW ... <trigger> X
  for (const auto& trigger : cfg.group2_triggers) {
    const std::string trig = to_lower_ascii(trigger);
    for (std::size_t pos = 0; pos < text.size(); ++pos) {
      if (!boundary_before(text, pos)) continue;
      const std::size_t end = match_phrase_at(text, pos, trig);
      if (end == 0 || !boundary_after(text, end, trig)) continue;

      const TokenSpan* kw = keyword_before(idx, pos, cfg.kw_window_chars);
      if (!kw) continue;

      std::size_t xb = end;
      std::size_t xe = cfg.clip_x_at_semicolon ? first_semicolon_after(end) : text.size();
      if (!trim_x_region(text, xb, xe)) continue;

      PatternMatch m;
      m.sentence = sentence;
      m.pattern_group = 2;
      m.trigger = trig;
      m.trigger_start = pos;
      m.trigger_end = end;
      m.x_start = xb;
      m.x_end = xe;
      m.matched_keyword = kw->text;
      out.push_back(std::move(m));
    }
  }

  std::sort(out.begin(), out.end(), [](const PatternMatch& a, const PatternMatch& b) {
    if (a.trigger_start != b.trigger_start) return a.trigger_start < b.trigger_start;
    if (a.pattern_group != b.pattern_group) return a.pattern_group < b.pattern_group;
    return a.trigger < b.trigger;
  });
  return out;
}

namespace {

void merge_sentence_matches(std::vector<std::vector<PatternMatch>>& per_sentence,
                            std::unordered_set<std::string>& seen_texts, MineResult& result) {
  for (auto& matches : per_sentence) {
    if (matches.empty()) continue;
    ++result.stats.sentences_matched;
    if (!seen_texts.insert(matches.front().sentence.text).second) {
      ++result.stats.duplicates_removed;
      continue;
    }
    for (auto& m : matches) {
      ++result.stats.per_pattern[m.trigger];
      result.matches.push_back(std::move(m));
    }
  }
  per_sentence.clear();
}

void match_batch(const std::vector<Sentence>& sentences, const PatternConfig& cfg, int threads,
                 std::vector<std::vector<PatternMatch>>& per_sentence) {
  per_sentence.resize(sentences.size());
  if (threads <= 1 || sentences.size() < 64) {
    for (std::size_t i = 0; i < sentences.size(); ++i)
      per_sentence[i] = match_patterns(sentences[i], cfg);
    return;
  }
  const std::size_t n_workers =
      std::min<std::size_t>(static_cast<std::size_t>(threads), sentences.size());
  std::vector<std::thread> workers;
  workers.reserve(n_workers);
  for (std::size_t w = 0; w < n_workers; ++w) {
    workers.emplace_back([&, w] {
      for (std::size_t i = w; i < sentences.size(); i += n_workers)
        per_sentence[i] = match_patterns(sentences[i], cfg);
    });
  }
  for (auto& t : workers) t.join();
}

void sort_matches(std::vector<PatternMatch>& matches) {
  std::sort(matches.begin(), matches.end(), [](const PatternMatch& a, const PatternMatch& b) {
    if (a.sentence.doc_id != b.sentence.doc_id) return a.sentence.doc_id < b.sentence.doc_id;
    if (a.sentence.index != b.sentence.index) return a.sentence.index < b.sentence.index;
    if (a.trigger_start != b.trigger_start) return a.trigger_start < b.trigger_start;
    return a.trigger < b.trigger;
  });
}

}  // namespace

MineResult mine_sentences(const std::vector<Sentence>& sentences, const PatternConfig& cfg,
                          int threads) {
  cfg.validate();
  MineResult result;
  result.stats.sentences_scanned = sentences.size();
  std::vector<std::vector<PatternMatch>> per_sentence;
  match_batch(sentences, cfg, threads, per_sentence);
  std::unordered_set<std::string> seen_texts;
  merge_sentence_matches(per_sentence, seen_texts, result);
  result.stats.matches_emitted = result.matches.size();
  sort_matches(result.matches);
  return result;
}

MineResult mine_corpus(CorpusReader& ads, const PatternConfig& cfg, int threads) {
  cfg.validate();
  MineResult result;
  std::unordered_set<std::string> seen_texts;
  constexpr std::size_t kBatchAds = 2000;
  std::vector<Sentence> batch;
  bool done = false;
  while (!done) {
    batch.clear();
    std::size_t ads_in_batch = 0;
    while (ads_in_batch < kBatchAds) {
      auto ad = ads.next();
      if (!ad) {
        done = true;
        break;
      }
      ++ads_in_batch;
      auto sentences = segment_sentences(*ad);
      batch.insert(batch.end(), std::make_move_iterator(sentences.begin()),
                   std::make_move_iterator(sentences.end()));
    }
    result.stats.ads_scanned += ads_in_batch;
    result.stats.sentences_scanned += batch.size();
    std::vector<std::vector<PatternMatch>> per_sentence;
    match_batch(batch, cfg, threads, per_sentence);
    merge_sentence_matches(per_sentence, seen_texts, result);
  }
  result.stats.matches_emitted = result.matches.size();
  sort_matches(result.matches);
  return result;
}

std::string match_to_json(const PatternMatch& m) {
  json j;
  j["doc_id"] = m.sentence.doc_id;
  j["sentence_index"] = m.sentence.index;
  j["sentence_text"] = m.sentence.text;
  j["sentence_start"] = m.sentence.start;
  j["sentence_end"] = m.sentence.end;
  j["pattern_group"] = m.pattern_group;
  j["trigger"] = m.trigger;
  j["trigger_start"] = m.trigger_start;
  j["trigger_end"] = m.trigger_end;
  j["x_start"] = m.x_start;
  j["x_end"] = m.x_end;
  j["x_text"] = m.x_text();
  j["matched_keyword"] = m.matched_keyword;
  return j.dump();
}

PatternMatch match_from_json(const std::string& line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::exception& e) {
    throw parse_error(std::string("bad match record: ") + e.what());
  }
  PatternMatch m;
  try {
    m.sentence.doc_id = j.at("doc_id").get<std::string>();
    m.sentence.index = j.at("sentence_index").get<std::size_t>();
    m.sentence.text = j.at("sentence_text").get<std::string>();
    m.sentence.start = j.value("sentence_start", std::size_t{0});
    m.sentence.end = j.value("sentence_end", m.sentence.text.size());
    m.pattern_group = j.at("pattern_group").get<int>();
    m.trigger = j.at("trigger").get<std::string>();
    m.trigger_start = j.at("trigger_start").get<std::size_t>();
    m.trigger_end = j.at("trigger_end").get<std::size_t>();
    m.x_start = j.at("x_start").get<std::size_t>();
    m.x_end = j.at("x_end").get<std::size_t>();
    m.matched_keyword = j.value("matched_keyword", std::string{});
  } catch (const json::exception& e) {
    throw parse_error(std::string("bad match record: ") + e.what());
  }
  if (m.x_end > m.sentence.text.size() || m.x_start > m.x_end)
    throw parse_error("match offsets fall outside the sentence");
  return m;
}

std::vector<PatternMatch> load_matches(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot read " + path);
  std::vector<PatternMatch> matches;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      matches.push_back(match_from_json(line));
    } catch (const Error& e) {
      throw Error(e.category(), path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return matches;
}

}  // namespace skillrel
