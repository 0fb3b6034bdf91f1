#include "skillrel/extraction.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <thread>
#include <unordered_set>

#include "json.hpp"
#include "skillrel/error.hpp"
#include "skillrel/text.hpp"

namespace skillrel {

namespace {

using nlohmann::json;

const std::unordered_set<std::string>& filler_words() {
  static const std::unordered_set<std::string> kFillers = {
      "a", "an", "the", "etc", "etc.", "other", "related", "similar", "equivalent"};
  return kFillers;
}

bool none_like(std::string_view s) {
  std::string t = to_lower_ascii(trim_view(s));
  while (!t.empty() && (t.back() == '.' || is_ascii_space(t.back()))) t.pop_back();
  return t.empty() || t == "none" || t == "n/a" || t == "na" || t == "-" || t == "no skills" ||
         t == "no skills mentioned";
}

void push_mention(std::vector<std::string>& out, std::string mention) {
  if (mention.empty()) return;
  if (!out.empty() && out.back() == mention) return;  // collapse exact repeats
  out.push_back(std::move(mention));
}

// Splits a comma-free segment on standalone "or"/"and", strips leading
// filler words, and emits what remains.
void emit_rule_segments(const std::string& segment, std::vector<std::string>& out) {
  std::vector<std::string> words;
  std::string current;
  const auto flush_word = [&] {
    if (!current.empty()) {
      words.push_back(current);
      current.clear();
    }
  };
  for (char c : segment) {
    if (is_ascii_space(c)) {
      flush_word();
    } else {
      current.push_back(c);
    }
  }
  flush_word();

  std::vector<std::string> piece;
  const auto flush_piece = [&] {
    std::size_t skip = 0;
    while (skip < piece.size() && filler_words().count(to_lower_ascii(piece[skip]))) ++skip;
    if (skip == piece.size()) {
      piece.clear();
      return;
    }
    std::string joined = piece[skip];
    for (std::size_t k = skip + 1; k < piece.size(); ++k) joined += " " + piece[k];
    push_mention(out, clean_mention(joined));
    piece.clear();
  };
  for (const auto& w : words) {
    const std::string lw = to_lower_ascii(w);
    if (lw == "or" || lw == "and") {
      flush_piece();
    } else {
      piece.push_back(w);
    }
  }
  flush_piece();
}

std::string render_format(std::string_view fmt, std::size_t index, std::string_view input,
                          std::string_view output) {
  std::string out;
  out.reserve(fmt.size() + input.size() + output.size());
  for (std::size_t i = 0; i < fmt.size();) {
    if (fmt[i] == '{') {
      if (fmt.compare(i, 7, "{index}") == 0) {
        out += std::to_string(index);
        i += 7;
        continue;
      }
      if (fmt.compare(i, 7, "{input}") == 0) {
        out += input;
        i += 7;
        continue;
      }
      if (fmt.compare(i, 8, "{output}") == 0) {
        out += output;
        i += 8;
        continue;
      }
    }
    out += fmt[i++];
  }
  return out;
}

std::size_t count_occurrences(std::string_view hay, std::string_view needle) {
  if (needle.empty()) return 0;
  std::size_t n = 0;
  for (std::size_t pos = hay.find(needle); pos != std::string_view::npos;
       pos = hay.find(needle, pos + 1))
    ++n;
  return n;
}

// Checkpoint file: one processed source id per line, appended as items
// finish so an interrupted run resumes where it left off.
class Checkpoint {
 public:
  explicit Checkpoint(const std::string& path) : path_(path) {
    if (path_.empty()) return;
    std::ifstream in(path_);
    std::string line;
    while (std::getline(in, line)) {
      const std::string id = trim(line);
      if (!id.empty()) done_.insert(id);
    }
    out_.open(path_, std::ios::app);
    if (!out_) throw io_error("cannot open checkpoint file: " + path_);
  }

  bool contains(const std::string& id) const { return done_.count(id) > 0; }

  void mark(const std::string& id) {
    if (path_.empty()) return;
    std::lock_guard<std::mutex> lock(mu_);
    out_ << id << "\n";
    out_.flush();
  }

  bool enabled() const { return !path_.empty(); }

 private:
  std::string path_;
  std::unordered_set<std::string> done_;
  std::ofstream out_;
  std::mutex mu_;
};

struct WorkItem {
  std::string source_id;
  std::string text;             // llm prompt target
  const PatternMatch* match = nullptr;  // rule mode
};

// Shared by both extract_corpus overloads: runs items through the chosen
// extractor, preserves input order, isolates per-item failures.
ExtractResult run_extraction(std::vector<WorkItem> items, const ExtractOptions& opts,
                             bool allow_rule) {
  if (opts.extractor != "rule" && opts.extractor != "llm")
    throw config_error("unknown extractor '" + opts.extractor + "'");
  if (opts.extractor == "rule" && !allow_rule)
    throw config_error("rule extractor needs pattern matches; use the llm extractor for job ads");
  if (opts.extractor == "llm") {
    if (!opts.tpl) throw config_error("llm extraction needs a prompt template");
    if (!opts.endpoint) throw config_error("llm extraction needs an endpoint config");
    opts.tpl->validate();
  }

  ExtractResult result;
  result.stats.items_total = items.size();
  Checkpoint checkpoint(opts.checkpoint_path);

  std::vector<SkillList> slots(items.size());
  std::vector<bool> emit(items.size(), false);

  if (opts.extractor == "rule") {
    for (std::size_t i = 0; i < items.size(); ++i) {
      if (checkpoint.contains(items[i].source_id)) {
        ++result.stats.items_skipped_checkpoint;
        continue;
      }
      SkillList list = extract_skills_rule(*items[i].match);
      list.source_id = items[i].source_id;
      ++result.stats.items_processed;
      if (list.skills.empty()) {
        ++result.stats.items_empty;
      } else {
        slots[i] = std::move(list);
        emit[i] = true;
      }
      checkpoint.mark(items[i].source_id);
    }
  } else {
    LlmClient client(*opts.endpoint);
    std::mutex mu;
    std::size_t next = 0;
    bool aborted = false;
    std::string abort_category, abort_what;

    const auto worker = [&] {
      for (;;) {
        std::size_t i;
        {
          std::lock_guard<std::mutex> lock(mu);
          if (aborted || next >= items.size()) return;
          i = next++;
        }
        if (checkpoint.contains(items[i].source_id)) {
          std::lock_guard<std::mutex> lock(mu);
          ++result.stats.items_skipped_checkpoint;
          continue;
        }
        try {
          SkillList list = extract_skills_llm(items[i].text, *opts.tpl, client);
          list.source_id = items[i].source_id;
          std::lock_guard<std::mutex> lock(mu);
          ++result.stats.llm_calls;
          ++result.stats.items_processed;
          if (list.skills.empty()) {
            ++result.stats.items_empty;
          } else {
            slots[i] = std::move(list);
            emit[i] = true;
          }
          checkpoint.mark(items[i].source_id);
        } catch (const Error& e) {
          if (e.category() == "auth-error") {
            std::lock_guard<std::mutex> lock(mu);
            aborted = true;
            abort_category = e.category();
            abort_what = e.what();
            return;
          }
          std::lock_guard<std::mutex> lock(mu);
          ++result.stats.llm_calls;
          ++result.stats.failures;
          // A garbage completion will not improve on retry: mark it done.
          // A transport failure is left unmarked so a resume retries it.
          if (e.category() == "extraction-error") checkpoint.mark(items[i].source_id);
        }
      }
    };

    const int n_threads = std::max(1, opts.endpoint->concurrency);
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(n_threads));
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (aborted) throw Error(abort_category, abort_what);
  }

  for (std::size_t i = 0; i < items.size(); ++i)
    if (emit[i]) result.lists.push_back(std::move(slots[i]));
  return result;
}

}  // namespace

std::string clean_mention(std::string_view raw) {
  std::string_view s = trim_view(raw);
  const auto edge_punct = [](char c) { return c == ',' || c == ';' || c == ':'; };
  for (;;) {
    const std::size_t before = s.size();
    while (!s.empty() && (edge_punct(s.front()) || is_ascii_space(s.front())))
      s.remove_prefix(1);
    while (!s.empty() && (edge_punct(s.back()) || is_ascii_space(s.back()))) s.remove_suffix(1);
    while (!s.empty() && s.back() == '.') s.remove_suffix(1);
    if (s.size() == before) break;
  }
  std::string out(s);
  std::replace(out.begin(), out.end(), '\n', ' ');
  std::replace(out.begin(), out.end(), '\r', ' ');
  return out;
}

std::vector<std::string> parse_completion(std::string_view completion) {
  std::vector<std::string> out;
  if (none_like(completion)) return out;
  std::string segment;
  const auto flush = [&] {
    push_mention(out, clean_mention(segment));
    segment.clear();
  };
  for (char c : completion) {
    if (c == ',' || c == '\n') {
      flush();
    } else {
      segment.push_back(c);
    }
  }
  flush();
  return out;
}

SkillList extract_skills_rule(const PatternMatch& m) {
  SkillList list;
  list.extractor = "rule";
  list.source_id = m.sentence.doc_id + ":" + std::to_string(m.sentence.index);
  for (const auto& part : split(m.x_text(), ','))
    emit_rule_segments(part, list.skills);
  return list;
}

void PromptTemplate::validate() const {
  if (shots.empty()) throw config_error("prompt template has no demonstration shots");
  if (placeholder.empty()) throw config_error("prompt template placeholder is empty");
  if (count_occurrences(query_format, placeholder) != 1)
    throw config_error("placeholder must occur exactly once in the query block");
  if (count_occurrences(shot_format, placeholder) != 0 ||
      count_occurrences(system, placeholder) != 0)
    throw config_error("placeholder may only appear in the query block");
  for (const auto& shot : shots)
    if (count_occurrences(shot.input, placeholder) != 0 ||
        count_occurrences(shot.output, placeholder) != 0)
      throw config_error("placeholder may only appear in the query block");
}

std::string PromptTemplate::assemble(std::string_view target) const {
  validate();
  std::string prompt;
  for (std::size_t i = 0; i < shots.size(); ++i) {
    if (i) prompt += "\n\n";
    prompt += render_format(shot_format, i + 1, shots[i].input, shots[i].output);
  }
  std::string query = render_format(query_format, shots.size() + 1, "", "");
  const std::size_t pos = query.find(placeholder);
  query.replace(pos, placeholder.size(), target);
  prompt += "\n\n";
  prompt += query;
  return prompt;
}

PromptTemplate PromptTemplate::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open prompt template: " + path);

  std::vector<std::pair<std::string, std::string>> sections;
  std::string line;
  std::string name;
  std::vector<std::string> body;
  const auto flush = [&] {
    if (name.empty()) return;
    while (!body.empty() && trim_view(body.back()).empty()) body.pop_back();
    sections.emplace_back(name, join(body, "\n"));
    body.clear();
  };
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.rfind("### ", 0) == 0) {
      flush();
      name = trim(std::string_view(line).substr(4));
      continue;
    }
    if (name.empty()) {
      // blank lines and '#' comments may precede the first section
      const auto head = trim_view(line);
      if (!head.empty() && head.front() != '#')
        throw parse_error(path + ": content before the first '### section' header");
      continue;
    }
    body.push_back(line);
  }
  flush();

  PromptTemplate tpl;
  std::string pending_input;
  bool have_input = false;
  for (auto& [key, value] : sections) {
    if (key == "system") {
      tpl.system = value;
    } else if (key == "shot_format") {
      tpl.shot_format = value;
    } else if (key == "query_format") {
      tpl.query_format = value;
    } else if (key == "placeholder") {
      tpl.placeholder = value;
    } else if (key == "shot_input") {
      if (have_input) throw parse_error(path + ": shot_input without matching shot_output");
      pending_input = value;
      have_input = true;
    } else if (key == "shot_output") {
      if (!have_input) throw parse_error(path + ": shot_output without preceding shot_input");
      tpl.shots.push_back({pending_input, value});
      have_input = false;
    } else {
      throw parse_error(path + ": unknown section '" + key + "'");
    }
  }
  if (have_input) throw parse_error(path + ": shot_input without matching shot_output");
  tpl.validate();
  return tpl;
}

SkillList extract_skills_llm(const std::string& text, const PromptTemplate& tpl,
                             LlmClient& client) {
  SkillList list;
  list.extractor = "llm";
  const std::string completion = client.complete(tpl.system, tpl.assemble(text));
  list.skills = parse_completion(completion);
  return list;
}

ExtractResult extract_corpus(const std::vector<PatternMatch>& matches,
                             const ExtractOptions& opts) {
  std::vector<WorkItem> items;
  items.reserve(matches.size());
  std::map<std::pair<std::string, std::size_t>, std::size_t> per_sentence_ordinal;
  for (const auto& m : matches) {
    const auto key = std::make_pair(m.sentence.doc_id, m.sentence.index);
    const std::size_t ordinal = per_sentence_ordinal[key]++;
    WorkItem item;
    item.source_id = m.sentence.doc_id + ":" + std::to_string(m.sentence.index) + ":" +
                     std::to_string(ordinal);
    item.text = m.sentence.text;
    item.match = &m;
    items.push_back(std::move(item));
  }
  return run_extraction(std::move(items), opts, /*allow_rule=*/true);
}

ExtractResult extract_corpus(const std::vector<JobAd>& ads, const ExtractOptions& opts) {
  std::vector<WorkItem> items;
  items.reserve(ads.size());
  for (const auto& ad : ads) {
    WorkItem item;
    item.source_id = ad.id;
    item.text = ad.text;
    items.push_back(std::move(item));
  }
  return run_extraction(std::move(items), opts, /*allow_rule=*/false);
}

std::string skill_list_to_json(const SkillList& list) {
  json j;
  j["source_id"] = list.source_id;
  j["extractor"] = list.extractor;
  j["skills"] = list.skills;
  return j.dump();
}

SkillList skill_list_from_json(const std::string& line) {
  json j = json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object() || !j.contains("source_id") ||
      !j.contains("extractor") || !j.contains("skills") || !j["skills"].is_array())
    throw parse_error("malformed skill list record: " + line);
  SkillList list;
  list.source_id = j["source_id"].get<std::string>();
  list.extractor = j["extractor"].get<std::string>();
  for (const auto& s : j["skills"]) {
    if (!s.is_string()) throw parse_error("non-string skill entry: " + line);
    list.skills.push_back(s.get<std::string>());
  }
  return list;
}

std::vector<SkillList> load_skill_lists(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open skill list file: " + path);
  std::vector<SkillList> lists;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim_view(line).empty()) continue;
    try {
      lists.push_back(skill_list_from_json(line));
    } catch (const Error& e) {
      throw parse_error(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return lists;
}

}  // namespace skillrel
