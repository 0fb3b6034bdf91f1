#include "skillrel/corpus.hpp"

#include <array>

#include "json.hpp"
#include "skillrel/error.hpp"
#include "skillrel/text.hpp"

namespace skillrel {

namespace {

using nlohmann::json;

// Tokens whose trailing period must not end a sentence. Compared
// case-insensitively; several of these are group-2 pattern triggers and
// have to survive segmentation intact.
constexpr std::array<std::string_view, 7> kAbbreviations = {
    "e.g.", "i.e.", "etc.", "vs.", "inc.", "sr.", "jr.",
};

bool matches_guard_at(const std::string& text, std::size_t dot_pos) {
  for (std::string_view g : kAbbreviations) {
    for (std::size_t q = 0; q < g.size(); ++q) {
      if (g[q] != '.') continue;
      if (dot_pos < q) continue;
      const std::size_t start = dot_pos - q;
      if (start + g.size() > text.size()) continue;
      bool equal = true;
      for (std::size_t k = 0; k < g.size(); ++k) {
        char c = text[start + k];
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
        if (c != g[k]) {
          equal = false;
          break;
        }
      }
      if (!equal) continue;
      if (start > 0 && is_ascii_alnum(text[start - 1])) continue;
      return true;
    }
  }
  return false;
}

bool is_bullet(std::uint32_t cp) {
  switch (cp) {
    case '*':
    case 0x2022:  // bullet
    case 0x2023:  // triangular bullet
    case 0x25CF:  // black circle
    case 0x25AA:  // black small square
    case 0x25E6:  // white bullet
    case 0x00B7:  // middle dot
      return true;
    default:
      return false;
  }
}

constexpr std::size_t kMinSentenceChars = 3;

void emit_segment(const JobAd& ad, std::size_t begin, std::size_t end,
                  std::vector<Sentence>& out) {
  while (begin < end && is_ascii_space(ad.text[begin])) ++begin;
  while (end > begin && is_ascii_space(ad.text[end - 1])) --end;
  if (end - begin < kMinSentenceChars) return;
  Sentence s;
  s.doc_id = ad.id;
  s.index = out.size();
  s.start = begin;
  s.end = end;
  s.text = ad.text.substr(begin, end - begin);
  out.push_back(std::move(s));
}

}  // namespace

CorpusReader::CorpusReader(const std::string& path) : in_(path), path_(path) {
  if (!in_) throw io_error("cannot open corpus file: " + path);
}

std::optional<JobAd> CorpusReader::next() {
  std::string line;
  while (std::getline(in_, line)) {
    ++stats_.lines_total;
    const auto skip = [&](const std::string& why) {
      ++stats_.lines_skipped;
      stats_.errors.push_back(path_ + ":" + std::to_string(stats_.lines_total) + ": " + why);
    };
    json rec = json::parse(line, nullptr, false);
    if (rec.is_discarded() || !rec.is_object() || !rec.contains("id") ||
        !rec.contains("text") || !rec["id"].is_string() || !rec["text"].is_string()) {
      skip("malformed record");
      continue;
    }
    JobAd ad;
    ad.id = rec["id"].get<std::string>();
    ad.text = trim(nfc_latin(rec["text"].get<std::string>()));
    if (ad.id.empty()) {
      skip("empty id");
      continue;
    }
    if (ad.text.empty()) {
      skip("empty text");
      continue;
    }
    if (!seen_ids_.insert(ad.id).second) {
      skip("duplicate id '" + ad.id + "'");
      continue;
    }
    ++stats_.ads_loaded;
    return ad;
  }
  return std::nullopt;
}

std::vector<JobAd> load_corpus(const std::string& path, LoadStats* stats) {
  CorpusReader reader(path);
  std::vector<JobAd> ads;
  while (auto ad = reader.next()) ads.push_back(std::move(*ad));
  if (stats) *stats = reader.stats();
  return ads;
}

std::vector<Sentence> segment_sentences(const JobAd& ad) {
  std::vector<Sentence> out;
  const std::string& text = ad.text;
  std::size_t seg_start = 0;
  std::size_t i = 0;
  while (i < text.size()) {
    const char c = text[i];
    if (c == '.' || c == '!' || c == '?') {
      if (c == '.' && matches_guard_at(text, i)) {
        ++i;
        continue;
      }
      emit_segment(ad, seg_start, i + 1, out);  // delimiter stays with the sentence
      ++i;
      seg_start = i;
      continue;
    }
    if (c == '\n' || c == '\r') {
      emit_segment(ad, seg_start, i, out);
      ++i;
      seg_start = i;
      continue;
    }
    std::size_t next = i;
    const std::uint32_t cp = decode_utf8(text, next);
    if (is_bullet(cp)) {
      emit_segment(ad, seg_start, i, out);
      seg_start = next;
    }
    i = next;
  }
  emit_segment(ad, seg_start, text.size(), out);
  return out;
}

std::string sentence_to_json(const Sentence& s) {
  json j;
  j["doc_id"] = s.doc_id;
  j["index"] = s.index;
  j["start"] = s.start;
  j["end"] = s.end;
  j["text"] = s.text;
  return j.dump();
}

}  // namespace skillrel
