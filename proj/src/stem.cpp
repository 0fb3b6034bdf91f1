#include "skillrel/stem.hpp"

#include <array>

namespace skillrel {

namespace {

bool cons(const std::string& w, std::size_t i) {
  switch (w[i]) {
    case 'a':
    case 'e':
    case 'i':
    case 'o':
    case 'u':
      return false;
    case 'y':
      return i == 0 ? true : !cons(w, i - 1);
    default:
      return true;
  }
}

// Measure m of w[0, len): number of VC sequences in [C](VC){m}[V].
int measure(const std::string& w, std::size_t len) {
  int m = 0;
  std::size_t i = 0;
  while (i < len && cons(w, i)) ++i;
  for (;;) {
    while (i < len && !cons(w, i)) ++i;
    if (i >= len) return m;
    ++m;
    while (i < len && cons(w, i)) ++i;
    if (i >= len) return m;
  }
}

bool has_vowel(const std::string& w, std::size_t len) {
  for (std::size_t i = 0; i < len; ++i)
    if (!cons(w, i)) return true;
  return false;
}

bool ends_double_cons(const std::string& w) {
  const std::size_t n = w.size();
  return n >= 2 && w[n - 1] == w[n - 2] && cons(w, n - 1);
}

// *o: stem ends cvc where the final c is not w, x or y.
bool ends_cvc(const std::string& w, std::size_t len) {
  if (len < 3) return false;
  if (!cons(w, len - 3) || cons(w, len - 2) || !cons(w, len - 1)) return false;
  const char c = w[len - 1];
  return c != 'w' && c != 'x' && c != 'y';
}

bool ends(const std::string& w, std::string_view suf) {
  return w.size() >= suf.size() && w.compare(w.size() - suf.size(), suf.size(), suf) == 0;
}

void replace_suffix(std::string& w, std::size_t suf_len, std::string_view repl) {
  w.resize(w.size() - suf_len);
  w += repl;
}

void step1a(std::string& w) {
  if (ends(w, "sses")) {
    w.resize(w.size() - 2);
  } else if (ends(w, "ies")) {
    w.resize(w.size() - 2);
  } else if (ends(w, "ss")) {
    // keep
  } else if (ends(w, "s")) {
    w.resize(w.size() - 1);
  }
}

void step1b(std::string& w) {
  bool fixup = false;
  if (ends(w, "eed")) {
    if (measure(w, w.size() - 3) > 0) w.resize(w.size() - 1);
  } else if (ends(w, "ed") && has_vowel(w, w.size() - 2)) {
    w.resize(w.size() - 2);
    fixup = true;
  } else if (ends(w, "ing") && has_vowel(w, w.size() - 3)) {
    w.resize(w.size() - 3);
    fixup = true;
  }
  if (!fixup) return;
  if (ends(w, "at") || ends(w, "bl") || ends(w, "iz")) {
    w += 'e';
  } else if (ends_double_cons(w)) {
    const char c = w.back();
    if (c != 'l' && c != 's' && c != 'z') w.resize(w.size() - 1);
  } else if (measure(w, w.size()) == 1 && ends_cvc(w, w.size())) {
    w += 'e';
  }
}

void step1c(std::string& w) {
  if (ends(w, "y") && has_vowel(w, w.size() - 1)) w.back() = 'i';
}

struct Rule {
  std::string_view suffix;
  std::string_view repl;
};

// Ordered longest-first; the first suffix that matches is the step's only
// candidate and its condition gates the rewrite, with no fall-through.
constexpr std::array<Rule, 21> kStep2 = {{
    {"ational", "ate"}, {"ization", "ize"}, {"iveness", "ive"}, {"fulness", "ful"},
    {"ousness", "ous"}, {"tional", "tion"}, {"biliti", "ble"},  {"alism", "al"},
    {"aliti", "al"},    {"iviti", "ive"},   {"ousli", "ous"},   {"entli", "ent"},
    {"ation", "ate"},   {"enci", "ence"},   {"anci", "ance"},   {"izer", "ize"},
    {"alli", "al"},     {"logi", "log"},    {"ator", "ate"},    {"bli", "ble"},
    {"eli", "e"},
}};

constexpr std::array<Rule, 7> kStep3 = {{
    {"icate", "ic"}, {"ative", ""}, {"alize", "al"}, {"iciti", "ic"},
    {"ical", "ic"},  {"ness", ""},  {"ful", ""},
}};

template <std::size_t N>
void apply_m_gt0(std::string& w, const std::array<Rule, N>& rules) {
  for (const Rule& r : rules) {
    if (ends(w, r.suffix)) {
      if (measure(w, w.size() - r.suffix.size()) > 0)
        replace_suffix(w, r.suffix.size(), r.repl);
      return;
    }
  }
}

// "enc"/"anc" are the local extension described in stem.hpp.
constexpr std::array<std::string_view, 21> kStep4 = {
    "ement", "ance", "ence", "able", "ible", "ment", "ant", "ent", "ion", "ism", "ate",
    "iti",   "ous",  "ive",  "ize",  "enc",  "anc",  "al",  "er",  "ic",  "ou",
};

void step4(std::string& w) {
  for (std::string_view suf : kStep4) {
    if (!ends(w, suf)) continue;
    if (suf == "ion") {
      const std::size_t stem_len = w.size() - 3;
      if (stem_len == 0) return;
      const char pre = w[stem_len - 1];
      if (pre != 's' && pre != 't') continue;  // not the -sion/-tion rule
      if (measure(w, stem_len) > 1) w.resize(stem_len);
      return;
    }
    if (measure(w, w.size() - suf.size()) > 1) w.resize(w.size() - suf.size());
    return;
  }
}

void step5a(std::string& w) {
  if (!ends(w, "e")) return;
  const int m = measure(w, w.size() - 1);
  if (m > 1 || (m == 1 && !ends_cvc(w, w.size() - 1))) w.resize(w.size() - 1);
}

void step5b(std::string& w) {
  if (w.back() == 'l' && ends_double_cons(w) && measure(w, w.size()) > 1)
    w.resize(w.size() - 1);
}

}  // namespace

std::string porter_stem(std::string_view word) {
  std::string w(word);
  if (w.size() <= 2) return w;
  step1a(w);
  if (!w.empty()) step1b(w);
  if (!w.empty()) step1c(w);
  apply_m_gt0(w, kStep2);
  apply_m_gt0(w, kStep3);
  step4(w);
  if (!w.empty()) step5a(w);
  if (!w.empty()) step5b(w);
  return w;
}

}  // namespace skillrel
