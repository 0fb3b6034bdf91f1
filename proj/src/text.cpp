#include "skillrel/text.hpp"

#include <array>

namespace skillrel {

std::string to_lower_ascii(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

std::string_view trim_view(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && is_ascii_space(s[b])) ++b;
  while (e > b && is_ascii_space(s[e - 1])) --e;
  return s.substr(b, e - b);
}

std::vector<std::string> split(std::string_view s, char delim) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == delim) {
      out.emplace_back(s.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

std::vector<TokenSpan> alpha_tokens(std::string_view s) {
  std::vector<TokenSpan> out;
  std::size_t i = 0;
  while (i < s.size()) {
    if (!is_ascii_alpha(s[i])) {
      ++i;
      continue;
    }
    std::size_t b = i;
    while (i < s.size() && is_ascii_alpha(s[i])) ++i;
    out.push_back({b, i, std::string(s.substr(b, i - b))});
  }
  return out;
}

std::uint32_t decode_utf8(std::string_view s, std::size_t& i) {
  const auto byte = [&](std::size_t k) { return static_cast<unsigned char>(s[k]); };
  const unsigned char c0 = byte(i);
  if (c0 < 0x80) {
    ++i;
    return c0;
  }
  auto cont = [&](std::size_t k) { return k < s.size() && (byte(k) & 0xC0) == 0x80; };
  if ((c0 & 0xE0) == 0xC0 && cont(i + 1)) {
    std::uint32_t cp = (c0 & 0x1Fu) << 6 | (byte(i + 1) & 0x3Fu);
    i += 2;
    return cp;
  }
  if ((c0 & 0xF0) == 0xE0 && cont(i + 1) && cont(i + 2)) {
    std::uint32_t cp = (c0 & 0x0Fu) << 12 | (byte(i + 1) & 0x3Fu) << 6 | (byte(i + 2) & 0x3Fu);
    i += 3;
    return cp;
  }
  if ((c0 & 0xF8) == 0xF0 && cont(i + 1) && cont(i + 2) && cont(i + 3)) {
    std::uint32_t cp = (c0 & 0x07u) << 18 | (byte(i + 1) & 0x3Fu) << 12 |
                       (byte(i + 2) & 0x3Fu) << 6 | (byte(i + 3) & 0x3Fu);
    i += 4;
    return cp;
  }
  ++i;
  return c0;
}

void append_utf8(std::string& out, std::uint32_t cp) {
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
}

namespace {

struct Composition {
  char base;
  std::uint32_t mark;
  std::uint32_t composed;
};

// Combining marks: 0x300 grave, 0x301 acute, 0x302 circumflex, 0x303 tilde,
// 0x308 diaeresis, 0x30A ring, 0x327 cedilla.
constexpr std::array<Composition, 58> kCompositions = {{
    {'a', 0x300, 0xE0},  {'a', 0x301, 0xE1},  {'a', 0x302, 0xE2},  {'a', 0x303, 0xE3},
    {'a', 0x308, 0xE4},  {'a', 0x30A, 0xE5},  {'e', 0x300, 0xE8},  {'e', 0x301, 0xE9},
    {'e', 0x302, 0xEA},  {'e', 0x308, 0xEB},  {'i', 0x300, 0xEC},  {'i', 0x301, 0xED},
    {'i', 0x302, 0xEE},  {'i', 0x308, 0xEF},  {'o', 0x300, 0xF2},  {'o', 0x301, 0xF3},
    {'o', 0x302, 0xF4},  {'o', 0x303, 0xF5},  {'o', 0x308, 0xF6},  {'u', 0x300, 0xF9},
    {'u', 0x301, 0xFA},  {'u', 0x302, 0xFB},  {'u', 0x308, 0xFC},  {'y', 0x301, 0xFD},
    {'y', 0x308, 0xFF},  {'n', 0x303, 0xF1},  {'c', 0x327, 0xE7},
    {'A', 0x300, 0xC0},  {'A', 0x301, 0xC1},  {'A', 0x302, 0xC2},  {'A', 0x303, 0xC3},
    {'A', 0x308, 0xC4},  {'A', 0x30A, 0xC5},  {'E', 0x300, 0xC8},  {'E', 0x301, 0xC9},
    {'E', 0x302, 0xCA},  {'E', 0x308, 0xCB},  {'I', 0x300, 0xCC},  {'I', 0x301, 0xCD},
    {'I', 0x302, 0xCE},  {'I', 0x308, 0xCF},  {'O', 0x300, 0xD2},  {'O', 0x301, 0xD3},
    {'O', 0x302, 0xD4},  {'O', 0x303, 0xD5},  {'O', 0x308, 0xD6},  {'U', 0x300, 0xD9},
    {'U', 0x301, 0xDA},  {'U', 0x302, 0xDB},  {'U', 0x308, 0xDC},  {'Y', 0x301, 0xDD},
    {'N', 0x303, 0xD1},  {'C', 0x327, 0xC7},
    // s/z with caron for the odd Slavic loanword
    {'s', 0x30C, 0x161}, {'S', 0x30C, 0x160}, {'z', 0x30C, 0x17E}, {'Z', 0x30C, 0x17D},
}};

bool find_composed(char base, std::uint32_t mark, std::uint32_t& composed) {
  for (const auto& c : kCompositions) {
    if (c.base == base && c.mark == mark) {
      composed = c.composed;
      return true;
    }
  }
  return false;
}

}  // namespace

std::string nfc_latin(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    const char c = s[i];
    if (static_cast<unsigned char>(c) < 0x80) {
      std::size_t j = i + 1;
      if (j < s.size() && static_cast<unsigned char>(s[j]) >= 0xCC) {
        std::size_t k = j;
        const std::uint32_t mark = decode_utf8(s, k);
        std::uint32_t composed = 0;
        if (mark >= 0x300 && mark <= 0x36F && find_composed(c, mark, composed)) {
          append_utf8(out, composed);
          i = k;
          continue;
        }
      }
      out += c;
      ++i;
      continue;
    }
    std::size_t k = i;
    const std::uint32_t cp = decode_utf8(s, k);
    append_utf8(out, cp);
    i = k;
  }
  return out;
}

}  // namespace skillrel
