#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace skillrel {

inline bool is_ascii_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }
inline bool is_ascii_digit(char c) { return c >= '0' && c <= '9'; }
inline bool is_ascii_alnum(char c) { return is_ascii_alpha(c) || is_ascii_digit(c); }
inline bool is_ascii_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

std::string to_lower_ascii(std::string_view s);

std::string_view trim_view(std::string_view s);
inline std::string trim(std::string_view s) { return std::string(trim_view(s)); }

// Split keeping empty segments; callers trim and drop as needed.
std::vector<std::string> split(std::string_view s, char delim);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

// A word token with its [begin, end) byte offsets in the source string.
struct TokenSpan {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::string text;
};

// Maximal [A-Za-z]+ runs.
std::vector<TokenSpan> alpha_tokens(std::string_view s);

// Reads one UTF-8 codepoint starting at i and advances i past it.
// Malformed bytes are returned as-is (one byte, Latin-1 style) so offsets
// never stall.
std::uint32_t decode_utf8(std::string_view s, std::size_t& i);
void append_utf8(std::string& out, std::uint32_t cp);

// Composes ASCII letter + combining diacritic into the precomposed Latin
// codepoint where one exists. Practical subset of NFC for this corpus
// domain; everything else passes through untouched.
std::string nfc_latin(std::string_view s);

}  // namespace skillrel
