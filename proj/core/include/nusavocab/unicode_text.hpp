#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace nusavocab::text {

struct CodePoint {
  char32_t value;
  std::size_t offset;  // byte offset into the source string
  std::size_t length;  // byte length of the encoded code point
};

bool is_valid_utf8(std::string_view s);

// Malformed sequences decode to U+FFFD, one byte at a time.
std::vector<CodePoint> code_points(std::string_view s);
std::size_t count_code_points(std::string_view s);

bool is_whitespace(char32_t c);
// Unicode general category P* (Pc, Pd, Ps, Pe, Pi, Pf, Po).
bool is_punctuation(char32_t c);
bool is_uppercase(char32_t c);

std::string to_nfc(std::string_view s);
std::string to_lower(std::string_view s);
// Title-cases the first code point, leaves the rest untouched.
std::string capitalize_first(std::string_view s);

std::vector<std::string_view> split_whitespace(std::string_view s);
// Whitespace runs become one ASCII space; leading/trailing whitespace removed.
std::string collapse_whitespace(std::string_view s);

}  // namespace nusavocab::text
