// Copyright 2026 The SBF Toolkit Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Text utilities: UTF-8 handling, case folding, the word tokenizer, and the
// canonical form used for group names and implied statements.

#ifndef SBF_TEXT_HPP
#define SBF_TEXT_HPP

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace sbf {

namespace utf8 {

inline constexpr char32_t kReplacement = 0xFFFD;

// Decodes UTF-8; malformed sequences become U+FFFD, one per bad byte.
inline std::u32string decode(std::string_view s) {
  std::u32string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    const auto b0 = static_cast<unsigned char>(s[i]);
    int len = 0;
    char32_t cp = 0;
    if (b0 < 0x80) {
      len = 1;
      cp = b0;
    } else if ((b0 & 0xE0) == 0xC0) {
      len = 2;
      cp = b0 & 0x1F;
    } else if ((b0 & 0xF0) == 0xE0) {
      len = 3;
      cp = b0 & 0x0F;
    } else if ((b0 & 0xF8) == 0xF0) {
      len = 4;
      cp = b0 & 0x07;
    } else {
      out.push_back(kReplacement);
      ++i;
      continue;
    }
    if (i + len > s.size()) {
      out.push_back(kReplacement);
      ++i;
      continue;
    }
    bool ok = true;
    for (int k = 1; k < len; ++k) {
      const auto b = static_cast<unsigned char>(s[i + k]);
      if ((b & 0xC0) != 0x80) {
        ok = false;
        break;
      }
      cp = (cp << 6) | (b & 0x3F);
    }
    // Reject overlong forms and surrogates.
    static constexpr std::array<char32_t, 5> kMin = {0, 0, 0x80, 0x800, 0x10000};
    if (!ok || cp < kMin[len] || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
      out.push_back(kReplacement);
      ++i;
      continue;
    }
    out.push_back(cp);
    i += len;
  }
  return out;
}

inline void append(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

inline std::string encode(std::u32string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char32_t cp : s) append(out, cp);
  return out;
}

}  // namespace utf8

namespace detail {

// Simple case folding for Latin, Greek and Cyrillic. Scripts without case
// pass through unchanged.
inline char32_t fold_case(char32_t c) {
  if (c >= U'A' && c <= U'Z') return c + 32;
  if (c < 0x80) return c;
  if ((c >= 0xC0 && c <= 0xDE) && c != 0xD7) return c + 32;
  if (c >= 0x100 && c <= 0x137 && (c % 2 == 0)) return c + 1;
  if (c >= 0x139 && c <= 0x148 && (c % 2 == 1)) return c + 1;
  if (c >= 0x14A && c <= 0x177 && (c % 2 == 0)) return c + 1;
  if (c == 0x178) return 0xFF;
  if (c >= 0x391 && c <= 0x3A9 && c != 0x3A2) return c + 32;
  if (c >= 0x410 && c <= 0x42F) return c + 32;
  if (c >= 0x400 && c <= 0x40F) return c + 80;
  return c;
}

// Compatibility mapping applied before tokenization: typographic quotes and
// dashes become ASCII, fullwidth forms become their ASCII counterparts,
// exotic spaces become U+0020, and zero-width characters are dropped
// (returned as 0).
inline char32_t compat_map(char32_t c) {
  switch (c) {
    case 0x2018: case 0x2019: case 0x201A: case 0x201B: case 0x2032:
      return U'\'';
    case 0x201C: case 0x201D: case 0x201E: case 0x201F: case 0x2033:
      return U'"';
    case 0x2010: case 0x2011: case 0x2012: case 0x2013: case 0x2014: case 0x2015:
      return U'-';
    case 0x2026:
      return U'.';
    case 0x00A0: case 0x1680: case 0x202F: case 0x205F: case 0x3000:
      return U' ';
    case 0x200B: case 0x200C: case 0x200D: case 0x2060: case 0xFEFF:
      return 0;
    default:
      break;
  }
  if (c >= 0x2000 && c <= 0x200A) return U' ';
  if (c >= 0xFF01 && c <= 0xFF5E) return c - 0xFEE0;
  return c;
}

inline bool is_space(char32_t c) {
  return c == U' ' || c == U'\t' || c == U'\n' || c == U'\r' || c == U'\v' || c == U'\f' ||
         c == 0x85 || c == 0x2028 || c == 0x2029;
}

// Punctuation and symbols each form a token of their own.
inline bool is_punct(char32_t c) {
  if (c < 0x80) {
    return (c >= 0x21 && c <= 0x2F) || (c >= 0x3A && c <= 0x40) || (c >= 0x5B && c <= 0x60) ||
           (c >= 0x7B && c <= 0x7E);
  }
  if (c >= 0xA1 && c <= 0xBF) return c != 0xAA && c != 0xB5 && c != 0xBA;
  if (c == 0xD7 || c == 0xF7) return true;
  if (c >= 0x2016 && c <= 0x205E) return true;
  if (c >= 0x20A0 && c <= 0x20CF) return true;  // currency
  if (c >= 0x2190 && c <= 0x2BFF) return true;  // arrows, math, dingbats
  if (c >= 0x3001 && c <= 0x303F) return true;
  if (c >= 0x1F000 && c <= 0x1FAFF) return true;  // emoji and pictographs
  return c == utf8::kReplacement;
}

}  // namespace detail

// Lowercases and applies the compatibility mapping to a UTF-8 string.
inline std::string normalize_text(std::string_view text) {
  std::u32string out;
  for (char32_t c : utf8::decode(text)) {
    const char32_t m = detail::compat_map(c);
    if (m != 0) out.push_back(detail::fold_case(m));
  }
  return utf8::encode(out);
}

// Splitting strategy used to turn text into model tokens.
class Tokenizer {
 public:
  virtual ~Tokenizer() = default;
  virtual std::vector<std::string> tokenize(std::string_view text) const = 0;
};

// Lowercased word tokenizer: whitespace separates tokens and every
// punctuation or symbol character is a token by itself.
class WordTokenizer final : public Tokenizer {
 public:
  std::vector<std::string> tokenize(std::string_view text) const override {
    std::vector<std::string> tokens;
    std::u32string current;
    auto flush = [&] {
      if (!current.empty()) {
        tokens.push_back(utf8::encode(current));
        current.clear();
      }
    };
    for (char32_t raw : utf8::decode(text)) {
      const char32_t c = detail::compat_map(raw);
      if (c == 0) continue;
      if (detail::is_space(c)) {
        flush();
      } else if (detail::is_punct(c)) {
        flush();
        tokens.push_back(utf8::encode(std::u32string(1, c)));
      } else {
        current.push_back(detail::fold_case(c));
      }
    }
    flush();
    return tokens;
  }
};

inline std::vector<std::string> tokenize(std::string_view text) {
  return WordTokenizer{}.tokenize(text);
}

inline std::string join(const std::vector<std::string>& parts, std::string_view sep = " ") {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out.append(sep);
    out.append(parts[i]);
  }
  return out;
}

// Canonical form for group names and statements: lowercase, trimmed,
// internal whitespace runs collapsed to a single space.
inline std::string normalize_phrase(std::string_view text) {
  std::u32string out;
  bool pending_space = false;
  for (char32_t raw : utf8::decode(text)) {
    const char32_t c = detail::compat_map(raw);
    if (c == 0) continue;
    if (detail::is_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(U' ');
    pending_space = false;
    out.push_back(detail::fold_case(c));
  }
  return utf8::encode(out);
}

// Literal control-token strings appearing in raw text are rewritten from
// "[SEP]" to "[\SEP]" so they can never be mistaken for markup.
inline std::string escape_control_tokens(std::string_view text) {
  static constexpr std::array<std::string_view, 13> kReserved = {
      "[STR]",   "[SEP]",  "[END]",   "[lewdY]", "[lewdN]", "[offY]", "[offN]",
      "[intY]",  "[intN]", "[grpY]",  "[grpN]",  "[ingY]",  "[ingN]"};
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    bool matched = false;
    if (text[i] == '[') {
      for (std::string_view tok : kReserved) {
        if (text.substr(i, tok.size()) == tok) {
          out.append("[\\");
          out.append(tok.substr(1));
          i += tok.size();
          matched = true;
          break;
        }
      }
    }
    if (!matched) out.push_back(text[i++]);
  }
  return out;
}

}  // namespace sbf

#endif  // SBF_TEXT_HPP
