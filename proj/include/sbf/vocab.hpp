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

#ifndef SBF_VOCAB_HPP
#define SBF_VOCAB_HPP

#include <array>
#include <cstdint>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "sbf/error.hpp"
#include "sbf/frame.hpp"

namespace sbf {

using TokenId = std::uint32_t;

inline constexpr std::string_view kStartToken = "[STR]";
inline constexpr std::string_view kSepToken = "[SEP]";
inline constexpr std::string_view kEndToken = "[END]";
inline constexpr std::string_view kUnkToken = "[UNK]";

// Class token for a variable value, e.g. ("offensive", true) -> "[offY]".
inline std::string_view class_token(Variable v, bool positive) {
  static constexpr std::array<std::array<std::string_view, 2>, kNumVariables> kTokens = {{
      {"[offN]", "[offY]"},
      {"[intN]", "[intY]"},
      {"[lewdN]", "[lewdY]"},
      {"[grpN]", "[grpY]"},
      {"[ingN]", "[ingY]"},
  }};
  return kTokens[static_cast<std::size_t>(v)][positive ? 1 : 0];
}

struct ClassTokenInfo {
  Variable variable;
  bool positive;
};

inline std::optional<ClassTokenInfo> class_token_info(std::string_view token) {
  for (Variable v : kAllVariables) {
    for (bool b : {false, true}) {
      if (class_token(v, b) == token) return ClassTokenInfo{v, b};
    }
  }
  return std::nullopt;
}

// Token inventory. Reserved tokens occupy the first ids in a fixed order:
// [STR] [SEP] [END] [UNK], then the ten class tokens; word tokens follow in
// the order given at construction.
class Vocab {
 public:
  static constexpr TokenId kStart = 0;
  static constexpr TokenId kSep = 1;
  static constexpr TokenId kEnd = 2;
  static constexpr TokenId kUnk = 3;
  static constexpr std::size_t kNumReserved = 14;

  Vocab() : Vocab(std::vector<std::string>{}) {}

  explicit Vocab(const std::vector<std::string>& words) {
    for (auto t : reserved_tokens()) add(std::string(t));
    for (const auto& w : words) {
      if (is_reserved_string(w)) {
        throw InvalidArgument("word token '" + w + "' collides with a reserved token");
      }
      if (w.empty()) throw InvalidArgument("empty word token");
      if (!index_.count(w)) add(w);
    }
  }

  // Vocabulary over every token seen, words sorted for reproducibility.
  template <class Sequences>
  static Vocab from_sequences(const Sequences& sequences) {
    std::set<std::string> words;
    for (const auto& seq : sequences) {
      for (const auto& tok : seq) {
        if (!is_reserved_string(tok)) words.insert(tok);
      }
    }
    return Vocab(std::vector<std::string>(words.begin(), words.end()));
  }

  static const std::array<std::string_view, kNumReserved>& reserved_tokens() {
    static const std::array<std::string_view, kNumReserved> kReserved = {
        kStartToken, kSepToken, kEndToken, kUnkToken, "[lewdY]", "[lewdN]", "[offY]",
        "[offN]", "[intY]", "[intN]", "[grpY]", "[grpN]", "[ingY]", "[ingN]"};
    return kReserved;
  }

  static bool is_reserved_string(std::string_view t) {
    for (auto r : reserved_tokens()) {
      if (r == t) return true;
    }
    return false;
  }

  std::size_t size() const { return tokens_.size(); }
  const std::string& token(TokenId id) const { return tokens_.at(id); }
  std::optional<TokenId> find(std::string_view token) const {
    const auto it = index_.find(std::string(token));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }
  TokenId id_or_unk(std::string_view token) const { return find(token).value_or(kUnk); }
  TokenId class_id(Variable v, bool positive) const { return *find(class_token(v, positive)); }
  bool is_reserved(TokenId id) const { return id < kNumReserved; }
  bool is_word(TokenId id) const { return id >= kNumReserved && id < tokens_.size(); }

  std::vector<TokenId> encode(const std::vector<std::string>& tokens) const {
    std::vector<TokenId> out;
    out.reserve(tokens.size());
    for (const auto& t : tokens) out.push_back(id_or_unk(t));
    return out;
  }

  std::vector<std::string> decode(const std::vector<TokenId>& ids) const {
    std::vector<std::string> out;
    out.reserve(ids.size());
    for (TokenId id : ids) out.push_back(token(id));
    return out;
  }

  std::vector<std::string> words() const {
    return {tokens_.begin() + kNumReserved, tokens_.end()};
  }

  // File layout, newline-delimited:
  //   #sbf-vocab 1
  //   #reserved 14
  //   <14 reserved tokens>
  //   #words <count>
  //   <count word tokens>
  void write(std::ostream& out) const {
    out << "#sbf-vocab 1\n#reserved " << kNumReserved << "\n";
    for (std::size_t i = 0; i < kNumReserved; ++i) out << tokens_[i] << "\n";
    out << "#words " << (tokens_.size() - kNumReserved) << "\n";
    for (std::size_t i = kNumReserved; i < tokens_.size(); ++i) out << tokens_[i] << "\n";
  }

  static Vocab read(std::istream& in) {
    std::string line;
    auto next = [&]() -> std::string {
      if (!std::getline(in, line)) throw IoError("vocab: unexpected end of file");
      if (!line.empty() && line.back() == '\r') line.pop_back();
      return line;
    };
    if (next() != "#sbf-vocab 1") throw IoError("vocab: bad magic line");
    if (next() != "#reserved " + std::to_string(kNumReserved)) {
      throw IoError("vocab: bad reserved-token header");
    }
    for (std::size_t i = 0; i < kNumReserved; ++i) {
      if (next() != reserved_tokens()[i]) throw IoError("vocab: reserved block mismatch");
    }
    const std::string words_header = next();
    if (words_header.rfind("#words ", 0) != 0) throw IoError("vocab: missing #words header");
    const std::size_t count = std::stoull(words_header.substr(7));
    std::vector<std::string> words;
    words.reserve(count);
    for (std::size_t i = 0; i < count; ++i) words.push_back(next());
    return Vocab(words);
  }

  friend bool operator==(const Vocab& a, const Vocab& b) { return a.tokens_ == b.tokens_; }

 private:
  void add(std::string t) {
    index_.emplace(t, static_cast<TokenId>(tokens_.size()));
    tokens_.push_back(std::move(t));
  }

  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> index_;
};

}  // namespace sbf

#endif  // SBF_VOCAB_HPP
