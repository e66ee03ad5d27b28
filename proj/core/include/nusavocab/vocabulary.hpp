#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace nusavocab {

using TokenId = std::uint32_t;

struct SpecialTokens {
  std::string pad = "[PAD]";
  std::string unk = "[UNK]";
  std::string cls = "[CLS]";
  std::string sep = "[SEP]";
  std::string mask = "[MASK]";

  static constexpr std::size_t kCount = 5;

  // Fixed order: pad, unk, cls, sep, mask.
  std::array<std::string_view, kCount> all() const { return {pad, unk, cls, sep, mask}; }
  bool contains(std::string_view token) const;

  friend bool operator==(const SpecialTokens&, const SpecialTokens&) = default;
};

/// Ordered token list with a bijective token <-> id map.
///
/// Ids are contiguous 0..size()-1 and equal to the position in the list, which
/// is also the line number in a BERT-style vocab.txt. Construction validates
/// that tokens are unique and non-empty and that all five special tokens are
/// present; violations throw DataError naming the token.
class Vocabulary {
 public:
  explicit Vocabulary(std::vector<std::string> tokens, SpecialTokens specials = {},
                      std::string continuation_prefix = "##");

  std::size_t size() const noexcept { return tokens_.size(); }
  std::span<const std::string> tokens() const noexcept { return tokens_; }
  const std::string& token(TokenId id) const { return tokens_.at(id); }

  std::optional<TokenId> find(std::string_view token) const;
  bool contains(std::string_view token) const { return find(token).has_value(); }

  const SpecialTokens& specials() const noexcept { return specials_; }
  const std::string& continuation_prefix() const noexcept { return prefix_; }

  TokenId pad_id() const noexcept { return special_ids_[0]; }
  TokenId unk_id() const noexcept { return special_ids_[1]; }
  TokenId cls_id() const noexcept { return special_ids_[2]; }
  TokenId sep_id() const noexcept { return special_ids_[3]; }
  TokenId mask_id() const noexcept { return special_ids_[4]; }
  bool is_special(TokenId id) const noexcept;
  // Special ids sorted ascending.
  std::array<TokenId, SpecialTokens::kCount> special_ids() const;

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
    return a.tokens_ == b.tokens_ && a.specials_ == b.specials_ && a.prefix_ == b.prefix_;
  }

 private:
  struct StringHash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const noexcept {
      return std::hash<std::string_view>{}(s);
    }
  };

  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId, StringHash, std::equal_to<>> index_;
  SpecialTokens specials_;
  std::string prefix_;
  std::array<TokenId, SpecialTokens::kCount> special_ids_{};
};

/// vocab.txt: UTF-8, one token per line, line number (0-based) = id.
/// A single trailing newline is accepted; duplicate or empty lines are
/// rejected with the offending line number.
Vocabulary parse_vocab_text(std::string_view content, SpecialTokens specials = {},
                            std::string continuation_prefix = "##");
Vocabulary load_vocab_file(const std::filesystem::path& path, SpecialTokens specials = {},
                           std::string continuation_prefix = "##");
std::string to_vocab_text(const Vocabulary& vocab);

}  // namespace nusavocab
