#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nusavocab/vocabulary.hpp"

namespace nusavocab {

enum class UnicodeNormalization { none, nfc };

struct TokenizerOptions {
  bool lowercase = true;
  UnicodeNormalization normalization = UnicodeNormalization::nfc;
  std::size_t max_chars_per_word = 100;
};

/// Greedy longest-match-first WordPiece tokenizer over a fixed vocabulary.
///
/// Immutable after construction; every member is const and safe to call from
/// many threads at once.
class TokenizerModel {
 public:
  explicit TokenizerModel(Vocabulary vocab, TokenizerOptions options = {});

  const Vocabulary& vocab() const noexcept { return vocab_; }
  const TokenizerOptions& options() const noexcept { return options_; }

  /// Normalizes, optionally lowercases, splits on whitespace and isolates each
  /// punctuation code point (category P*) as its own word.
  std::vector<std::string> normalize_and_pretokenize(std::string_view text) const;

  /// Splits one word into vocabulary pieces. The first piece is matched bare,
  /// later pieces with the continuation prefix. Words longer than
  /// max_chars_per_word code points, or with an unmatched position, become a
  /// single unk token.
  std::vector<std::string> tokenize_word(std::string_view word) const;

  std::vector<TokenId> encode(std::string_view text, bool add_specials) const;

  /// Drops special tokens, joins with single spaces and fuses prefixed pieces
  /// onto their predecessor. Throws DataError on an out-of-range id.
  std::string decode(std::span<const TokenId> ids) const;

 private:
  // Appends ids for one pre-tokenized word.
  void append_word_ids(std::string_view word, std::vector<TokenId>& out) const;

  Vocabulary vocab_;
  TokenizerOptions options_;
  std::size_t longest_token_bytes_ = 0;
};

}  // namespace nusavocab
