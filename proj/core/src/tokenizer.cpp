#include "nusavocab/tokenizer.hpp"

#include <algorithm>

#include "nusavocab/error.hpp"
#include "nusavocab/unicode_text.hpp"

namespace nusavocab {

TokenizerModel::TokenizerModel(Vocabulary vocab, TokenizerOptions options)
    : vocab_(std::move(vocab)), options_(options) {
  if (options_.max_chars_per_word < 1) throw DataError("max_chars_per_word must be >= 1");
  for (const std::string& token : vocab_.tokens()) {
    longest_token_bytes_ = std::max(longest_token_bytes_, token.size());
  }
}

std::vector<std::string> TokenizerModel::normalize_and_pretokenize(std::string_view text) const {
  std::string buffer;
  std::string_view view = text;
  if (options_.normalization == UnicodeNormalization::nfc) {
    buffer = text::to_nfc(view);
    view = buffer;
  }
  if (options_.lowercase) {
    buffer = text::to_lower(view);
    view = buffer;
  }

  std::vector<std::string> words;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) {
      words.push_back(std::move(current));
      current.clear();
    }
  };
  for (const text::CodePoint& cp : text::code_points(view)) {
    const std::string_view bytes = view.substr(cp.offset, cp.length);
    if (text::is_whitespace(cp.value)) {
      flush();
    } else if (text::is_punctuation(cp.value)) {
      flush();
      words.emplace_back(bytes);
    } else {
      current.append(bytes);
    }
  }
  flush();
  return words;
}

void TokenizerModel::append_word_ids(std::string_view word, std::vector<TokenId>& out) const {
  const std::vector<text::CodePoint> cps = text::code_points(word);
  if (cps.size() > options_.max_chars_per_word) {
    out.push_back(vocab_.unk_id());
    return;
  }
  const std::string& prefix = vocab_.continuation_prefix();
  const std::size_t mark = out.size();
  std::string candidate;
  std::size_t start = 0;
  while (start < cps.size()) {
    const std::size_t start_byte = cps[start].offset;
    std::optional<TokenId> match;
    std::size_t end = cps.size();
    for (; end > start; --end) {
      const std::size_t end_byte = end == cps.size() ? word.size() : cps[end].offset;
      const std::size_t piece_bytes = end_byte - start_byte + (start > 0 ? prefix.size() : 0);
      if (piece_bytes > longest_token_bytes_) continue;
      candidate.clear();
      if (start > 0) candidate = prefix;
      candidate.append(word.substr(start_byte, end_byte - start_byte));
      match = vocab_.find(candidate);
      if (match) break;
    }
    if (!match) {
      out.resize(mark);
      out.push_back(vocab_.unk_id());
      return;
    }
    out.push_back(*match);
    start = end;
  }
}

std::vector<std::string> TokenizerModel::tokenize_word(std::string_view word) const {
  std::vector<TokenId> ids;
  append_word_ids(word, ids);
  std::vector<std::string> pieces;
  pieces.reserve(ids.size());
  for (TokenId id : ids) pieces.push_back(vocab_.token(id));
  return pieces;
}

std::vector<TokenId> TokenizerModel::encode(std::string_view text, bool add_specials) const {
  std::vector<TokenId> ids;
  if (add_specials) ids.push_back(vocab_.cls_id());
  for (const std::string& word : normalize_and_pretokenize(text)) append_word_ids(word, ids);
  if (add_specials) ids.push_back(vocab_.sep_id());
  return ids;
}

std::string TokenizerModel::decode(std::span<const TokenId> ids) const {
  const std::string& prefix = vocab_.continuation_prefix();
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] >= vocab_.size()) {
      throw DataError("decode: id " + std::to_string(ids[i]) + " at position " + std::to_string(i) +
                      " is out of range for vocabulary of size " + std::to_string(vocab_.size()));
    }
    if (vocab_.is_special(ids[i])) continue;
    std::string_view token = vocab_.token(ids[i]);
    if (!out.empty() && token.starts_with(prefix)) {
      out.append(token.substr(prefix.size()));
    } else {
      if (!out.empty()) out.push_back(' ');
      out.append(token);
    }
  }
  return out;
}

}  // namespace nusavocab
