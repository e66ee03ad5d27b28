#include "nusavocab/vocabulary.hpp"

#include <algorithm>
#include <limits>

#include "nusavocab/error.hpp"
#include "nusavocab/io.hpp"

namespace nusavocab {

bool SpecialTokens::contains(std::string_view token) const {
  for (std::string_view s : all()) {
    if (s == token) return true;
  }
  return false;
}

Vocabulary::Vocabulary(std::vector<std::string> tokens, SpecialTokens specials,
                       std::string continuation_prefix)
    : tokens_(std::move(tokens)), specials_(std::move(specials)), prefix_(std::move(continuation_prefix)) {
  if (tokens_.size() > std::numeric_limits<TokenId>::max()) {
    throw DataError("vocabulary too large");
  }
  if (prefix_.empty()) throw DataError("continuation prefix must not be empty");
  index_.reserve(tokens_.size());
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (tokens_[i].empty()) throw DataError("empty token at id " + std::to_string(i));
    auto [it, inserted] = index_.emplace(tokens_[i], static_cast<TokenId>(i));
    if (!inserted) {
      throw DataError("duplicate token '" + tokens_[i] + "' at ids " + std::to_string(it->second) +
                      " and " + std::to_string(i));
    }
  }
  const auto names = specials_.all();
  for (std::size_t k = 0; k < names.size(); ++k) {
    for (std::size_t j = 0; j < k; ++j) {
      if (names[j] == names[k]) throw DataError("special token '" + std::string(names[k]) + "' repeated");
    }
    auto it = index_.find(names[k]);
    if (it == index_.end()) {
      throw DataError("special token '" + std::string(names[k]) + "' missing from vocabulary");
    }
    special_ids_[k] = it->second;
  }
}

std::optional<TokenId> Vocabulary::find(std::string_view token) const {
  auto it = index_.find(token);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

bool Vocabulary::is_special(TokenId id) const noexcept {
  return std::find(special_ids_.begin(), special_ids_.end(), id) != special_ids_.end();
}

std::array<TokenId, SpecialTokens::kCount> Vocabulary::special_ids() const {
  auto ids = special_ids_;
  std::sort(ids.begin(), ids.end());
  return ids;
}

Vocabulary parse_vocab_text(std::string_view content, SpecialTokens specials,
                            std::string continuation_prefix) {
  std::vector<std::string> tokens;
  std::unordered_map<std::string_view, std::size_t> seen;
  std::size_t pos = 0;
  std::size_t line = 0;
  while (pos < content.size()) {
    std::size_t end = content.find('\n', pos);
    if (end == std::string_view::npos) end = content.size();
    std::string_view token = content.substr(pos, end - pos);
    if (!token.empty() && token.back() == '\r') token.remove_suffix(1);
    if (token.empty()) throw DataError("vocab line " + std::to_string(line) + ": empty token");
    auto [it, inserted] = seen.emplace(token, line);
    if (!inserted) {
      throw DataError("vocab line " + std::to_string(line) + ": duplicate of line " +
                      std::to_string(it->second) + " ('" + std::string(token) + "')");
    }
    tokens.emplace_back(token);
    pos = end + 1;
    ++line;
  }
  return Vocabulary(std::move(tokens), std::move(specials), std::move(continuation_prefix));
}

Vocabulary load_vocab_file(const std::filesystem::path& path, SpecialTokens specials,
                           std::string continuation_prefix) {
  return parse_vocab_text(read_file(path), std::move(specials), std::move(continuation_prefix));
}

std::string to_vocab_text(const Vocabulary& vocab) {
  std::string out;
  for (const std::string& token : vocab.tokens()) {
    out += token;
    out += '\n';
  }
  return out;
}

}  // namespace nusavocab
