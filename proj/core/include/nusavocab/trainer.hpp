#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "nusavocab/document.hpp"
#include "nusavocab/tokenizer.hpp"
#include "nusavocab/vocabulary.hpp"

namespace nusavocab {

struct WordFrequencyTable {
  std::map<std::string, std::uint64_t, std::less<>> entries;
  std::uint64_t total_words = 0;

  void add(std::string_view word, std::uint64_t count = 1);
  void merge(const WordFrequencyTable& other);

  friend bool operator==(const WordFrequencyTable&, const WordFrequencyTable&) = default;
};

/// Counts pre-tokenized words across documents using the front end of
/// `front_end`. Documents are processed in parallel; the result does not
/// depend on document order. Text that is not valid UTF-8 throws DataError
/// naming the document id.
WordFrequencyTable collect_word_frequencies(std::span<const Document> documents,
                                            const TokenizerModel& front_end);

struct TrainerConfig {
  std::size_t target_vocab_size = 10000;
  std::uint64_t min_pair_frequency = 2;
  // Caps the initial alphabet; the most frequent symbols are kept.
  std::optional<std::size_t> initial_alphabet_limit;
  SpecialTokens specials;
  std::string continuation_prefix = "##";
};

/// Likelihood-scored WordPiece training.
///
/// Words start as characters (first bare, the rest prefixed). Each round
/// merges the adjacent pair with the highest freq(ab) / (freq(a) * freq(b))
/// among pairs seen at least min_pair_frequency times, ties going to the
/// lexicographically smallest merged string. Stops at target_vocab_size or
/// when no pair qualifies. Output order: specials, sorted alphabet, merges in
/// creation order. Scores are compared exactly in integer arithmetic.
Vocabulary train_wordpiece(const WordFrequencyTable& freqs, const TrainerConfig& cfg);

}  // namespace nusavocab
