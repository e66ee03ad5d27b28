#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nusavocab/document.hpp"

namespace nusavocab::codemix {

/// Word-level bilingual lexicon into one L2 language. Keys and values are
/// stored NFC-normalized and lowercased.
struct Lexicon {
  std::string l2_code;
  std::map<std::string, std::string, std::less<>> entries;

  const std::string* find(std::string_view normalized_word) const;
};

/// TSV: "source<TAB>target" per line; blank lines and lines starting with '#'
/// are ignored. Empty fields, missing tabs and repeated sources throw
/// DataError with the line number.
Lexicon parse_lexicon(std::string_view tsv, std::string l2_code);
Lexicon load_lexicon(const std::filesystem::path& path, std::string l2_code);

struct CodeMixConfig {
  double ratio = 0.4;
  std::uint64_t seed = 0;
};

struct Replacement {
  std::size_t position = 0;  // index among the sentence's whitespace tokens
  std::string source;
  std::string target;

  friend bool operator==(const Replacement&, const Replacement&) = default;
};

struct PerturbedSentence {
  std::string text;
  std::vector<Replacement> log;
  std::size_t eligible = 0;
};

/// ceil(ratio * eligible), robust to floating error in the product.
std::size_t replacement_count(double ratio, std::size_t eligible);

/// Chooses k of n slots: draw i picks the r-th smallest unchosen slot with
/// r uniform in [0, n - i). Returned slots are ascending.
std::vector<std::size_t> sample_slots(std::size_t n, std::size_t k, std::uint64_t key);

/// Replaces ceil(R * #eligible) uniformly chosen lexicon words with their
/// translations. Eligible words are whitespace tokens whose lowercased core
/// (leading and trailing punctuation stripped) is a lexicon key. Attached
/// punctuation, original whitespace, and an initial capital are preserved.
PerturbedSentence perturb_sentence(std::string_view sentence, const Lexicon& lexicon,
                                   const CodeMixConfig& cfg);

struct CodeMixSummary {
  std::uint64_t sentences = 0;
  std::uint64_t total_eligible = 0;
  std::uint64_t total_replaced = 0;
  double realized_ratio = 0.0;  // replaced / eligible, 0 when nothing was eligible
};

struct PerturbedDataset {
  std::vector<Document> documents;
  std::vector<std::vector<Replacement>> logs;
  CodeMixSummary summary;
};

/// Seed for one document, derived from the run seed and the document id.
std::uint64_t document_seed(std::uint64_t seed, std::string_view document_id);

/// perturb_sentence on every document text (in parallel), each with
/// document_seed(cfg.seed, id).
PerturbedDataset perturb_dataset(std::span<const Document> documents, const Lexicon& lexicon,
                                 const CodeMixConfig& cfg);

}  // namespace nusavocab::codemix
