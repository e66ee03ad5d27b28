#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace nusavocab::metrics {

struct ClassScores {
  std::uint64_t true_positives = 0;
  std::uint64_t false_positives = 0;
  std::uint64_t false_negatives = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct MacroF1Report {
  double macro_f1 = 0.0;
  std::map<std::string, ClassScores> per_class;
};

/// Unweighted mean of per-class F1 over `label_set` (defaults to the sorted
/// union of gold and predicted labels). A zero denominator yields 0 for that
/// precision, recall or F1. Throws DataError on a length mismatch, empty
/// input, or a gold label missing from an explicit label set.
MacroF1Report macro_f1(std::span<const std::string> gold, std::span<const std::string> pred,
                       std::optional<std::set<std::string>> label_set = std::nullopt);

struct Span {
  std::size_t start = 0;
  std::size_t end = 0;  // inclusive
  std::string type;

  friend auto operator<=>(const Span&, const Span&) = default;
};

/// Decodes BIO tags into typed spans. An I-X that does not continue a span of
/// type X opens a new one. Throws DataError on a tag that is not "O", "B-X"
/// or "I-X".
std::vector<Span> decode_bio(std::span<const std::string> tags);

struct SequencePair {
  std::vector<std::string> gold;
  std::vector<std::string> pred;
};

struct SpanF1Report {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::uint64_t true_positives = 0;
  std::uint64_t predicted_spans = 0;
  std::uint64_t gold_spans = 0;
  bool empty = false;  // no gold and no predicted spans at all
};

/// Micro-averaged exact-match span P/R/F1 across all pairs. Throws DataError
/// naming the pair index on a length mismatch.
SpanF1Report conll_span_f1(std::span<const SequencePair> pairs);

/// e^loss. Throws DataError for negative or non-finite loss.
double perplexity(double loss);

/// original - perturbed, both in percent. Lower means more robust. The result
/// is rounded to 1e-9 so two-decimal table values subtract exactly.
double delta_accuracy(double original_pct, double perturbed_pct);

}  // namespace nusavocab::metrics
