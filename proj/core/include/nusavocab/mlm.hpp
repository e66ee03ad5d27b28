#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nusavocab/document.hpp"
#include "nusavocab/tokenizer.hpp"
#include "nusavocab/vocabulary.hpp"

namespace nusavocab {

struct PackedSequence {
  std::vector<TokenId> ids;

  friend bool operator==(const PackedSequence&, const PackedSequence&) = default;
};

struct PackResult {
  std::size_t sequence_length = 0;
  std::vector<PackedSequence> sequences;
  std::uint64_t total_ids = 0;      // ids in the concatenated stream
  std::uint64_t discarded_ids = 0;  // trailing partial chunk
};

/// Encodes every document with [CLS]/[SEP] framing, concatenates the ids in
/// input order and cuts consecutive chunks of exactly `length` ids. The final
/// partial chunk is dropped. With `shuffle_seed`, documents are concatenated
/// in a seeded permutation instead of input order.
PackResult pack_sequences(std::span<const Document> documents, const TokenizerModel& model,
                          std::size_t length, std::optional<std::uint64_t> shuffle_seed = std::nullopt);

/// Chunking of an already-encoded id stream.
PackResult pack_stream(std::span<const TokenId> stream, std::size_t length);

// "PAK1", u32 length, u64 count, ids as u32; all little-endian.
std::string serialize_packed(const PackResult& packed);
PackResult deserialize_packed(std::string_view bytes);
PackResult load_packed(const std::filesystem::path& path);

enum class MaskSelection {
  bernoulli,    // each maskable position independently with mask_fraction
  exact_count,  // round(mask_fraction * maskable) positions, sampled uniformly
};

struct MaskingConfig {
  double mask_fraction = 0.15;
  double mask_prob = 0.8;
  double random_prob = 0.1;
  double keep_prob = 0.1;
  bool exclude_specials = true;
  MaskSelection selection = MaskSelection::bernoulli;

  // Throws DataError describing the first violated constraint.
  void validate() const;
};

enum class MaskAction : std::uint8_t { untouched, masked, randomized, kept };

inline constexpr std::int32_t kIgnoreLabel = -100;

struct MaskedExample {
  std::vector<TokenId> input_ids;
  std::vector<std::int32_t> labels;  // original id, or kIgnoreLabel
  std::vector<MaskAction> actions;
  std::uint32_t maskable = 0;  // positions eligible for selection

  friend bool operator==(const MaskedExample&, const MaskedExample&) = default;
};

/// RoBERTa-style dynamic masking. Every random draw is keyed by
/// (seed, epoch, sequence_index, position), so masks differ across epochs yet
/// are reproducible and independent of processing order. Randomized positions
/// draw uniformly from the non-special ids.
MaskedExample apply_masking(const PackedSequence& seq, const MaskingConfig& cfg, const Vocabulary& vocab,
                            std::uint64_t seed, std::uint64_t epoch, std::uint64_t sequence_index);

/// apply_masking over a batch, in parallel; sequence i uses index i.
std::vector<MaskedExample> mask_sequences(std::span<const PackedSequence> sequences,
                                          const MaskingConfig& cfg, const Vocabulary& vocab,
                                          std::uint64_t seed, std::uint64_t epoch);

struct MaskingStats {
  std::uint64_t count = 0;
  std::uint64_t maskable = 0;
  std::uint64_t selected = 0;
  std::uint64_t masked = 0;
  std::uint64_t randomized = 0;
  std::uint64_t kept = 0;

  double selected_fraction() const;
  double mask_share() const;
  double random_share() const;
  double keep_share() const;

  void add(const MaskedExample& example);
};

MaskingStats masking_stats(std::span<const MaskedExample> examples);

char action_code(MaskAction action);
MaskAction parse_action_code(char code);
std::string masked_example_to_json(const MaskedExample& example, std::uint64_t index);
MaskedExample masked_example_from_json(std::string_view line);

}  // namespace nusavocab
