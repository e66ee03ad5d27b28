#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "nusavocab/document.hpp"
#include "nusavocab/tokenizer.hpp"
#include "nusavocab/vocabulary.hpp"

namespace nusavocab {

/// Dense row-major float32 matrix; one row per vocabulary id.
class EmbeddingMatrix {
 public:
  EmbeddingMatrix() = default;
  // Throws DataError if data.size() != rows * cols, cols == 0, or any value
  // is not finite.
  EmbeddingMatrix(std::size_t rows, std::size_t cols, std::vector<float> data);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::span<const float> data() const noexcept { return data_; }
  std::span<const float> row(std::size_t r) const { return std::span(data_).subspan(r * cols_, cols_); }
  float at(std::size_t r, std::size_t c) const { return data_.at(r * cols_ + c); }

  friend bool operator==(const EmbeddingMatrix&, const EmbeddingMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<float> data_;
};

// "EMB1", u32 rows, u32 cols, rows*cols f32; all little-endian.
std::string serialize_embeddings(const EmbeddingMatrix& matrix);
EmbeddingMatrix deserialize_embeddings(std::string_view bytes);
EmbeddingMatrix load_embeddings(const std::filesystem::path& path);

struct ExpansionReport {
  std::size_t base_size = 0;
  std::size_t candidate_size = 0;
  std::vector<std::string> new_tokens;
  std::size_t extended_size = 0;
};

/// Candidate tokens absent from `base`, excluding special tokens, in
/// candidate id order.
std::vector<std::string> diff_vocabulary(const Vocabulary& base, const Vocabulary& candidate);

/// Appends `new_tokens` after every base id. Throws DataError naming the first
/// token that already exists in `base` or repeats within `new_tokens`.
Vocabulary extend_vocabulary(const Vocabulary& base, std::span<const std::string> new_tokens);

/// diff + extend in one step, with the bookkeeping needed for a report.
ExpansionReport plan_expansion(const Vocabulary& base, const Vocabulary& candidate);

/// Appends `new_count` rows, each the column-wise mean of the original rows
/// (64-bit accumulation, stored as float32). Rows listed in `excluded_rows`
/// do not contribute to the mean. Throws DataError when no row contributes.
EmbeddingMatrix extend_embeddings(const EmbeddingMatrix& matrix, std::size_t new_count,
                                  std::span<const TokenId> excluded_rows = {});

struct NewTokenProportion {
  std::uint64_t new_tokens = 0;
  std::uint64_t total_tokens = 0;
  double ratio = 0.0;  // 0 when total_tokens == 0
};

/// #new tokens / #total tokens when `documents` are encoded (without
/// [CLS]/[SEP]) by `extended_model`; a token is new when its id is at least
/// the base vocabulary size. Throws DataError unless the extended vocabulary
/// is a prefix-preserving extension of the base one.
NewTokenProportion proportion_new_tokens(std::span<const Document> documents,
                                         const TokenizerModel& base_model,
                                         const TokenizerModel& extended_model);

bool is_prefix_extension(const Vocabulary& base, const Vocabulary& extended);

}  // namespace nusavocab
